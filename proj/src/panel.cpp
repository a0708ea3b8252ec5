#include "penhmm/panel.hpp"

#include <stdexcept>

#include "penhmm/numerics.hpp"

namespace penhmm {

void PanelDataset::validate() const {
  if (n < 1) throw std::invalid_argument("panel: need at least one subject");
  if (T < 2) throw std::invalid_argument("panel: need at least two occasions");
  if (p < 0) throw std::invalid_argument("panel: negative covariate count");
  if (y.rows() != n || y.cols() != T)
    throw std::invalid_argument("panel: response array has wrong shape");
  if (X.rows() != static_cast<Eigen::Index>(n) * T || X.cols() != p)
    throw std::invalid_argument("panel: covariate array has wrong shape");
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      if (y(i, t) != 0 && y(i, t) != 1)
        throw std::invalid_argument("panel: response must be 0 or 1");
  if (p > 0 && !X.allFinite())
    throw std::invalid_argument("panel: covariates must be finite");
  if (!covariate_names.empty() &&
      covariate_names.size() != static_cast<size_t>(p))
    throw std::invalid_argument("panel: covariate name count mismatch");
  if (lag_column >= p)
    throw std::invalid_argument("panel: lag column out of range");
  if (lag_column >= 0) {
    for (int i = 0; i < n; ++i)
      for (int t = 1; t < T; ++t)
        if (X(row(i, t), lag_column) != static_cast<double>(y(i, t - 1)))
          throw std::invalid_argument(
              "panel: lag column does not match shifted response");
  }
}

PanelDataset PanelDataset::subset(const std::vector<int>& subjects) const {
  PanelDataset out;
  out.n = static_cast<int>(subjects.size());
  out.T = T;
  out.p = p;
  out.covariate_names = covariate_names;
  out.lag_column = lag_column;
  out.y.resize(out.n, T);
  out.X.resize(static_cast<Eigen::Index>(out.n) * T, p);
  const bool meta = !subject_ids.empty();
  if (meta) {
    out.subject_ids.resize(subjects.size());
    out.time.resize(out.n, T);
  }
  for (int j = 0; j < out.n; ++j) {
    const int i = subjects[j];
    if (i < 0 || i >= n) throw std::invalid_argument("subset: bad subject index");
    out.y.row(j) = y.row(i);
    out.X.middleRows(static_cast<Eigen::Index>(j) * T, T) =
        X.middleRows(static_cast<Eigen::Index>(i) * T, T);
    if (meta) {
      out.subject_ids[j] = subject_ids[i];
      out.time.row(j) = time.row(i);
    }
  }
  return out;
}

void PanelDataset::fill_default_metadata() {
  if (subject_ids.empty()) {
    subject_ids.resize(n);
    for (int i = 0; i < n; ++i) subject_ids[i] = std::to_string(i + 1);
  }
  if (time.size() == 0) {
    time.resize(n, T);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t) time(i, t) = t + 1;
  }
}

}  // namespace penhmm
