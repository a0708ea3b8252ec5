#ifndef PENHMM_PANEL_HPP
#define PENHMM_PANEL_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

namespace penhmm {

using RowMajorXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Balanced panel of n subjects observed at T common occasions.
// Responses are binary; covariates are stored flattened with row index
// i*T + t so that x for one (subject, occasion) is contiguous.
struct PanelDataset {
  int n = 0;
  int T = 0;
  int p = 0;
  Eigen::MatrixXi y;  // n x T, entries in {0,1}
  RowMajorXd X;       // (n*T) x p
  std::vector<std::string> covariate_names;
  int lag_column = -1;  // index of the lagged-response column, -1 if none

  // Ingestion metadata; empty for programmatically built panels.
  std::vector<std::string> subject_ids;
  Eigen::MatrixXd time;  // n x T occasion stamps

  int row(int i, int t) const { return i * T + t; }

  // Throws std::invalid_argument on malformed content.
  void validate() const;

  // New panel containing the given subjects, in the given order.
  PanelDataset subset(const std::vector<int>& subjects) const;

  // Default ids "1".."n" and times 1..T when metadata is absent.
  void fill_default_metadata();
};

}  // namespace penhmm

#endif  // PENHMM_PANEL_HPP
