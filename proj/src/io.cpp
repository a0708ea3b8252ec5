#include "penhmm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace penhmm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + " value '" + s + "'");
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

PanelDataset load_panel(const std::string& path, const ColumnSchema& schema) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw std::invalid_argument("panel file has no rows");

  const std::vector<std::string> header = split(lines[0], ',');
  std::map<std::string, int> col;
  for (size_t c = 0; c < header.size(); ++c) {
    if (col.count(header[c]))
      throw std::invalid_argument("duplicate column: " + header[c]);
    col[header[c]] = static_cast<int>(c);
  }
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end())
      throw std::invalid_argument("unknown column: " + name);
    return it->second;
  };
  const int id_col = require(schema.id);
  const int time_col = require(schema.time);
  const int y_col = require(schema.response);

  std::vector<std::string> covs = schema.covariates;
  if (covs.empty()) {
    for (const std::string& h : header)
      if (h != schema.id && h != schema.time && h != schema.response)
        covs.push_back(h);
  }
  std::vector<int> cov_cols;
  for (const std::string& c : covs) cov_cols.push_back(require(c));
  for (const auto& [name, ref] : schema.categorical)
    if (std::find(covs.begin(), covs.end(), name) == covs.end())
      throw std::invalid_argument("unknown categorical column: " + name);

  struct Row {
    double time;
    int y;
    std::vector<std::string> cells;
  };
  std::vector<std::string> ids;
  std::map<std::string, int> id_index;
  std::vector<std::vector<Row>> rows;
  for (size_t l = 1; l < lines.size(); ++l) {
    const std::vector<std::string> cells = split(lines[l], ',');
    if (cells.size() != header.size())
      throw std::invalid_argument("row " + std::to_string(l + 1) +
                                  " has wrong field count");
    const std::string& id = cells[id_col];
    if (!id_index.count(id)) {
      id_index[id] = static_cast<int>(ids.size());
      ids.push_back(id);
      rows.emplace_back();
    }
    Row row;
    row.time = parse_double(cells[time_col], "time");
    const double yv = parse_double(cells[y_col], "response");
    if (yv != 0.0 && yv != 1.0)
      throw std::invalid_argument("non-binary response '" + cells[y_col] +
                                  "' for subject " + id);
    row.y = static_cast<int>(yv);
    for (int c : cov_cols) row.cells.push_back(cells[c]);
    rows[id_index[id]].push_back(std::move(row));
  }

  const int n = static_cast<int>(ids.size());
  const int T = static_cast<int>(rows[0].size());
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != T)
      throw std::invalid_argument(
          "ragged panel: subject " + ids[i] + " has " +
          std::to_string(rows[i].size()) + " occasions, expected " +
          std::to_string(T));
    std::stable_sort(rows[i].begin(), rows[i].end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });
  }
  if (T < 2) throw std::invalid_argument("panel needs at least two occasions");

  // Expanded column layout: numeric columns stay single, categoricals get
  // one indicator per non-reference level.
  struct Expanded {
    std::string name;
    int source;          // index into covs
    bool categorical;
    std::string level;
  };
  std::vector<Expanded> layout;
  for (size_t c = 0; c < covs.size(); ++c) {
    auto cat = schema.categorical.find(covs[c]);
    if (cat == schema.categorical.end()) {
      layout.push_back({covs[c], static_cast<int>(c), false, ""});
      continue;
    }
    std::set<std::string> levels;
    for (int i = 0; i < n; ++i)
      for (const Row& row : rows[i]) levels.insert(row.cells[c]);
    if (!levels.count(cat->second))
      throw std::invalid_argument("reference level '" + cat->second +
                                  "' not found in column " + covs[c]);
    for (const std::string& level : levels)
      if (level != cat->second)
        layout.push_back({covs[c] + "(" + level + ")", static_cast<int>(c),
                          true, level});
  }

  PanelDataset data;
  data.n = n;
  data.T = T;
  data.p = static_cast<int>(layout.size());
  data.y.resize(n, T);
  data.X.resize(static_cast<Eigen::Index>(n) * T, data.p);
  data.subject_ids = ids;
  data.time.resize(n, T);
  for (const Expanded& e : layout) data.covariate_names.push_back(e.name);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) {
      const Row& row = rows[i][t];
      data.y(i, t) = row.y;
      data.time(i, t) = row.time;
      const int r = data.row(i, t);
      for (size_t j = 0; j < layout.size(); ++j) {
        const Expanded& e = layout[j];
        data.X(r, static_cast<Eigen::Index>(j)) =
            e.categorical
                ? (row.cells[e.source] == e.level ? 1.0 : 0.0)
                : parse_double(row.cells[e.source], "covariate " + e.name);
      }
    }
  }
  data.validate();
  return data;
}

PanelDataset add_lag_column(const PanelDataset& data, LagPolicy policy,
                            const std::string& name) {
  data.validate();
  if (data.lag_column >= 0)
    throw std::invalid_argument("add_lag_column: lag column already present");

  PanelDataset out;
  out.p = data.p + 1;
  out.covariate_names = data.covariate_names;
  if (out.covariate_names.empty())
    for (int j = 0; j < data.p; ++j)
      out.covariate_names.push_back("x" + std::to_string(j + 1));
  out.covariate_names.push_back(name);
  out.lag_column = data.p;
  out.subject_ids = data.subject_ids;

  if (policy == LagPolicy::ImputeZero) {
    out.n = data.n;
    out.T = data.T;
    out.y = data.y;
    out.time = data.time;
    out.X.resize(data.X.rows(), out.p);
    out.X.leftCols(data.p) = data.X;
    for (int i = 0; i < out.n; ++i)
      for (int t = 0; t < out.T; ++t)
        out.X(out.row(i, t), data.p) =
            t == 0 ? 0.0 : static_cast<double>(data.y(i, t - 1));
    // An imputed first-occasion lag is not the shifted response, so the
    // panel-level lag marker stays honest only for t >= 2; validate() checks
    // exactly that.
    out.validate();
    return out;
  }

  if (data.T < 3)
    throw std::invalid_argument(
        "add_lag_column: drop-first policy needs at least three occasions");
  out.n = data.n;
  out.T = data.T - 1;
  out.y.resize(out.n, out.T);
  out.X.resize(static_cast<Eigen::Index>(out.n) * out.T, out.p);
  if (data.time.size() > 0) out.time.resize(out.n, out.T);
  for (int i = 0; i < out.n; ++i) {
    for (int t = 0; t < out.T; ++t) {
      out.y(i, t) = data.y(i, t + 1);
      if (data.time.size() > 0) out.time(i, t) = data.time(i, t + 1);
      out.X.row(out.row(i, t)).head(data.p) = data.X.row(data.row(i, t + 1));
      out.X(out.row(i, t), data.p) = static_cast<double>(data.y(i, t));
    }
  }
  out.validate();
  return out;
}

void save_panel_csv(const PanelDataset& data, const std::string& path) {
  PanelDataset copy = data;
  copy.fill_default_metadata();
  std::ostringstream out;
  out << "id,time,y";
  for (int j = 0; j < data.p; ++j)
    out << ","
        << (data.covariate_names.empty() ? "x" + std::to_string(j + 1)
                                         : data.covariate_names[j]);
  out << "\n";
  for (int i = 0; i < data.n; ++i) {
    for (int t = 0; t < data.T; ++t) {
      out << copy.subject_ids[i] << "," << fmt(copy.time(i, t)) << ","
          << data.y(i, t);
      for (int j = 0; j < data.p; ++j)
        out << "," << fmt(data.X(data.row(i, t), j));
      out << "\n";
    }
  }
  write_text_file(path, out.str());
}

nlohmann::json params_to_json(const HmmParams& params) {
  nlohmann::json j;
  j["k"] = params.k;
  j["alpha"] = std::vector<double>(params.alpha.begin(), params.alpha.end());
  j["beta"] = std::vector<double>(params.beta.begin(), params.beta.end());
  j["pi"] = std::vector<double>(params.pi.begin(), params.pi.end());
  std::vector<std::vector<double>> Pi;
  for (int u = 0; u < params.k; ++u)
    Pi.emplace_back(params.Pi.row(u).begin(), params.Pi.row(u).end());
  j["Pi"] = Pi;
  return j;
}

HmmParams params_from_json(const nlohmann::json& j) {
  HmmParams p;
  p.k = j.at("k").get<int>();
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  const auto pi = j.at("pi").get<std::vector<double>>();
  const auto Pi = j.at("Pi").get<std::vector<std::vector<double>>>();
  p.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
  p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  p.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(), pi.size());
  p.Pi.resize(p.k, p.k);
  for (int u = 0; u < p.k; ++u)
    for (int v = 0; v < p.k; ++v) p.Pi(u, v) = Pi.at(u).at(v);
  p.validate();
  return p;
}

namespace {

nlohmann::json optional_double(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json fit_to_json(const FitResult& fit, double lambda,
                           const std::vector<std::string>& covariate_names,
                           const SeReport* se) {
  nlohmann::json j;
  j["lambda"] = lambda;
  j["params"] = params_to_json(fit.params);
  j["covariates"] = covariate_names;
  j["loglik"] = fit.loglik;
  j["penalized_loglik"] = fit.penalized_loglik;
  j["n_iters"] = fit.n_iters;
  j["converged"] = fit.converged;
  j["start_id"] = fit.start_id;
  j["n_free_params"] = fit.params.n_free_params();
  j["uniform_row_fix"] = fit.uniform_row_fix;
  j["nr_fallbacks"] = fit.nr_fallbacks;
  j["loglik_trace"] = fit.loglik_trace;
  if (se != nullptr) {
    nlohmann::json js;
    std::vector<nlohmann::json> se_alpha, se_beta, pvals;
    for (int u = 0; u < fit.params.k; ++u)
      se_alpha.push_back(optional_double(se->se(u)));
    for (int c = 0; c < fit.params.p(); ++c) {
      se_beta.push_back(optional_double(se->se(fit.params.k + c)));
      pvals.push_back(optional_double(se->pvalues(c)));
    }
    js["alpha"] = se_alpha;
    js["beta"] = se_beta;
    js["pvalues_beta"] = pvals;
    js["full_rank"] = se->full_rank;
    js["min_eigenvalue"] = se->min_eigenvalue;
    js["max_eigenvalue"] = se->max_eigenvalue;
    j["se"] = js;
  }
  return j;
}

nlohmann::json cv_to_json(const CvResult& cv) {
  nlohmann::json j;
  j["ks"] = cv.ks;
  j["lambdas"] = cv.lambdas;
  j["M"] = cv.M;
  j["fold_assignment"] = cv.fold_assignment;
  j["best_k"] = cv.best_k;
  j["best_lambda"] = cv.best_lambda;
  std::vector<std::vector<nlohmann::json>> table;
  nlohmann::json folds = nlohmann::json::array();
  for (size_t ki = 0; ki < cv.ks.size(); ++ki) {
    std::vector<nlohmann::json> row;
    for (size_t li = 0; li < cv.lambdas.size(); ++li) {
      const CvCell& cell = cv.cells[ki][li];
      row.push_back(cell.evaluated ? nlohmann::json(cell.cv_loglik)
                                   : nlohmann::json(nullptr));
      if (cell.evaluated) {
        nlohmann::json f;
        f["k"] = cv.ks[ki];
        f["lambda"] = cv.lambdas[li];
        f["loglik"] = cell.fold_loglik;
        std::vector<bool> conv(cell.fold_converged.begin(),
                               cell.fold_converged.end());
        f["converged"] = conv;
        f["all_failed"] = cell.all_failed;
        folds.push_back(f);
      }
    }
    table.push_back(row);
  }
  j["table"] = table;
  j["per_fold"] = folds;
  return j;
}

nlohmann::json metric_table_to_json(const MetricTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ScenarioMetrics& sm : table.rows) {
    nlohmann::json r;
    r["scenario"] = sm.label;
    r["excluded_replicates"] = sm.excluded_replicates;
    nlohmann::json cells = nlohmann::json::array();
    for (const StudyCell& cell : sm.cells) {
      nlohmann::json c;
      c["lambda"] = cell.lambda;
      c["mse_alpha"] = cell.mse_alpha;
      c["mse_beta"] = cell.mse_beta;
      c["mean_se_beta"] = cell.mean_se_beta;
      c["mean_seconds"] = cell.mean_seconds;
      c["replicates_used"] = cell.replicates_used;
      cells.push_back(c);
    }
    r["cells"] = cells;
    rows.push_back(r);
  }
  nlohmann::json j;
  j["scenarios"] = rows;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

std::string beta_table_csv(const FitResult& fit,
                           const std::vector<std::string>& covariate_names,
                           const SeReport* se) {
  std::ostringstream out;
  out << "covariate,estimate,se,p_value\n";
  const int k = fit.params.k;
  for (int j = 0; j < fit.params.p(); ++j) {
    const std::string name = j < static_cast<int>(covariate_names.size())
                                 ? covariate_names[j]
                                 : "x" + std::to_string(j + 1);
    out << name << "," << fmt(fit.params.beta(j));
    if (se != nullptr && std::isfinite(se->se(k + j)))
      out << "," << fmt(se->se(k + j)) << "," << fmt(se->pvalues(j));
    else
      out << ",,";
    out << "\n";
  }
  return out.str();
}

std::string cv_table_csv(const CvResult& cv) {
  std::ostringstream out;
  out << "k";
  for (double l : cv.lambdas) out << ",lambda_" << fmt(l);
  out << "\n";
  for (size_t ki = 0; ki < cv.ks.size(); ++ki) {
    out << cv.ks[ki];
    for (size_t li = 0; li < cv.lambdas.size(); ++li) {
      const CvCell& cell = cv.cells[ki][li];
      out << ",";
      if (cell.evaluated) out << fmt(cell.cv_loglik);
    }
    out << "\n";
  }
  return out.str();
}

std::string decoding_csv(const PanelDataset& data, const Decoding& dec) {
  PanelDataset copy = data;
  copy.fill_default_metadata();
  std::ostringstream out;
  out << "id,time,state,alpha_bar\n";
  for (int i = 0; i < data.n; ++i)
    for (int t = 0; t < data.T; ++t)
      out << copy.subject_ids[i] << "," << fmt(copy.time(i, t)) << ","
          << dec.states(i, t) + 1 << "," << fmt(dec.alpha_bar(i, t)) << "\n";
  return out.str();
}

std::string metric_table_csv(const MetricTable& table) {
  std::ostringstream out;
  out << "scenario,lambda,parameter,mse,mse_pct_vs_lambda0,mean_se,"
         "se_pct_vs_lambda0,mean_seconds,time_pct_vs_lambda0,replicates_used\n";
  for (const ScenarioMetrics& sm : table.rows) {
    if (sm.cells.empty()) continue;
    const StudyCell& base = sm.cells.front();
    for (const StudyCell& cell : sm.cells) {
      auto emit = [&](const std::string& param, double v, double v0,
                      double se_v, double se_v0) {
        out << sm.label << "," << fmt(cell.lambda) << "," << param << ","
            << fmt(v) << "," << fmt(pct_change(v, v0)) << ",";
        if (std::isfinite(se_v)) out << fmt(se_v);
        out << ",";
        if (std::isfinite(se_v) && std::isfinite(se_v0))
          out << fmt(pct_change(se_v, se_v0));
        out << "," << fmt(cell.mean_seconds) << ","
            << fmt(pct_change(cell.mean_seconds, base.mean_seconds)) << ","
            << cell.replicates_used << "\n";
      };
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (size_t u = 0; u < cell.mse_alpha.size(); ++u)
        emit("alpha" + std::to_string(u + 1), cell.mse_alpha[u],
             base.mse_alpha[u], nan, nan);
      for (size_t j = 0; j < cell.mse_beta.size(); ++j)
        emit("beta" + std::to_string(j + 1), cell.mse_beta[j],
             base.mse_beta[j], cell.mean_se_beta[j], base.mean_se_beta[j]);
    }
  }
  return out.str();
}

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ','))
    if (!item.empty()) out.push_back(parse_double(item, "list"));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  // "1..4" expands to 1,2,3,4
  const size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = static_cast<int>(parse_double(trim(s.substr(0, dots)), "k"));
    const int hi = static_cast<int>(parse_double(trim(s.substr(dots + 2)), "k"));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  for (const std::string& item : split(s, ','))
    if (!item.empty())
      out.push_back(static_cast<int>(parse_double(item, "k")));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + fmt(v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

Eigen::VectorXd parse_alpha_spec(const std::string& s) {
  if (s.size() == 2 && s[0] == 'a' && s[1] >= '1' && s[1] <= '5')
    return Scenario::alpha_preset(s[1] - '0');
  return to_vector(parse_double_list(s));
}

std::vector<int> parse_k_spec(const std::string& s) { return parse_int_list(s); }

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  for (const std::string& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line missing '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "command") cfg.command = value;
    else if (key == "data") cfg.data_path = value;
    else if (key == "out") cfg.out_path = value;
    else if (key == "format") cfg.format = value;
    else if (key == "id_column") cfg.schema.id = value;
    else if (key == "time_column") cfg.schema.time = value;
    else if (key == "response_column") cfg.schema.response = value;
    else if (key == "covariates") {
      cfg.schema.covariates.clear();
      for (const std::string& c : split(value, ','))
        if (!c.empty()) cfg.schema.covariates.push_back(c);
    } else if (key.rfind("categorical.", 0) == 0) {
      cfg.schema.categorical[key.substr(12)] = value;
    } else if (key == "k") cfg.ks = parse_int_list(value);
    else if (key == "lambda") cfg.lambdas = parse_double_list(value);
    else if (key == "folds") cfg.folds = static_cast<int>(parse_double(value, key));
    else if (key == "lag") cfg.lag = value;
    else if (key == "starts_deterministic")
      cfg.em.n_starts_deterministic = static_cast<int>(parse_double(value, key));
    else if (key == "starts_random")
      cfg.em.n_starts_random = static_cast<int>(parse_double(value, key));
    else if (key == "seed")
      cfg.em.seed = static_cast<std::uint64_t>(parse_double(value, key));
    else if (key == "eps_loglik") cfg.em.eps_loglik = parse_double(value, key);
    else if (key == "eps_params") cfg.em.eps_params = parse_double(value, key);
    else if (key == "max_em_iters")
      cfg.em.max_em_iters = static_cast<int>(parse_double(value, key));
    else if (key == "max_nr_iters")
      cfg.em.max_nr_iters = static_cast<int>(parse_double(value, key));
    else if (key == "nr_tol") cfg.em.nr_tol = parse_double(value, key);
    else if (key == "scenario_alpha") {
      cfg.scenario.alpha = parse_alpha_spec(value);
      cfg.scenario_set = true;
    } else if (key == "scenario_beta")
      cfg.scenario.beta = to_vector(parse_double_list(value));
    else if (key == "scenario_pi")
      cfg.scenario.pi = to_vector(parse_double_list(value));
    else if (key == "scenario_n")
      cfg.scenario.n = static_cast<int>(parse_double(value, key));
    else if (key == "scenario_T")
      cfg.scenario.T = static_cast<int>(parse_double(value, key));
    else if (key == "scenario_persistence")
      cfg.scenario.persistence =
          value == "high" ? Persistence::High : Persistence::Low;
    else if (key == "scenario_include_lag")
      cfg.scenario.include_lag = value == "true" || value == "1";
    else if (key == "scenario_replicates")
      cfg.scenario.n_replicates = static_cast<int>(parse_double(value, key));
    else if (key == "scenario_seed")
      cfg.scenario.seed = static_cast<std::uint64_t>(parse_double(value, key));
    else if (key == "scenario_label") cfg.scenario.label = value;
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  if (!cfg.command.empty()) out << "command = " << cfg.command << "\n";
  if (!cfg.data_path.empty()) out << "data = " << cfg.data_path << "\n";
  out << "out = " << cfg.out_path << "\n";
  out << "format = " << cfg.format << "\n";
  out << "id_column = " << cfg.schema.id << "\n";
  out << "time_column = " << cfg.schema.time << "\n";
  out << "response_column = " << cfg.schema.response << "\n";
  if (!cfg.schema.covariates.empty()) {
    out << "covariates = ";
    for (size_t i = 0; i < cfg.schema.covariates.size(); ++i)
      out << (i ? "," : "") << cfg.schema.covariates[i];
    out << "\n";
  }
  for (const auto& [name, ref] : cfg.schema.categorical)
    out << "categorical." << name << " = " << ref << "\n";
  out << "k = " << join_ints(cfg.ks) << "\n";
  out << "lambda = " << join_doubles(cfg.lambdas) << "\n";
  out << "folds = " << cfg.folds << "\n";
  out << "lag = " << cfg.lag << "\n";
  out << "starts_deterministic = " << cfg.em.n_starts_deterministic << "\n";
  out << "starts_random = " << cfg.em.n_starts_random << "\n";
  out << "seed = " << cfg.em.seed << "\n";
  out << "eps_loglik = " << fmt(cfg.em.eps_loglik) << "\n";
  out << "eps_params = " << fmt(cfg.em.eps_params) << "\n";
  out << "max_em_iters = " << cfg.em.max_em_iters << "\n";
  out << "max_nr_iters = " << cfg.em.max_nr_iters << "\n";
  out << "nr_tol = " << fmt(cfg.em.nr_tol) << "\n";
  if (cfg.scenario_set) {
    out << "scenario_alpha = "
        << join_doubles(std::vector<double>(cfg.scenario.alpha.begin(),
                                            cfg.scenario.alpha.end()))
        << "\n";
    out << "scenario_beta = "
        << join_doubles(std::vector<double>(cfg.scenario.beta.begin(),
                                            cfg.scenario.beta.end()))
        << "\n";
    if (cfg.scenario.pi.size() > 0)
      out << "scenario_pi = "
          << join_doubles(std::vector<double>(cfg.scenario.pi.begin(),
                                              cfg.scenario.pi.end()))
          << "\n";
    out << "scenario_n = " << cfg.scenario.n << "\n";
    out << "scenario_T = " << cfg.scenario.T << "\n";
    out << "scenario_persistence = "
        << (cfg.scenario.persistence == Persistence::High ? "high" : "low")
        << "\n";
    out << "scenario_include_lag = "
        << (cfg.scenario.include_lag ? "true" : "false") << "\n";
    out << "scenario_replicates = " << cfg.scenario.n_replicates << "\n";
    out << "scenario_seed = " << cfg.scenario.seed << "\n";
    if (!cfg.scenario.label.empty())
      out << "scenario_label = " << cfg.scenario.label << "\n";
  }
  return out.str();
}

}  // namespace penhmm
