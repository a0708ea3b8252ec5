#ifndef PENHMM_IO_HPP
#define PENHMM_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "penhmm/cv.hpp"
#include "penhmm/inference.hpp"
#include "penhmm/sim.hpp"

namespace penhmm {

// Column mapping for long-format CSV input (`id,time,y,<covariates...>`).
// Covariates default to every remaining column in file order. Categorical
// columns are expanded to reference-coded indicators named
// `column(level)`, one per non-reference level in lexicographic order.
struct ColumnSchema {
  std::string id = "id";
  std::string time = "time";
  std::string response = "y";
  std::vector<std::string> covariates;
  std::map<std::string, std::string> categorical;  // column -> reference level
};

enum class LagPolicy { DropFirst, ImputeZero };

PanelDataset load_panel(const std::string& path,
                        const ColumnSchema& schema = {});

// Appends a covariate column holding the previous occasion's response.
// DropFirst removes the first occasion (no imputation needed); ImputeZero
// keeps it with lag 0. Rejects panels that already carry a lag column.
PanelDataset add_lag_column(const PanelDataset& data,
                            LagPolicy policy = LagPolicy::DropFirst,
                            const std::string& name = "y_lag");

void save_panel_csv(const PanelDataset& data, const std::string& path);

nlohmann::json params_to_json(const HmmParams& params);
HmmParams params_from_json(const nlohmann::json& j);

nlohmann::json fit_to_json(const FitResult& fit, double lambda,
                           const std::vector<std::string>& covariate_names,
                           const SeReport* se = nullptr);
nlohmann::json cv_to_json(const CvResult& cv);
nlohmann::json metric_table_to_json(const MetricTable& table);

void write_text_file(const std::string& path, const std::string& text);

// Coefficient table: covariate, estimate, se, p_value.
std::string beta_table_csv(const FitResult& fit,
                           const std::vector<std::string>& covariate_names,
                           const SeReport* se);
// One row per k, one column per lambda; unevaluated cells left blank.
std::string cv_table_csv(const CvResult& cv);
std::string decoding_csv(const PanelDataset& data, const Decoding& dec);
std::string metric_table_csv(const MetricTable& table);

// Run settings as a `key = value` document; parse and serialize round-trip.
struct RunConfig {
  std::string command;
  std::string data_path;
  std::string out_path = "penhmm_out";
  std::string format = "json";
  ColumnSchema schema;
  EmConfig em;
  std::vector<int> ks{3};
  std::vector<double> lambdas{0.0};
  int folds = 10;
  std::string lag = "none";  // none | drop | zero
  Scenario scenario;
  bool scenario_set = false;
};

RunConfig parse_run_config(const std::string& text);
std::string serialize_run_config(const RunConfig& cfg);

// "a1".."a5" selects a preset support-point vector; otherwise a comma list.
Eigen::VectorXd parse_alpha_spec(const std::string& s);

// "1..4" expands to {1,2,3,4}; otherwise a comma list.
std::vector<int> parse_k_spec(const std::string& s);

}  // namespace penhmm

#endif  // PENHMM_IO_HPP
