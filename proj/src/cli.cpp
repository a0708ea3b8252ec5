#include "penhmm/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "penhmm/io.hpp"

namespace penhmm {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PanelDataset load_with_lag(const RunConfig& cfg) {
  if (cfg.data_path.empty())
    throw std::invalid_argument("--data is required for this command");
  PanelDataset data = load_panel(cfg.data_path, cfg.schema);
  if (cfg.lag == "drop") return add_lag_column(data, LagPolicy::DropFirst);
  if (cfg.lag == "zero") return add_lag_column(data, LagPolicy::ImputeZero);
  if (cfg.lag != "none")
    throw std::invalid_argument("--lag must be one of none|drop|zero");
  return data;
}

int cmd_fit(const RunConfig& cfg, bool with_se) {
  const PanelDataset data = load_with_lag(cfg);
  EmConfig em = cfg.em;
  em.lambda = cfg.lambdas.empty() ? 0.0 : cfg.lambdas.front();
  FitResult result = fit(data, cfg.ks.front(), em);

  SeReport se;
  bool have_se = false;
  if (with_se) {
    se = standard_errors(data, result, em.lambda);
    result.se = se.se;
    result.info_rank_ok = identifiability_check(se);
    have_se = true;
  }

  const Posteriors post = e_step(data, result.params);
  const Decoding dec = decode(result, post);

  nlohmann::json j =
      fit_to_json(result, em.lambda, data.covariate_names, have_se ? &se : nullptr);
  j["command"] = "fit";
  write_text_file(cfg.out_path + ".json", j.dump(2) + "\n");
  write_text_file(cfg.out_path + "_beta.csv",
                  beta_table_csv(result, data.covariate_names,
                                 have_se ? &se : nullptr));
  write_text_file(cfg.out_path + "_decoding.csv", decoding_csv(data, dec));

  std::cout << "fit: k=" << result.params.k << " lambda=" << em.lambda
            << " loglik=" << result.loglik
            << " penalized=" << result.penalized_loglik
            << " iters=" << result.n_iters
            << " converged=" << (result.converged ? "yes" : "no") << "\n";
  std::cout << "alpha:";
  for (int u = 0; u < result.params.k; ++u)
    std::cout << " " << result.params.alpha(u);
  std::cout << "\n"
            << beta_table_csv(result, data.covariate_names,
                              have_se ? &se : nullptr);
  std::cout << "wrote " << cfg.out_path << ".json, _beta.csv, _decoding.csv\n";
  return 0;
}

int cmd_cv(const RunConfig& cfg) {
  const PanelDataset data = load_with_lag(cfg);
  CvGrid grid;
  grid.ks = cfg.ks;
  grid.lambdas = cfg.lambdas;
  grid.M = cfg.folds;
  grid.seed = cfg.em.seed;
  const CvResult res = cross_validate(data, grid, cfg.em);

  nlohmann::json j = cv_to_json(res);
  j["command"] = "cv";
  write_text_file(cfg.out_path + ".json", j.dump(2) + "\n");
  write_text_file(cfg.out_path + "_table.csv", cv_table_csv(res));

  std::cout << cv_table_csv(res);
  std::cout << "best: k=" << res.best_k << " lambda=" << res.best_lambda
            << "\n";
  std::cout << "wrote " << cfg.out_path << ".json, _table.csv\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  if (!cfg.scenario_set)
    throw std::invalid_argument("simulate needs --scenario or --alpha");
  Scenario sc = cfg.scenario;
  if (sc.beta.size() == 0) {
    sc.beta.resize(4);
    sc.beta << 1, -1, 1, 1;
  }
  sc.validate();

  nlohmann::json manifest;
  manifest["command"] = "simulate";
  manifest["n"] = sc.n;
  manifest["T"] = sc.T;
  manifest["alpha"] = std::vector<double>(sc.alpha.begin(), sc.alpha.end());
  manifest["beta"] = std::vector<double>(sc.beta.begin(), sc.beta.end());
  manifest["persistence"] =
      sc.persistence == Persistence::High ? "high" : "low";
  manifest["include_lag"] = sc.include_lag;
  manifest["seed"] = sc.seed;
  manifest["replicates"] = sc.n_replicates;
  std::vector<std::string> files;
  for (int r = 0; r < sc.n_replicates; ++r) {
    const SimulatedPanel sim = simulate(sc, r);
    const std::string base = cfg.out_path + "_rep" + std::to_string(r);
    save_panel_csv(sim.data, base + ".csv");
    std::ostringstream states;
    states << "id,time,state\n";
    for (int i = 0; i < sc.n; ++i)
      for (int t = 0; t < sc.T; ++t)
        states << i + 1 << "," << t + 1 << "," << sim.states(i, t) + 1 << "\n";
    write_text_file(base + "_states.csv", states.str());
    files.push_back(base + ".csv");
    files.push_back(base + "_states.csv");
  }
  manifest["files"] = files;
  write_text_file(cfg.out_path + "_manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << files.size() << " files and "
            << cfg.out_path + "_manifest.json\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  if (!cfg.scenario_set)
    throw std::invalid_argument("bench needs --scenario or --alpha");
  Scenario sc = cfg.scenario;
  if (sc.beta.size() == 0) {
    sc.beta.resize(4);
    sc.beta << 1, -1, 1, 1;
  }
  sc.validate();
  const MetricTable table = run_study({sc}, cfg.lambdas, cfg.em);
  nlohmann::json j = metric_table_to_json(table);
  j["command"] = "bench";
  write_text_file(cfg.out_path + ".json", j.dump(2) + "\n");
  write_text_file(cfg.out_path + ".csv", metric_table_csv(table));
  std::cout << metric_table_csv(table);
  std::cout << "wrote " << cfg.out_path << ".json, .csv\n";
  return 0;
}

int cmd_decode(const RunConfig& cfg, const std::string& fit_path) {
  const PanelDataset data = load_with_lag(cfg);
  const nlohmann::json j = nlohmann::json::parse(read_file(fit_path));
  const HmmParams params =
      params_from_json(j.contains("params") ? j.at("params") : j);
  if (params.p() != data.p)
    throw std::invalid_argument(
        "decode: fitted parameters expect a different covariate count");
  FitResult shim;
  shim.params = params;
  shim.converged = true;
  const Posteriors post = e_step(data, params);
  const Decoding dec = decode(shim, post);
  write_text_file(cfg.out_path + "_decoding.csv", decoding_csv(data, dec));
  nlohmann::json out;
  out["command"] = "decode";
  out["loglik"] = post.subject_loglik.sum();
  out["files"] = {cfg.out_path + "_decoding.csv"};
  write_text_file(cfg.out_path + ".json", out.dump(2) + "\n");
  std::cout << "wrote " << cfg.out_path << "_decoding.csv\n";
  return 0;
}

void add_em_options(CLI::App* sub, RunConfig& cfg, int& total_starts) {
  sub->add_option("--out", cfg.out_path, "output path prefix");
  sub->add_option("--seed", cfg.em.seed, "RNG seed");
  sub->add_option("--starts", total_starts,
                  "EM starts (1 deterministic, rest random)");
  sub->add_option("--eps-loglik", cfg.em.eps_loglik,
                  "relative log-likelihood change threshold");
  sub->add_option("--eps-params", cfg.em.eps_params,
                  "max parameter change threshold");
  sub->add_option("--max-em-iters", cfg.em.max_em_iters, "EM iteration cap");
  sub->add_option("--max-nr-iters", cfg.em.max_nr_iters,
                  "Newton iteration cap per M-step");
}

void add_data_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--data", cfg.data_path, "long-format CSV panel")
      ->check(CLI::ExistingFile);
  sub->add_option("--lag", cfg.lag,
                  "lagged-response handling: none|drop|zero");
  sub->add_option("--id-column", cfg.schema.id, "subject id column");
  sub->add_option("--time-column", cfg.schema.time, "occasion column");
  sub->add_option("--response-column", cfg.schema.response,
                  "binary response column");
}

void add_scenario_options(CLI::App* sub, RunConfig& cfg, std::string& alpha_spec,
                          std::string& beta_spec, std::string& persistence) {
  sub->add_option("--scenario,--alpha", alpha_spec,
                  "support points: a1..a5 or a comma list");
  sub->add_option("--beta", beta_spec, "regression coefficients, comma list");
  sub->add_option("--n", cfg.scenario.n, "subjects");
  sub->add_option("--T", cfg.scenario.T, "occasions");
  sub->add_option("--persistence", persistence, "high|low");
  sub->add_flag("--include-lag", cfg.scenario.include_lag,
                "use the last covariate as the lagged response");
  sub->add_option("--replicates", cfg.scenario.n_replicates,
                  "number of replicate datasets");
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  RunConfig cfg;
  try {
    // A settings file provides defaults; flags override.
    for (size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") cfg = parse_run_config(read_file(args[i + 1]));
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }

  CLI::App app{"Hidden Markov models for binary longitudinal data with "
               "penalized maximum likelihood"};
  app.require_subcommand(1);

  std::string config_path;  // consumed above; declared so it shows in help
  app.add_option("--config", config_path, "settings file (key = value)")
      ->configurable(false);

  int total_starts = -1;
  std::string k_spec, lambda_spec, alpha_spec, beta_spec, persistence, fit_path;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one (k, lambda) model");
  fit_cmd->add_option("--config", config_path, "settings file");
  fit_cmd->add_option("--k", k_spec, "number of hidden states");
  fit_cmd->add_option("--lambda", lambda_spec, "penalty weight");
  bool no_se = false;
  fit_cmd->add_flag("--no-se", no_se, "skip standard errors");
  add_data_options(fit_cmd, cfg);
  add_em_options(fit_cmd, cfg, total_starts);

  CLI::App* cv_cmd =
      app.add_subcommand("cv", "cross-validated (k, lambda) selection");
  cv_cmd->add_option("--config", config_path, "settings file");
  cv_cmd->add_option("--k", k_spec, "state counts, e.g. 1..4 or 1,2,3");
  cv_cmd->add_option("--lambda", lambda_spec, "penalty weights, comma list");
  cv_cmd->add_option("--folds", cfg.folds, "fold count");
  add_data_options(cv_cmd, cfg);
  add_em_options(cv_cmd, cfg, total_starts);

  std::string pi_spec;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate scenario datasets");
  sim_cmd->add_option("--config", config_path, "settings file");
  sim_cmd->add_option("--pi", pi_spec, "initial probabilities, comma list");
  add_scenario_options(sim_cmd, cfg, alpha_spec, beta_spec, persistence);
  sim_cmd->add_option("--out", cfg.out_path, "output path prefix");
  sim_cmd->add_option("--seed", cfg.scenario.seed, "scenario seed");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "replicate study with MSE/SE/time metrics");
  bench_cmd->add_option("--config", config_path, "settings file");
  bench_cmd->add_option("--lambda", lambda_spec,
                        "penalty weights compared against 0");
  add_scenario_options(bench_cmd, cfg, alpha_spec, beta_spec, persistence);
  add_em_options(bench_cmd, cfg, total_starts);
  bench_cmd->add_option("--scenario-seed", cfg.scenario.seed, "scenario seed");

  CLI::App* decode_cmd =
      app.add_subcommand("decode", "state trajectories from a fit artifact");
  decode_cmd->add_option("--config", config_path, "settings file");
  decode_cmd->add_option("--fit", fit_path, "fit .json artifact")
      ->check(CLI::ExistingFile);
  add_data_options(decode_cmd, cfg);
  decode_cmd->add_option("--out", cfg.out_path, "output path prefix");

  std::vector<char*> argv;
  argv.reserve(args.size());
  for (std::string& a : args) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto parse_list = [](const std::string& s) {
      std::vector<double> out;
      std::istringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
      return out;
    };
    if (total_starts > 0) {
      cfg.em.n_starts_deterministic = 1;
      cfg.em.n_starts_random = total_starts - 1;
    }
    if (!k_spec.empty()) cfg.ks = parse_k_spec(k_spec);
    if (!lambda_spec.empty()) cfg.lambdas = parse_list(lambda_spec);
    if (!alpha_spec.empty()) {
      cfg.scenario.alpha = parse_alpha_spec(alpha_spec);
      cfg.scenario_set = true;
    }
    if (!beta_spec.empty()) {
      const std::vector<double> b = parse_list(beta_spec);
      cfg.scenario.beta =
          Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    }
    if (!persistence.empty()) {
      if (persistence != "high" && persistence != "low")
        throw std::invalid_argument("--persistence must be high or low");
      cfg.scenario.persistence =
          persistence == "high" ? Persistence::High : Persistence::Low;
    }
    if (!pi_spec.empty()) {
      const std::vector<double> p0 = parse_list(pi_spec);
      cfg.scenario.pi = Eigen::Map<const Eigen::VectorXd>(p0.data(), p0.size());
    }

    if (fit_cmd->parsed()) return cmd_fit(cfg, !no_se);
    if (cv_cmd->parsed()) return cmd_cv(cfg);
    if (sim_cmd->parsed()) return cmd_simulate(cfg);
    if (bench_cmd->parsed()) return cmd_bench(cfg);
    if (decode_cmd->parsed()) {
      if (fit_path.empty())
        throw std::invalid_argument("decode needs --fit");
      return cmd_decode(cfg, fit_path);
    }
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 3;
  }
}

}  // namespace penhmm
