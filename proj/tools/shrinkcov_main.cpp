#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shrinkcov/config.hpp"
#include "shrinkcov/empirical.hpp"
#include "shrinkcov/errors.hpp"
#include "shrinkcov/estimators.hpp"
#include "shrinkcov/simulation.hpp"
#include "shrinkcov/util.hpp"
#include "shrinkcov/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SimulateOpts {
  std::string config;
  std::string out = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  int threads = 1;
};

struct EstimateOpts {
  std::string input;
  std::string out = ".";
  std::string format = "csv";
  std::string estimator = "olse";
  std::string target = "identity";
  std::string center = "on";
};

struct EmpiricalOpts {
  std::string input;
  std::string out = ".";
  std::string format = "csv";
  std::string target = "identity";
  std::string center = "on";
  std::uint64_t seed = 0;
  int p = 0;
  double c = 0.0;
  int n = 0;
  int count = 100;
  int threads = 1;
};

struct LimitsOpts {
  std::string config;
  std::string spectrum;
  std::string out;
  std::string format = "csv";
  double c = -1.0;
  std::string p_grid;
};

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw shrinkcov::ConfigError("cannot create output directory '" + out +
                                 "': " + ec.message());
  }
  return dir;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw shrinkcov::ConfigError(std::string(what) + " '" + path +
                                 "' does not exist");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw shrinkcov::ConfigError("cannot open '" + path.string() +
                                 "' for writing");
  }
  out << text;
  if (!out) {
    throw shrinkcov::ConfigError("write to '" + path.string() + "' failed");
  }
}

bool parse_center(const std::string& value) { return value == "on"; }

/// Shrinkage target for dimension p from "identity" or "spectrum:<path>".
shrinkcov::SymMatrix make_target(const std::string& requested, Eigen::Index p) {
  if (requested == "identity") {
    return shrinkcov::identity_target(p);
  }
  const std::string prefix = "spectrum:";
  if (requested.rfind(prefix, 0) != 0) {
    throw shrinkcov::ConfigError("target must be 'identity' or 'spectrum:<path>', got '" +
                                 requested + "'");
  }
  const std::string path = requested.substr(prefix.size());
  require_file(path, "spectrum file");
  return shrinkcov::covariance_from_spectrum(shrinkcov::load_spectrum(path), p);
}

json spectrum_json(const shrinkcov::SpectrumSpec& spec) {
  json atoms = json::array();
  for (const shrinkcov::SpectrumAtom& a : spec.atoms()) {
    atoms.push_back({{"tau", a.tau}, {"mass", a.mass}});
  }
  return atoms;
}

json versions_json() {
  return {{"shrinkcov", shrinkcov::kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

std::string report_csv(const shrinkcov::ExperimentReport& report) {
  std::string out = "p,estimator,mean_loss,prial,stderr,skipped\n";
  for (const shrinkcov::ReportRow& row : report.rows) {
    out += std::to_string(row.p);
    out += ',';
    out += to_string(row.estimator);
    out += ',';
    out += shrinkcov::to_full_precision(row.mean_loss);
    out += ',';
    out += shrinkcov::to_full_precision(row.prial);
    out += ',';
    out += shrinkcov::to_full_precision(row.std_error);
    out += ',';
    out += std::to_string(row.skipped);
    out += '\n';
  }
  return out;
}

json report_rows_json(const shrinkcov::ExperimentReport& report) {
  json rows = json::array();
  for (const shrinkcov::ReportRow& row : report.rows) {
    rows.push_back({{"p", row.p},
                    {"n", row.n},
                    {"estimator", to_string(row.estimator)},
                    {"mean_loss", row.mean_loss},
                    {"prial", row.prial},
                    {"stderr", row.std_error},
                    {"skipped", row.skipped}});
  }
  return rows;
}

int cmd_simulate(const SimulateOpts& opts) {
  require_file(opts.config, "config file");
  shrinkcov::ExperimentConfig cfg =
      shrinkcov::load_experiment_config(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.reps) {
    if (*opts.reps < 1) {
      throw shrinkcov::ConfigError("--reps must be >= 1");
    }
    cfg.repetitions = *opts.reps;
  }
  cfg.threads = std::max(1, opts.threads);
  const fs::path dir = prepare_out_dir(opts.out);

  const shrinkcov::ExperimentReport report = shrinkcov::run_experiment(cfg);

  std::vector<std::string> outputs;
  const std::string csv_name = "prial_" + cfg.tag + ".csv";
  write_text(dir / csv_name, report_csv(report));
  outputs.push_back(csv_name);
  if (opts.format == "json") {
    const std::string json_name = "prial_" + cfg.tag + ".json";
    write_text(dir / json_name,
               json{{"tag", cfg.tag}, {"rows", report_rows_json(report)}}.dump(2) +
                   "\n");
    outputs.push_back(json_name);
  }

  json config_echo = {
      {"tag", cfg.tag},
      {"spectrum", spectrum_json(cfg.spectrum)},
      {"target", cfg.target_spectrum ? json(spectrum_json(*cfg.target_spectrum))
                                     : json("identity")},
      {"c", cfg.c},
      {"p_grid", cfg.p_grid},
      {"repetitions", cfg.repetitions},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
  };
  json estimators = json::array();
  for (shrinkcov::EstimatorKind kind : cfg.estimators) {
    estimators.push_back(to_string(kind));
  }
  config_echo["estimators"] = estimators;

  const std::string manifest_name = "manifest_" + cfg.tag + ".json";
  write_text(dir / manifest_name, json{{"command", "simulate"},
                                       {"config", config_echo},
                                       {"format", opts.format},
                                       {"outputs", outputs},
                                       {"versions", versions_json()}}
                                          .dump(2) +
                                      "\n");
  outputs.push_back(manifest_name);

  for (const std::string& name : outputs) {
    std::cout << "wrote " << (dir / name).string() << '\n';
  }
  return 0;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += shrinkcov::to_full_precision(m(i, j));
    }
    out += '\n';
  }
  return out;
}

int cmd_estimate(const EstimateOpts& opts) {
  require_file(opts.input, "returns file");
  if (opts.estimator == "oracle") {
    throw shrinkcov::ConfigError(
        "--estimator oracle needs the population covariance matrix and is only "
        "available inside `simulate`");
  }
  const fs::path dir = prepare_out_dir(opts.out);
  const bool center = parse_center(opts.center);

  const shrinkcov::ReturnsPanel panel =
      shrinkcov::load_returns_csv(opts.input,
                                  shrinkcov::MissingPolicy::drop_incomplete_rows)
          .panel;
  const shrinkcov::DataMatrix y(panel.returns);
  const shrinkcov::SymMatrix s = shrinkcov::sample_covariance(y, center);
  const shrinkcov::SymMatrix target = make_target(opts.target, y.vars());
  const Eigen::Index n = y.samples();

  double alpha = 1.0, beta = 0.0;
  const Eigen::MatrixXd* estimate = &s.mat();
  std::optional<shrinkcov::EstimateResult> fit;
  if (opts.estimator == "olse") {
    fit = shrinkcov::olse(s, target, n);
  } else if (opts.estimator == "lw") {
    fit = shrinkcov::lw_estimator(y, center);
  } else if (opts.estimator != "sample") {
    throw shrinkcov::ConfigError("unknown estimator '" + opts.estimator + "'");
  }
  if (fit) {
    alpha = fit->weights.alpha;
    beta = fit->weights.beta;
    estimate = &fit->matrix.mat();
  }

  const shrinkcov::EigenList ev_est =
      shrinkcov::sym_eigenvalues(shrinkcov::SymMatrix(*estimate));
  const shrinkcov::EigenList ev_s = shrinkcov::sym_eigenvalues(s);
  const double psi_hat = shrinkcov::frobenius_estimator(s, n);

  write_text(dir / "estimate_matrix.csv", matrix_csv(*estimate));
  if (opts.format == "json") {
    write_text(dir / "estimate_summary.json",
               json{{"estimator", opts.estimator},
                    {"p", y.vars()},
                    {"n", n},
                    {"alpha", alpha},
                    {"beta", beta},
                    {"psi_hat", psi_hat},
                    {"lmax_estimate", ev_est(ev_est.size() - 1)},
                    {"lmin_estimate", ev_est(0)},
                    {"lmax_sample", ev_s(ev_s.size() - 1)},
                    {"lmin_sample", ev_s(0)}}
                   .dump(2) +
                   "\n");
  } else {
    std::string csv =
        "estimator,p,n,alpha,beta,psi_hat,lmax_estimate,lmin_estimate,"
        "lmax_sample,lmin_sample\n";
    csv += opts.estimator + ',' + std::to_string(y.vars()) + ',' +
           std::to_string(n) + ',' + shrinkcov::to_full_precision(alpha) + ',' +
           shrinkcov::to_full_precision(beta) + ',' +
           shrinkcov::to_full_precision(psi_hat) + ',' +
           shrinkcov::to_full_precision(ev_est(ev_est.size() - 1)) + ',' +
           shrinkcov::to_full_precision(ev_est(0)) + ',' +
           shrinkcov::to_full_precision(ev_s(ev_s.size() - 1)) + ',' +
           shrinkcov::to_full_precision(ev_s(0)) + '\n';
    write_text(dir / "estimate_summary.csv", csv);
  }
  std::cout << "wrote " << (dir / "estimate_matrix.csv").string() << '\n';
  std::cout << "wrote "
            << (dir / (opts.format == "json" ? "estimate_summary.json"
                                             : "estimate_summary.csv"))
                   .string()
            << '\n';
  return 0;
}

std::string diagnostics_csv(const std::vector<shrinkcov::DiagnosticsRow>& rows) {
  std::string out =
      "draw,frob_olse,frob_sample,lmax_olse,lmax_sample,lmin_olse,lmin_sample,"
      "alpha,beta\n";
  for (const shrinkcov::DiagnosticsRow& r : rows) {
    out += std::to_string(r.draw_id);
    for (double v : {r.frob_olse, r.frob_sample, r.lmax_olse, r.lmax_sample,
                     r.lmin_olse, r.lmin_sample, r.alpha, r.beta}) {
      out += ',';
      out += shrinkcov::to_full_precision(v);
    }
    out += '\n';
  }
  return out;
}

std::string edf_csv(const std::vector<std::pair<double, double>>& edf) {
  std::string out = "value,fraction\n";
  for (const auto& [value, fraction] : edf) {
    out += shrinkcov::to_full_precision(value);
    out += ',';
    out += shrinkcov::to_full_precision(fraction);
    out += '\n';
  }
  return out;
}

int cmd_empirical(const EmpiricalOpts& opts) {
  require_file(opts.input, "returns file");
  if (opts.p < 1) {
    throw shrinkcov::ConfigError("--p must be >= 1");
  }
  if ((opts.c > 0.0) == (opts.n > 0)) {
    throw shrinkcov::ConfigError("give exactly one of --c or --n");
  }
  const fs::path dir = prepare_out_dir(opts.out);
  const bool center = parse_center(opts.center);

  const shrinkcov::ReturnsPanel panel =
      shrinkcov::load_returns_csv(opts.input,
                                  shrinkcov::MissingPolicy::drop_incomplete_rows)
          .panel;
  const Eigen::Index n =
      opts.n > 0 ? opts.n : shrinkcov::samples_for(opts.p, opts.c);
  const std::vector<shrinkcov::PortfolioDraw> draws = shrinkcov::sample_portfolios(
      panel, opts.p, n, opts.count, opts.seed);
  std::optional<shrinkcov::SymMatrix> target;
  if (opts.target != "identity") {
    target = make_target(opts.target, opts.p);
  }
  const std::vector<shrinkcov::DiagnosticsRow> rows = shrinkcov::run_diagnostics(
      panel, draws, target, center, std::max(1, opts.threads));

  std::vector<double> frob_olse, frob_sample;
  frob_olse.reserve(rows.size());
  frob_sample.reserve(rows.size());
  for (const shrinkcov::DiagnosticsRow& r : rows) {
    frob_olse.push_back(r.frob_olse);
    frob_sample.push_back(r.frob_sample);
  }

  if (opts.format == "json") {
    json jrows = json::array();
    for (const shrinkcov::DiagnosticsRow& r : rows) {
      jrows.push_back({{"draw", r.draw_id},
                       {"frob_olse", r.frob_olse},
                       {"frob_sample", r.frob_sample},
                       {"lmax_olse", r.lmax_olse},
                       {"lmax_sample", r.lmax_sample},
                       {"lmin_olse", r.lmin_olse},
                       {"lmin_sample", r.lmin_sample},
                       {"alpha", r.alpha},
                       {"beta", r.beta}});
    }
    write_text(dir / "diagnostics.json", json{{"rows", jrows}}.dump(2) + "\n");
    std::cout << "wrote " << (dir / "diagnostics.json").string() << '\n';
  } else {
    write_text(dir / "diagnostics.csv", diagnostics_csv(rows));
    std::cout << "wrote " << (dir / "diagnostics.csv").string() << '\n';
  }
  write_text(dir / "edf_frob_olse.csv",
             edf_csv(shrinkcov::empirical_edf(frob_olse)));
  write_text(dir / "edf_frob_sample.csv",
             edf_csv(shrinkcov::empirical_edf(frob_sample)));
  std::cout << "wrote " << (dir / "edf_frob_olse.csv").string() << '\n';
  std::cout << "wrote " << (dir / "edf_frob_sample.csv").string() << '\n';
  return 0;
}

int cmd_limits(const LimitsOpts& opts) {
  shrinkcov::LimitsSpec spec = [&]() -> shrinkcov::LimitsSpec {
    if (!opts.config.empty()) {
      require_file(opts.config, "config file");
      return shrinkcov::load_limits_config(opts.config);
    }
    if (opts.spectrum.empty() || opts.c < 0.0) {
      throw shrinkcov::ConfigError(
          "limits needs --config, or --spectrum together with --c");
    }
    require_file(opts.spectrum, "spectrum file");
    shrinkcov::LimitsSpec s{shrinkcov::load_spectrum(opts.spectrum)};
    s.c = opts.c;
    s.tag = fs::path(opts.spectrum).stem().string();
    return s;
  }();
  if (!opts.p_grid.empty()) {
    spec.p_grid = shrinkcov::parse_int_grid(opts.p_grid);
  }

  const double m1 = shrinkcov::spectrum_moment(spec.spectrum, 1);
  const double m2 = shrinkcov::spectrum_moment(spec.spectrum, 2);
  const double phi = shrinkcov::phi_limit(spec.spectrum, spec.c);

  std::string text;
  if (opts.format == "json") {
    json det = json::object();
    for (int p : spec.p_grid) {
      const shrinkcov::SymMatrix sigma =
          shrinkcov::covariance_from_spectrum(spec.spectrum, p);
      det[std::to_string(p)] = shrinkcov::deterministic_frobenius(sigma, spec.c);
    }
    text = json{{"tag", spec.tag},
                {"moment1", m1},
                {"moment2", m2},
                {"c", spec.c},
                {"phi", phi},
                {"det_frobenius", det}}
               .dump(2) +
           "\n";
  } else {
    text = "quantity,value\n";
    text += "moment1," + shrinkcov::to_full_precision(m1) + "\n";
    text += "moment2," + shrinkcov::to_full_precision(m2) + "\n";
    text += "c," + shrinkcov::to_full_precision(spec.c) + "\n";
    text += "phi," + shrinkcov::to_full_precision(phi) + "\n";
    for (int p : spec.p_grid) {
      const shrinkcov::SymMatrix sigma =
          shrinkcov::covariance_from_spectrum(spec.spectrum, p);
      text += "det_frobenius_p" + std::to_string(p) + "," +
              shrinkcov::to_full_precision(
                  shrinkcov::deterministic_frobenius(sigma, spec.c)) +
              "\n";
    }
  }
  std::cout << text;
  if (!opts.out.empty()) {
    const fs::path dir = prepare_out_dir(opts.out);
    const std::string name =
        "limits_" + spec.tag + (opts.format == "json" ? ".json" : ".csv");
    write_text(dir / name, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal linear shrinkage estimation of large covariance matrices"};
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo PRIAL sweep from a config file");
  simulate->add_option("--config", sim.config, "experiment config file")
      ->required();
  simulate->add_option("--seed", sim.seed, "override the config seed");
  simulate->add_option("--reps", sim.reps, "override the config repetitions");
  simulate->add_option("--threads", sim.threads, "worker threads")
      ->envname("SHRINKCOV_THREADS");
  simulate->add_option("--out", sim.out, "output directory");
  simulate->add_option("--format", sim.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  EstimateOpts est;
  CLI::App* estimate =
      app.add_subcommand("estimate", "fit one estimator to a returns CSV");
  estimate->add_option("--input", est.input, "returns CSV")->required();
  estimate->add_option("--estimator", est.estimator, "olse, lw or sample")
      ->check(CLI::IsMember({"olse", "lw", "oracle", "sample"}));
  estimate->add_option("--target", est.target,
                       "identity or spectrum:<path>");
  estimate->add_option("--center", est.center, "demean observations")
      ->check(CLI::IsMember({"on", "off"}));
  estimate->add_option("--out", est.out, "output directory");
  estimate->add_option("--format", est.format, "summary format")
      ->check(CLI::IsMember({"csv", "json"}));

  EmpiricalOpts emp;
  CLI::App* empirical = app.add_subcommand(
      "empirical", "portfolio resampling diagnostics over a returns CSV");
  empirical->add_option("--input", emp.input, "returns CSV")->required();
  empirical->add_option("--p", emp.p, "portfolio size")->required();
  empirical->add_option("--c", emp.c, "concentration p/n");
  empirical->add_option("--n", emp.n, "window length in observations");
  empirical->add_option("--count", emp.count, "number of portfolio draws");
  empirical->add_option("--seed", emp.seed, "RNG seed");
  empirical->add_option("--target", emp.target, "identity or spectrum:<path>");
  empirical->add_option("--center", emp.center, "demean observations")
      ->check(CLI::IsMember({"on", "off"}));
  empirical->add_option("--threads", emp.threads, "worker threads")
      ->envname("SHRINKCOV_THREADS");
  empirical->add_option("--out", emp.out, "output directory");
  empirical->add_option("--format", emp.format, "diagnostics format")
      ->check(CLI::IsMember({"csv", "json"}));

  LimitsOpts lim;
  CLI::App* limits = app.add_subcommand(
      "limits", "print limiting spectral quantities for a spectrum");
  limits->add_option("--config", lim.config, "limits config file");
  limits->add_option("--spectrum", lim.spectrum, "spectrum file");
  limits->add_option("--c", lim.c, "concentration p/n");
  limits->add_option("--p-grid", lim.p_grid,
                     "dimensions for deterministic equivalents");
  limits->add_option("--out", lim.out, "also write the table to this directory");
  limits->add_option("--format", lim.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (estimate->parsed()) return cmd_estimate(est);
    if (empirical->parsed()) return cmd_empirical(emp);
    if (limits->parsed()) return cmd_limits(lim);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const shrinkcov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const shrinkcov::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const shrinkcov::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
