#include "d2d/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "d2d/config.hpp"
#include "d2d/planner.hpp"

namespace d2d {

namespace {

namespace fs = std::filesystem;

const std::vector<double> kChannelAwareFractions = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                    0.6, 0.7, 0.8, 0.9, 1.0};

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string axis;
  std::string values;
  std::string schemes;
};

class Output {
public:
  Output(const Options& opt, std::string subcommand, const RunConfig& config)
      : dir_(opt.out_dir), start_(std::chrono::steady_clock::now()), config_(config) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("--out", "cannot create '" + dir_.string() + "': " + ec.message());
    manifest_.config_path = opt.config_path;
    manifest_.subcommand = std::move(subcommand);
    manifest_.output_dir = dir_.string();
    manifest_.config_hash = git_blob_hash(serialize_config(config));
  }

  template <class Writer>
  void emit(const std::string& name, Writer&& write) {
    std::ofstream f(dir_ / name);
    if (!f) throw ConfigError("--out", "cannot write '" + (dir_ / name).string() + "'");
    write(f);
    manifest_.files.push_back(name);
  }

  void finish() {
    manifest_.files.push_back("manifest.json");
    manifest_.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream f(dir_ / "manifest.json");
    write_manifest_json(f, manifest_, config_);
  }

private:
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
  const RunConfig& config_;
};

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("--values", "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--values", "empty value list");
  return out;
}

RunConfig load(const Options& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config", "a config file is required");
  RunConfig c = load_config(opt.config_path);
  if (opt.seed) c.experiment.seed = *opt.seed;
  return c;
}

// Fills the scheme from the planner when the config asks for it.
ExperimentConfig resolved(const RunConfig& c, SchemeKind kind, bool force_tune = false) {
  ExperimentConfig e = c.experiment;
  e.scheme.kind = kind;
  if (c.tune_scheme || force_tune) {
    ExperimentConfig probe = e;
    probe.n_realizations = c.tune_realizations;
    e.scheme = tune_scheme(kind, probe, c.constraint, kChannelAwareFractions);
  } else if (kind == SchemeKind::no_ac) {
    e.scheme.delta = 0.0;
  }
  e.validate();
  return e;
}

nlohmann::json plan_json(const PlanResult& p) {
  return {{"delta_star", p.delta_star},
          {"p_s_star", p.p_s_star},
          {"G_star", p.G_star},
          {"G_star_db", linear_to_db(p.G_star)},
          {"predicted_ase", p.predicted_ase},
          {"predicted_coverage", p.predicted_coverage},
          {"constraint_residual", p.constraint_residual},
          {"p_max", p.p_max},
          {"target", p.target},
          {"warnings", p.warnings}};
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << std::setprecision(10) << "metric,mean,ci_low,ci_high,n\n";
  const auto row = [&](const char* name, const Estimate& e) {
    out << name << ',' << e.mean << ',' << e.ci_low << ',' << e.ci_high << ',' << e.n << '\n';
  };
  row("d2d_success", r.d2d_success);
  row("cellular_coverage", r.cellular_coverage);
  row("ase", r.ase);
  row("rate_d2d", r.rate_d2d);
  row("rate_cellular", r.rate_cellular);
  row("candidate_fraction", r.candidate_fraction);
  row("active_fraction", r.active_fraction);
  row("active_density", r.active_density);
}

int cmd_analyze(const Options& opt, std::ostream& out) {
  const RunConfig c = load(opt);
  Output o(opt, "analyze", c);
  const SystemParams& s = c.experiment.system;
  const double delta = c.experiment.scheme.delta;
  const auto [xi, kappa] = derive(s);
  const double p_max = max_cellular_coverage(s);
  nlohmann::json j = {
      {"xi", xi},
      {"kappa", kappa},
      {"d2d_success", d2d_success_prob(s.beta, s)},
      {"delta", delta},
      {"ase_guard_zone_only", d2d_ase_step1(s.beta, delta, s)},
      {"p_max", p_max},
      {"target", (1.0 - c.constraint.mu) * p_max},
      {"coverage_all_active", cellular_coverage(s.gamma, s.lambda_d, delta, s)},
  };
  if (c.experiment.scheme.access_fraction) {
    const double p_s = *c.experiment.scheme.access_fraction;
    j["p_s"] = p_s;
    j["ase_two_stage"] = d2d_ase_two_stage(delta, p_s, s, AseRegime::piecewise);
    j["coverage_two_stage"] = cellular_coverage(s.gamma, p_s * s.lambda_d, delta, s);
  }
  for (const auto& [k, v] : j.items()) out << std::setw(22) << std::left << k << ' ' << v << '\n';
  o.emit("analyze.json", [&](std::ostream& f) { f << j.dump(2) << '\n'; });
  o.finish();
  return kExitOk;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const RunConfig c = load(opt);
  Output o(opt, "simulate", c);
  const ExperimentConfig e = resolved(c, c.experiment.scheme.kind);
  const MetricsReport r = run_experiment(e);
  write_report_csv(out, r);
  o.emit("report.json", [&](std::ostream& f) { write_report_json(f, r); });
  o.emit("report.csv", [&](std::ostream& f) { write_report_csv(f, r); });
  o.finish();
  return kExitOk;
}

int cmd_optimize(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig c = load(opt);
  Output o(opt, "optimize", c);
  try {
    const PlanResult p = decoupled_optimize(c.experiment.system, c.constraint);
    const auto j = plan_json(p);
    out << j.dump(2) << '\n';
    o.emit("plan.json", [&](std::ostream& f) { f << j.dump(2) << '\n'; });
    o.finish();
    return kExitOk;
  } catch (const InfeasibleError& e) {
    const nlohmann::json j = {{"status", "infeasible"},
                              {"message", e.what()},
                              {"achieved_coverage", e.achieved_coverage},
                              {"required_coverage", e.required_coverage}};
    err << "infeasible: " << e.what() << '\n';
    o.emit("infeasible.json", [&](std::ostream& f) { f << j.dump(2) << '\n'; });
    o.finish();
    return kExitNumerical;
  }
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  const RunConfig c = load(opt);
  if (opt.axis.empty()) throw ConfigError("--axis", "required for sweep");
  SweepAxis axis;
  try {
    axis = sweep_axis_from_string(opt.axis);
  } catch (const ParameterError& e) {
    throw ConfigError("--axis", e.what());
  }
  const std::vector<double> values = parse_values(opt.values);
  const SchemeKind kind = c.experiment.scheme.kind;
  if (axis == SweepAxis::p_s && kind != SchemeKind::proposed_top_fraction &&
      kind != SchemeKind::channel_aware)
    throw ConfigError("--axis", "p_s needs scheme.kind proposed_top_fraction or channel_aware");
  if (axis == SweepAxis::G && kind != SchemeKind::proposed_threshold)
    throw ConfigError("--axis", "G needs scheme.kind proposed_threshold");
  if (axis == SweepAxis::delta && kind == SchemeKind::no_ac)
    throw ConfigError("--axis", "no_ac has no guard zone to sweep");
  Output o(opt, "sweep", c);

  // Swept parameters are never overwritten by tuning; lambda_d and mu re-plan.
  ExperimentConfig base = resolved(c, kind);
  ConfigTuner tuner;
  if (c.tune_scheme && (axis == SweepAxis::lambda_d || axis == SweepAxis::mu)) {
    tuner = [&c, kind](const ExperimentConfig& cfg, SweepAxis a, double v) {
      RunConfig rc = c;
      rc.experiment = cfg;
      if (a == SweepAxis::mu) rc.constraint.mu = v;
      return resolved(rc, kind, true);
    };
  }
  const auto points = sweep(base, axis, values, tuner);
  write_sweep_csv(out, axis, points);
  o.emit("sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, axis, points); });
  o.finish();
  return kExitOk;
}

const char* display_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::proposed_threshold:
    case SchemeKind::proposed_top_fraction: return "Proposed";
    case SchemeKind::channel_aware: return "Channel-Aware AC";
    case SchemeKind::guard_zone_only: return "Only Guard Zones";
    case SchemeKind::no_ac: return "No AC";
  }
  return "?";
}

int cmd_compare(const Options& opt, std::ostream& out) {
  const RunConfig c = load(opt);
  std::vector<SchemeKind> kinds = {SchemeKind::proposed_threshold, SchemeKind::channel_aware,
                                   SchemeKind::guard_zone_only, SchemeKind::no_ac};
  if (!opt.schemes.empty()) {
    kinds.clear();
    std::stringstream ss(opt.schemes);
    std::string name;
    while (std::getline(ss, name, ',')) {
      try {
        kinds.push_back(scheme_kind_from_string(name));
      } catch (const ParameterError& e) {
        throw ConfigError("--scheme", e.what());
      }
    }
  }
  Output o(opt, "compare", c);
  std::ostringstream table;
  table << std::setprecision(10)
        << "scheme,kind,delta_m,rate_d2d,rate_d2d_ci_low,rate_d2d_ci_high,rate_cellular,"
           "rate_cellular_ci_low,rate_cellular_ci_high,coverage,coverage_ci_low,coverage_ci_high,"
           "ase,d2d_success,active_fraction,seed,paired\n";
  for (SchemeKind k : kinds) {
    const ExperimentConfig e = resolved(c, k, true);
    const MetricsReport r = run_experiment(e);
    table << display_name(k) << ',' << to_string(k) << ',' << e.scheme.delta << ','
          << r.rate_d2d.mean << ',' << r.rate_d2d.ci_low << ',' << r.rate_d2d.ci_high << ','
          << r.rate_cellular.mean << ',' << r.rate_cellular.ci_low << ','
          << r.rate_cellular.ci_high << ',' << r.cellular_coverage.mean << ','
          << r.cellular_coverage.ci_low << ',' << r.cellular_coverage.ci_high << ','
          << r.ase.mean << ',' << r.d2d_success.mean << ',' << r.active_fraction.mean << ','
          << e.seed << ",true\n";
  }
  out << table.str();
  o.emit("compare.csv", [&](std::ostream& f) { f << table.str(); });
  o.finish();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"D2D underlay access-control simulator and planner"};
  app.require_subcommand(1);
  Options opt;
  const auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Configuration file (key = value)");
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Override the configured seed");
  };
  auto* analyze = app.add_subcommand("analyze", "Analytic success, ASE and coverage");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment");
  auto* optimize = app.add_subcommand("optimize", "Decoupled (delta, p_s, G) plan");
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over one axis");
  auto* compare = app.add_subcommand("compare", "Scheme comparison table");
  for (auto* sub : {analyze, simulate, optimize, sweep_cmd, compare}) common(sub);
  sweep_cmd->add_option("--axis", opt.axis, "delta | p_s | G | lambda_D | mu");
  sweep_cmd->add_option("--values", opt.values, "Comma-separated axis values");
  compare->add_option("--scheme", opt.schemes, "Comma-separated subset of schemes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*analyze) return cmd_analyze(opt, out);
    if (*simulate) return cmd_simulate(opt, out);
    if (*optimize) return cmd_optimize(opt, out, err);
    if (*sweep_cmd) return cmd_sweep(opt, out);
    if (*compare) return cmd_compare(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SingularGeometryError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace d2d
