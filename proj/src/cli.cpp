#include "ptstab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace ptstab {

namespace {

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("bad number '" + s + "'");
  }
  if (used != s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw FormatError(key + ": expected true or false");
}

std::uint64_t run_seed(std::uint64_t base, int k) { return base + static_cast<std::uint64_t>(k); }

Vector random_initial_state(int n, double norm_min, double norm_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  Vector x(n);
  do {
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
  } while (x.norm() == 0.0);
  const double lo = std::log(norm_min);
  const double hi = std::log(norm_max);
  return x / x.norm() * std::exp(lo + (hi - lo) * unit(rng));
}

std::string format_metric(double v) { return std::isnan(v) ? "nan" : format_double(v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void print_checks(std::ostream& out, const std::vector<SwitchCheck>& checks) {
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "check"
      << "  " << std::setw(24) << "value" << "  " << std::setw(24) << "bound" << "  result\n";
  for (const auto& c : checks) {
    out << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(24)
        << format_double(c.value) << "  " << std::setw(24) << format_double(c.bound) << "  "
        << (c.pass ? "PASS" : "FAIL") << '\n';
  }
}

std::vector<SwitchCheck> pnf_checks(const LinearGain& g) {
  std::vector<SwitchCheck> out;
  const LmiReport rep = verify_lmi(g);
  out.push_back({"lmi_endpoint_max_eig", rep.endpoint_max_eig, kLmiTol, rep.endpoint_max_eig <= kLmiTol});
  out.push_back({"lmi_slope_min_eig", rep.slope_min_eig, -kLmiTol, rep.slope_min_eig >= -kLmiTol});
  const Matrix Ssym = 0.5 * (g.S + g.S.transpose());
  const double asym = (g.S - g.S.transpose()).cwiseAbs().maxCoeff();
  out.push_back({"S_symmetric", asym, kLmiTol, asym <= kLmiTol});
  const double smin = symmetric_eigenvalues(Ssym)(0);
  out.push_back({"S_min_eig", smin, 0.0, smin > 0.0});
  out.push_back({"rho", g.rho, 0.0, g.rho > 0.0});
  const int n = g.n;
  for (double a : {-g.C0, g.C0}) {
    const Matrix L = lmi_matrix(g, g.b_lower, a) + g.rho0 * Matrix::Identity(n, n);
    const double e = symmetric_eigenvalues(0.5 * (L + L.transpose()))(n - 1);
    out.push_back({a < 0 ? "perturbed_lmi_at_-C0" : "perturbed_lmi_at_+C0", e, kLmiTol, e <= kLmiTol});
  }
  out.push_back({"rho0_le_rho", g.rho0, g.rho, g.rho0 <= g.rho && g.rho0 > 0.0});
  return out;
}

std::vector<SwitchCheck> hong_checks(const HongGainSet& g, const std::optional<SwitchParams>& sp,
                                     double grid_scale) {
  std::vector<SwitchCheck> out;
  out.push_back({"decay_constant_C", g.C, 0.0, g.C > 0.0});
  SphereGrid grid = g.certificate.grid;
  grid.samples_per_kappa = std::max(1, static_cast<int>(std::lround(grid.samples_per_kappa * grid_scale)));
  const double residual = decay_residual(g.ell, g.C, grid);
  out.push_back({"decay_residual_max", residual, 0.0, residual <= 0.0});
  const DecayReport base = verify_decay(g, grid);
  SphereGrid fine = grid;
  fine.samples_per_kappa *= 10;
  const DecayReport refined = verify_decay(g, fine);
  const double change = std::abs(refined.C - base.C) / std::max(std::abs(base.C), 1e-300);
  out.push_back({"decay_refinement_change", change, 0.1, change < 0.1});
  out.push_back({"decay_C_below_refined_min", g.C, refined.C, g.C <= refined.C});
  if (sp) {
    for (auto& c : check_switch_params(g, *sp)) out.push_back(c);
  }
  return out;
}

int cmd_synthesize(const std::string& kind, int n, double b_lower, std::uint64_t seed, const std::string& path,
                   double m, double kappa0, double b_upper, std::ostream& out, std::ostream& err) {
  GainFile file;
  file.kind = kind;
  file.seed = seed;
  try {
    if (kind == "pnf") {
      file.linear = synthesize_certified_gain(n, b_lower);
    } else {
      HongSynthesisConfig cfg;
      cfg.grid.seed = seed;
      HongGainSet g = synthesize_hong_gains(n, cfg);
      g.b_lower = b_lower;
      file.switching = build_switch_params(g, m, kappa0, b_upper);
      file.hong = g;
    }
  } catch (const SynthesisError& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const HongSynthesisError& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kExitFailure;
  }
  save_gain_file(path, file);
  out << "wrote " << path << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& path, double grid_scale, std::ostream& out, std::ostream& err) {
  GainFile file;
  try {
    file = load_gain_file(path);
  } catch (const FormatError& e) {
    err << "cannot load gain file: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto checks = file.linear ? pnf_checks(*file.linear) : hong_checks(*file.hong, file.switching, grid_scale);
  print_checks(out, checks);
  const bool all = std::all_of(checks.begin(), checks.end(), [](const SwitchCheck& c) { return c.pass; });
  out << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? kExitOk : kExitFailure;
}

std::string summary_row(const RunResult& r) {
  return std::to_string(r.run) + ',' + std::to_string(r.seed) + ',' + to_string(r.traj.status) + ',' +
         format_metric(r.metrics.settle_time) + ',' + format_metric(r.metrics.sup_norm) + ',' +
         format_metric(r.metrics.limsup_Z);
}

int cmd_simulate(Experiment ex, std::ostream& out) {
  const auto results = run_experiment(ex);
  const std::filesystem::path dir(ex.out_dir);
  std::filesystem::create_directories(dir);
  std::string summary = "run,seed,status,settle_time,sup_norm,limsup_Z\n";
  for (const auto& r : results) {
    std::ostringstream csv;
    write_trajectory_csv(csv, r.traj, ex.spec.n);
    write_file(dir / ("run_" + std::to_string(r.run) + ".csv"), csv.str());
    summary += summary_row(r) + '\n';
  }
  write_file(dir / "summary.csv", summary);
  out << summary;
  return kExitOk;
}

void apply_sweep_value(Experiment& ex, const std::string& param, double v) {
  const int n = ex.spec.n;
  auto scaled = [&](const Signal& base) {
    if (base.kind == Signal::Kind::Zero) return Signal::noise(v);
    Signal s = base;
    s.amp = v;
    return s;
  };
  if (param == "d1_amp") {
    ex.dist.meas_noise = v == 0.0 ? VectorSignal{} : VectorSignal::all(n, scaled(ex.d1_base));
  } else if (param == "d2_amp") {
    const Signal s = scaled(ex.d2_base);
    ex.dist.unmatched = v == 0.0 ? VectorSignal{} : (ex.d2_matched ? VectorSignal::last(n, s) : VectorSignal::all(n, s));
  } else if (param == "eta") {
    if (ex.controller != "pnf") throw FormatError("eta sweeps need controller.kind = pnf");
    if (!(v > 0.0)) throw FormatError("eta values must be positive");
    ex.eta = v;
    ex.rebuild_law();
  } else if (param == "T_target") {
    if (ex.controller != "prescribed") throw FormatError("T_target sweeps need controller.kind = prescribed");
    if (!(v > 0.0)) throw FormatError("T_target values must be positive");
    ex.T_target = v;
    ex.rebuild_law();
  }
}

int cmd_sweep(const Experiment& base, const std::string& param, const std::vector<double>& values,
              std::ostream& out) {
  std::string csv = "param,value,run,seed,status,settle_time,sup_norm,limsup_Z,proxy_time\n";
  // Footer fits: nondecreasing in the worst limsup_Z per value, nonincreasing
  // in the worst settle proxy per value (a run that never gets there counts
  // with its final time).
  std::vector<double> worst_z;
  std::vector<double> worst_proxy;
  bool have_z = false;
  for (double v : values) {
    Experiment ex = base;
    apply_sweep_value(ex, param, v);
    const auto results = run_experiment(ex);
    double z = 0.0;
    double p = 0.0;
    for (const auto& r : results) {
      csv += param + ',' + format_double(v) + ',' + std::to_string(r.run) + ',' + std::to_string(r.seed) + ',' +
             to_string(r.traj.status) + ',' + format_metric(r.metrics.settle_time) + ',' +
             format_metric(r.metrics.sup_norm) + ',' + format_metric(r.metrics.limsup_Z) + ',' +
             format_metric(r.proxy_time) + '\n';
      if (!std::isnan(r.metrics.limsup_Z)) {
        have_z = true;
        z = std::max(z, r.metrics.limsup_Z);
      }
      p = std::max(p, std::isnan(r.proxy_time) ? r.traj.back().t : r.proxy_time);
    }
    worst_z.push_back(z);
    worst_proxy.push_back(-p);
  }
  csv += "# isotonic_limsup_Z";
  if (have_z) {
    const auto fit = isotonic_fit(worst_z);
    for (std::size_t i = 0; i < values.size(); ++i) csv += ' ' + format_double(values[i]) + '=' + format_double(fit[i]);
  } else {
    csv += " unavailable";
  }
  csv += "\n# antitone_proxy_time";
  const auto fit = isotonic_fit(worst_proxy);
  for (std::size_t i = 0; i < values.size(); ++i) csv += ' ' + format_double(values[i]) + '=' + format_double(-fit[i]);
  csv += '\n';
  const std::filesystem::path dir(base.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "sweep.csv", csv);
  out << csv;
  return kExitOk;
}

Experiment load_with_overrides(const std::string& path, std::optional<int> runs, std::optional<std::uint64_t> seed) {
  Config cfg = Config::load(path);
  if (runs) cfg.set("runs.count", std::to_string(*runs));
  if (seed) cfg.set("runs.seed", std::to_string(*seed));
  return load_experiment(cfg);
}

}  // namespace

void Experiment::rebuild_law() {
  if (controller == "pnf") {
    const TimeScale ts(spec.T, density.value_or(Density::constant(1.0)));
    const double e = eta > 0.0 ? eta : minimal_eta(*linear, ts);
    law = PnfLaw{*linear, ts, e};
  } else if (controller == "fixed_time") {
    law = FixedTimeLaw{*hong, *switching};
  } else if (controller == "robust") {
    law = MatchedRobustLaw{*hong, *switching, reg_eps};
  } else if (controller == "prescribed") {
    law = PrescribedTimeLaw{*hong, *switching, T_target};
  } else {
    throw FormatError("controller.kind: unknown controller '" + controller + "'");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "plant.n",          "plant.T",           "plant.b_lower",          "plant.b_upper",
      "plant.d_bound",    "controller.kind",   "controller.gains",       "controller.density",
      "controller.eta",   "controller.m",      "controller.kappa0",      "controller.reg_eps",
      "controller.T_target", "controller.synthesis_seed", "disturbance.d", "disturbance.d1",
      "disturbance.d2",   "disturbance.d2_dir", "disturbance.b",         "init.x0",
      "init.norm_min",    "init.norm_max",     "sim.rel_tol",            "sim.abs_tol",
      "sim.t_end",        "sim.t_stop_frac",   "sim.settle_radius",      "sim.tail_frac",
      "sim.stop_on_settle", "runs.count",      "runs.seed",              "output.dir"};
  return keys;
}

Experiment load_experiment(const Config& cfg) {
  const auto unknown = cfg.unknown_keys(config_keys());
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw FormatError("unknown config keys: " + list);
  }
  Experiment ex;
  auto& spec = ex.spec;
  spec.n = cfg.get_int("plant.n", 2);
  spec.T = cfg.get_double("plant.T", 1.0);
  spec.b_lower = cfg.get_double("plant.b_lower", 1.0);
  spec.b_upper = cfg.get_double("plant.b_upper", spec.b_lower);
  spec.d_bound = cfg.get_double("plant.d_bound", 0.0);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("plant: ") + e.what());
  }
  const int n = spec.n;

  ex.controller = cfg.get("controller.kind", "pnf");
  if (ex.controller != "pnf" && ex.controller != "fixed_time" && ex.controller != "robust" &&
      ex.controller != "prescribed") {
    throw FormatError("controller.kind: unknown controller '" + ex.controller + "'");
  }
  ex.eta = cfg.get_double("controller.eta", 0.0);
  if (ex.eta < 0.0) throw FormatError("controller.eta: must be positive (0 selects the minimal eta)");
  ex.T_target = cfg.get_double("controller.T_target", 1.0);
  if (!(ex.T_target > 0.0)) throw FormatError("controller.T_target: must be positive");
  ex.reg_eps = cfg.get_double("controller.reg_eps", 1e-3);
  if (!(ex.reg_eps > 0.0)) throw FormatError("controller.reg_eps: must be positive");
  const double m = cfg.get_double("controller.m", 0.5);
  if (!(m > 0.0 && m < 1.0)) throw FormatError("controller.m: must lie in (0, 1)");
  const double kappa0 = cfg.get_double("controller.kappa0", 0.0);
  const auto synthesis_seed = static_cast<std::uint64_t>(cfg.get_int("controller.synthesis_seed", 1));
  if (cfg.has("controller.density")) {
    try {
      ex.density = Density::parse(cfg.get("controller.density", ""));
    } catch (const std::exception& e) {
      throw FormatError(std::string("controller.density: ") + e.what());
    }
  } else {
    ex.density = Density::constant(1.0);
  }

  std::optional<GainFile> file;
  if (cfg.has("controller.gains")) file = load_gain_file(cfg.get("controller.gains", ""));
  if (ex.controller == "pnf") {
    if (file) {
      if (!file->linear) throw FormatError("controller.gains: pnf controller needs a pnf gain file");
      ex.linear = *file->linear;
    } else {
      ex.linear = synthesize_certified_gain(n, spec.b_lower);
    }
    if (ex.linear->n != n) throw FormatError("controller.gains: gain order differs from plant.n");
    if (ex.linear->b_lower > spec.b_lower) throw FormatError("controller.gains: gain b_lower exceeds plant.b_lower");
  } else {
    if (file) {
      if (!file->hong) throw FormatError("controller.gains: switching controllers need a hong gain file");
      ex.hong = *file->hong;
      if (ex.hong->n != n) throw FormatError("controller.gains: gain order differs from plant.n");
      ex.hong->b_lower = spec.b_lower;
      if (file->switching && !cfg.has("controller.m") && !cfg.has("controller.kappa0")) {
        ex.switching = *file->switching;
      }
    } else {
      HongSynthesisConfig hc;
      hc.grid.seed = synthesis_seed;
      ex.hong = synthesize_hong_gains(n, hc);
      ex.hong->b_lower = spec.b_lower;
    }
    if (!ex.switching) ex.switching = build_switch_params(*ex.hong, m, kappa0, spec.b_upper);
  }

  auto signal = [&](const std::string& key) {
    try {
      return Signal::parse(cfg.get(key, "zero"));
    } catch (const std::exception& e) {
      throw FormatError(key + ": " + e.what());
    }
  };
  ex.dist.matched = signal("disturbance.d");
  ex.d1_base = signal("disturbance.d1");
  ex.d2_base = signal("disturbance.d2");
  const std::string dir = cfg.get("disturbance.d2_dir", "all");
  if (dir != "all" && dir != "last") throw FormatError("disturbance.d2_dir: expected all or last");
  ex.d2_matched = dir == "last";
  if (ex.d1_base.kind != Signal::Kind::Zero) ex.dist.meas_noise = VectorSignal::all(n, ex.d1_base);
  if (ex.d2_base.kind != Signal::Kind::Zero) {
    ex.dist.unmatched = ex.d2_matched ? VectorSignal::last(n, ex.d2_base) : VectorSignal::all(n, ex.d2_base);
  }
  if (cfg.has("disturbance.b")) ex.dist.b = signal("disturbance.b");
  if (ex.dist.matched.bound() > spec.d_bound && ex.controller == "robust") {
    throw FormatError("disturbance.d: bound exceeds plant.d_bound");
  }

  if (cfg.has("init.x0")) {
    try {
      ex.x0 = parse_vector(cfg.get("init.x0", ""));
    } catch (const FormatError& e) {
      throw FormatError(std::string("init.x0: ") + e.what());
    }
    if (ex.x0->size() != n) throw FormatError("init.x0: expected " + std::to_string(n) + " entries");
  }
  ex.norm_min = cfg.get_double("init.norm_min", 1.0);
  ex.norm_max = cfg.get_double("init.norm_max", ex.norm_min);
  if (!(ex.norm_min > 0.0 && ex.norm_max >= ex.norm_min)) {
    throw FormatError("init.norm_min/init.norm_max: need 0 < norm_min <= norm_max");
  }

  auto& o = ex.opts;
  o.rel_tol = cfg.get_double("sim.rel_tol", o.rel_tol);
  o.abs_tol = cfg.get_double("sim.abs_tol", o.abs_tol);
  o.t_end = cfg.get_double("sim.t_end", o.t_end);
  o.t_stop_frac = cfg.get_double("sim.t_stop_frac", o.t_stop_frac);
  o.settle_radius = cfg.get_double("sim.settle_radius", o.settle_radius);
  if (cfg.has("sim.stop_on_settle")) o.stop_on_settle = parse_bool("sim.stop_on_settle", cfg.get("sim.stop_on_settle", ""));
  if (!(o.rel_tol > 0.0 && o.abs_tol > 0.0)) throw FormatError("sim.rel_tol/sim.abs_tol: must be positive");
  if (!(o.t_stop_frac > 0.0 && o.t_stop_frac < 1.0)) throw FormatError("sim.t_stop_frac: must lie in (0, 1)");
  ex.tail_frac = cfg.get_double("sim.tail_frac", ex.tail_frac);
  if (!(ex.tail_frac > 0.0 && ex.tail_frac <= 1.0)) throw FormatError("sim.tail_frac: must lie in (0, 1]");

  ex.runs = cfg.get_int("runs.count", 1);
  if (ex.runs < 1) throw FormatError("runs.count: must be at least 1");
  const double seed = cfg.get_double("runs.seed", 1.0);
  if (seed < 0.0 || seed != std::floor(seed)) throw FormatError("runs.seed: expected a nonnegative integer");
  ex.seed = static_cast<std::uint64_t>(seed);
  ex.out_dir = cfg.get("output.dir", ".");

  ex.rebuild_law();
  return ex;
}

std::vector<RunResult> run_experiment(const Experiment& ex) {
  const int n = ex.spec.n;
  const bool pnf = ex.controller == "pnf";
  const double horizon = pnf ? ex.spec.T : (ex.opts.t_end > 0.0 ? ex.opts.t_end : ex.spec.T);
  return run_batch<RunResult>(ex.runs, [&](int k) {
    RunResult r;
    r.run = k;
    r.seed = run_seed(ex.seed, k);
    const Vector x0 = ex.x0 ? *ex.x0 : random_initial_state(n, ex.norm_min, ex.norm_max, r.seed);
    DisturbanceSpec dist = ex.dist;
    dist.seed_noise(r.seed, horizon / 1e4);
    r.traj = integrate(ex.spec, ex.law, dist, x0, ex.opts);
    if (ex.switching) {
      r.metrics = iss_metrics(r.traj, *ex.hong, *ex.switching, ex.tail_frac);
    } else {
      r.metrics.limsup_Z = std::numeric_limits<double>::quiet_NaN();
      for (const auto& s : r.traj.samples) r.metrics.sup_norm = std::max(r.metrics.sup_norm, s.x.norm());
      r.metrics.settle_time = persistent_entry_time(r.traj, ex.opts.settle_radius);
    }
    r.proxy_time = first_entry_time(r.traj, 1e-6);
    return r;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prescribed-time and fixed-time stabilization of integrator chains"};
  app.name("ptstab");
  app.require_subcommand(1);

  std::string kind;
  int n = 0;
  double b_lower = 1.0;
  std::uint64_t syn_seed = 1;
  std::string out_path;
  double m = 0.5;
  double kappa0 = 0.0;
  double b_upper = 1.0;
  auto* syn = app.add_subcommand("synthesize", "Synthesize and certify a gain file");
  syn->add_option("--kind", kind, "pnf or hong")->required()->check(CLI::IsMember({"pnf", "hong"}));
  syn->add_option("--n", n, "chain order")->required()->check(CLI::Range(1, 12));
  syn->add_option("--b-lower", b_lower, "lower bound on the control gain")->required()->check(CLI::PositiveNumber);
  syn->add_option("--seed", syn_seed, "sampling seed");
  syn->add_option("--out", out_path, "output gain file")->required();
  syn->add_option("--m", m, "switching band half-width")->check(CLI::Range(0.0, 1.0));
  syn->add_option("--kappa0", kappa0, "switching degree (0 selects it automatically)");
  syn->add_option("--b-upper", b_upper, "upper bound on the control gain");

  std::string gains_path;
  double grid_scale = 1.0;
  auto* ver = app.add_subcommand("verify", "Re-check the certificates in a gain file");
  ver->add_option("--gains", gains_path, "gain file")->required();
  ver->add_option("--grid-scale", grid_scale, "sample-count multiplier")->check(CLI::PositiveNumber);

  std::string sim_config;
  std::optional<int> sim_runs;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Run an experiment config");
  sim->add_option("--config", sim_config, "experiment config")->required();
  sim->add_option("--runs", sim_runs, "number of runs")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "base seed");

  std::string sweep_config;
  std::string param;
  std::string values_text;
  std::optional<int> sweep_runs;
  std::optional<std::uint64_t> sweep_seed;
  auto* swp = app.add_subcommand("sweep", "Sweep one parameter of an experiment config");
  swp->add_option("--config", sweep_config, "experiment config")->required();
  swp->add_option("--param", param, "d1_amp, d2_amp, eta or T_target")
      ->required()
      ->check(CLI::IsMember({"d1_amp", "d2_amp", "eta", "T_target"}));
  swp->add_option("--values", values_text, "comma-separated values")->required();
  swp->add_option("--runs", sweep_runs, "number of runs per value")->check(CLI::PositiveNumber);
  swp->add_option("--seed", sweep_seed, "base seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*syn) {
      if (kind == "hong" && b_upper < b_lower) throw FormatError("--b-upper must be at least --b-lower");
      return cmd_synthesize(kind, n, b_lower, syn_seed, out_path, m, kappa0, std::max(b_upper, b_lower), out, err);
    }
    if (*ver) return cmd_verify(gains_path, grid_scale, out, err);
    if (*sim) return cmd_simulate(load_with_overrides(sim_config, sim_runs, sim_seed), out);
    if (*swp) {
      std::vector<double> values;
      for (const auto& v : split_values(values_text)) values.push_back(parse_number(v));
      if (values.empty()) throw FormatError("--values: empty list");
      return cmd_sweep(load_with_overrides(sweep_config, sweep_runs, sweep_seed), param, values, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ptstab
