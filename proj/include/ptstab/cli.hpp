#pragma once

#include "ptstab/io.hpp"
#include "ptstab/sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ptstab {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitFailure = 2 };

/// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Everything needed to run one experiment, resolved from a Config.
struct Experiment {
  ChainSpec spec;
  std::string controller;  // pnf | fixed_time | robust | prescribed
  FeedbackLaw law = CustomLaw{};
  DisturbanceSpec dist;
  SimOptions opts;
  std::optional<Vector> x0;
  double norm_min = 1.0;
  double norm_max = 1.0;
  int runs = 1;
  std::uint64_t seed = 1;
  double tail_frac = 0.25;
  std::string out_dir = ".";
  // Kept so that sweeps can rebuild the law.
  std::optional<LinearGain> linear;
  std::optional<Density> density;
  std::optional<HongGainSet> hong;
  std::optional<SwitchParams> switching;
  double eta = 0.0;
  double T_target = 1.0;
  double reg_eps = 1e-3;
  Signal d1_base;
  Signal d2_base;
  bool d2_matched = false;

  /// Rebuilds `law` from the stored pieces.
  void rebuild_law();
};

/// Keys accepted in experiment configs.
const std::vector<std::string>& config_keys();

/// Validates and resolves a config; throws FormatError listing offending keys.
Experiment load_experiment(const Config& cfg);

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  Trajectory traj;
  IssMetrics metrics;
  double proxy_time = 0.0;
};

/// Runs `count` seeded runs of the experiment in parallel; deterministic.
std::vector<RunResult> run_experiment(const Experiment& ex);

}  // namespace ptstab
