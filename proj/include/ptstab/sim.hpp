#pragma once

#include "ptstab/core.hpp"
#include "ptstab/hong.hpp"
#include "ptstab/pnf.hpp"
#include "ptstab/switching.hpp"
#include "ptstab/timescale.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ptstab {

/// Scalar disturbance signal from a small closed catalog.
struct Signal {
  enum class Kind { Zero, Constant, Sine, Noise };
  Kind kind = Kind::Zero;
  double amp = 0.0;     // Constant value, sine amplitude or noise bound
  double freq = 1.0;    // Sine, Hz
  double phase = 0.0;   // Sine, rad
  double offset = 0.0;  // added to every kind except Zero
  double period = 0.0;  // Noise hold period; 0 means "set by the simulator"
  std::uint64_t seed = 0;

  static Signal zero() { return {}; }
  static Signal constant(double c) { return {Kind::Constant, c}; }
  static Signal sine(double amp, double freq, double phase = 0.0, double offset = 0.0) {
    return {Kind::Sine, amp, freq, phase, offset};
  }
  static Signal noise(double amp, double period = 0.0, std::uint64_t seed = 0) {
    return {Kind::Noise, amp, 1.0, 0.0, 0.0, period, seed};
  }

  double value(double t) const;
  /// sup |value|.
  double bound() const;
  /// Hold period for Noise, 0 otherwise.
  double breakpoint_period() const { return kind == Kind::Noise ? period : 0.0; }

  /// "zero", "const:c", "sine:amp:freq[:phase[:offset]]", "noise:amp[:period]".
  static Signal parse(const std::string& text);
  std::string to_string() const;
};

/// One independent signal per coordinate; empty means identically zero.
struct VectorSignal {
  std::vector<Signal> components;

  Vector value(double t, int n) const;
  double bound() const;

  /// The same signal on every coordinate with per-coordinate noise seeds.
  static VectorSignal all(int n, const Signal& s);
  /// The signal on the last coordinate only.
  static VectorSignal last(int n, const Signal& s);
};

struct DisturbanceSpec {
  Signal matched;          // d, enters with b u along e_n
  VectorSignal meas_noise; // d1, seen by the controller only
  VectorSignal unmatched;  // d2, added to the vector field
  Signal b = Signal::constant(1.0);

  /// Assigns noise seeds derived from `seed` and the hold period where unset.
  void seed_noise(std::uint64_t seed, double period);
  void fill_noise_period(double period);
  double min_period() const;
};

struct PnfLaw {
  LinearGain gain;
  TimeScale ts;
  double eta = 1.0;
};
struct FixedTimeLaw {
  HongGainSet gains;
  SwitchParams sp;
};
struct MatchedRobustLaw {
  HongGainSet gains;
  SwitchParams sp;
  double reg_eps = 1e-3;
};
struct PrescribedTimeLaw {
  HongGainSet gains;
  SwitchParams sp;
  double T_target = 1.0;
};
struct CustomLaw {
  std::function<double(double, const Vector&)> u;
};
using FeedbackLaw = std::variant<PnfLaw, FixedTimeLaw, MatchedRobustLaw, PrescribedTimeLaw, CustomLaw>;

/// Control value the law returns for measured state xm at time t.
double evaluate_law(const FeedbackLaw& law, const ChainSpec& spec, double t, const Vector& xm);

struct SimOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  /// PNF runs stop at t_stop_frac * T.
  double t_stop_frac = 1.0 - 1e-6;
  /// End time for the other laws; <= 0 means spec.T.
  double t_end = 0.0;
  double settle_radius = 1e-9;
  int settle_steps = 100;
  bool stop_on_settle = true;
  double h_init = 1e-4;
  double h_min = 1e-15;
  long max_steps = 20'000'000;
  /// Step cap (relative to the band width) while V_0 is near a switching surface.
  double switch_cap = 1e-2;
  /// Times that must be hit exactly and recorded.
  std::vector<double> output_times;
};

enum class SimStatus { ReachedHorizon, Settled, StepFailure };
std::string to_string(SimStatus s);

inline constexpr std::array<const char*, 5> kDiagnosticNames{"V0", "Vkp", "Vkm", "kappa", "Z"};

struct Sample {
  double t = 0.0;
  Vector x;
  double u = 0.0;
  std::array<double, 5> diag{};
};

struct Trajectory {
  std::vector<Sample> samples;
  SimStatus status = SimStatus::ReachedHorizon;
  /// Settling time (entry into the persistent ball), failure time, or final time.
  double status_time = 0.0;
  std::string message;

  const Sample& back() const { return samples.back(); }
  /// First recorded sample with t equal to `t` (exact match), if any.
  const Sample* at(double t) const;
};

/// Dormand-Prince 4(5) integration of x' = J x + (d + b u) e_n + d2, u = law(t, x + d1).
Trajectory integrate(const ChainSpec& spec, const FeedbackLaw& law, const DisturbanceSpec& dist,
                     const Vector& x0, const SimOptions& opts = {});

/// Integration of the PNF closed loop in warped time sigma = eta * s(t):
/// y' = (a / eta) D_r y + J y + (b u + d) e_n, y = D^r_{eta lambda(t)} x, u = -K^T y.
/// Samples report t(sigma) and x = y_to_x(y); output_times are read as sigma values.
/// Samples whose t no longer increases (t saturating at T) are dropped.
Trajectory integrate_warped(const ChainSpec& spec, const LinearGain& gain, const TimeScale& ts,
                            double eta, const DisturbanceSpec& dist, const Vector& x0,
                            const SimOptions& opts = {}, double sigma_max = 30.0);

struct IssMetrics {
  double limsup_Z = 0.0;
  double sup_norm = 0.0;
  double settle_time = std::numeric_limits<double>::quiet_NaN();
};

/// limsup_Z is the max of Z over samples with t in the last tail_frac of the time span.
IssMetrics iss_metrics(const Trajectory& traj, const HongGainSet& g, const SwitchParams& sp,
                       double tail_frac = 0.25, ZExponent exponent = ZExponent::AsPrinted);

/// Start of the final stretch of samples with ||x|| <= radius, NaN if the last sample is outside.
double persistent_entry_time(const Trajectory& traj, double radius);

/// First t with ||x|| <= radius, NaN if never.
double first_entry_time(const Trajectory& traj, double radius);

/// Least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> isotonic_fit(const std::vector<double>& y);

/// Thread count from PTSTAB_THREADS (0 or unset means hardware concurrency).
int batch_threads();

/// Runs job(0..count-1) on batch_threads() workers; results are indexed, so
/// the output does not depend on scheduling.
template <typename R>
std::vector<R> run_batch(int count, const std::function<R(int)>& job);

void run_batch_impl(int count, const std::function<void(int)>& job);

template <typename R>
std::vector<R> run_batch(int count, const std::function<R(int)>& job) {
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(count));
  run_batch_impl(count, [&](int k) { slots[static_cast<std::size_t>(k)] = job(k); });
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ptstab
