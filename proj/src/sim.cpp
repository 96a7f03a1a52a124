#include "ptstab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace ptstab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double parse_number(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double Signal::value(double t) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return amp + offset;
    case Kind::Sine: return offset + amp * std::sin(2.0 * kPi * freq * t + phase);
    case Kind::Noise: {
      if (!(period > 0.0)) throw DomainError("Signal: noise needs a positive hold period");
      const auto k = static_cast<std::uint64_t>(std::max(0.0, std::floor(t / period)));
      const double u = static_cast<double>(splitmix64(seed * 0x100000001b3ull ^ k) >> 11) * 0x1.0p-53;
      return offset + amp * (2.0 * u - 1.0);
    }
  }
  return 0.0;
}

double Signal::bound() const {
  if (kind == Kind::Zero) return 0.0;
  return std::abs(offset) + std::abs(amp);
}

Signal Signal::parse(const std::string& text) {
  const auto f = split(text, ':');
  if (f.empty()) throw std::invalid_argument("empty signal");
  try {
    if (f[0] == "zero" && f.size() == 1) return zero();
    if (f[0] == "const" && f.size() == 2) return constant(parse_number(f[1]));
    if (f[0] == "sine" && f.size() >= 3 && f.size() <= 5) {
      return sine(parse_number(f[1]), parse_number(f[2]), f.size() > 3 ? parse_number(f[3]) : 0.0,
                  f.size() > 4 ? parse_number(f[4]) : 0.0);
    }
    if (f[0] == "noise" && (f.size() == 2 || f.size() == 3)) {
      return noise(parse_number(f[1]), f.size() == 3 ? parse_number(f[2]) : 0.0);
    }
  } catch (const std::logic_error&) {
  }
  throw std::invalid_argument("bad signal '" + text + "'");
}

std::string Signal::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Zero: os << "zero"; break;
    case Kind::Constant: os << "const:" << amp + offset; break;
    case Kind::Sine: os << "sine:" << amp << ':' << freq << ':' << phase << ':' << offset; break;
    case Kind::Noise: os << "noise:" << amp << ':' << period; break;
  }
  return os.str();
}

Vector VectorSignal::value(double t, int n) const {
  Vector v = Vector::Zero(n);
  for (int i = 0; i < n && i < static_cast<int>(components.size()); ++i) v(i) = components[i].value(t);
  return v;
}

double VectorSignal::bound() const {
  double s = 0.0;
  for (const auto& c : components) s += c.bound() * c.bound();
  return std::sqrt(s);
}

VectorSignal VectorSignal::all(int n, const Signal& s) {
  VectorSignal v;
  v.components.assign(n, s);
  for (int i = 0; i < n; ++i) v.components[i].seed = s.seed + 7919u * static_cast<std::uint64_t>(i + 1);
  return v;
}

VectorSignal VectorSignal::last(int n, const Signal& s) {
  VectorSignal v;
  v.components.assign(n, Signal::zero());
  v.components[n - 1] = s;
  return v;
}

void DisturbanceSpec::seed_noise(std::uint64_t seed, double period) {
  std::uint64_t k = 0;
  auto fix = [&](Signal& s) {
    ++k;
    if (s.kind != Signal::Kind::Noise) return;
    s.seed = splitmix64(seed + 0x632be59bd9b4e019ull * k + s.seed);
    if (!(s.period > 0.0)) s.period = period;
  };
  fix(matched);
  fix(b);
  for (auto& c : meas_noise.components) fix(c);
  for (auto& c : unmatched.components) fix(c);
}

void DisturbanceSpec::fill_noise_period(double period) {
  auto fix = [&](Signal& s) {
    if (s.kind == Signal::Kind::Noise && !(s.period > 0.0)) s.period = period;
  };
  fix(matched);
  fix(b);
  for (auto& c : meas_noise.components) fix(c);
  for (auto& c : unmatched.components) fix(c);
}

double DisturbanceSpec::min_period() const {
  double p = std::numeric_limits<double>::infinity();
  auto look = [&](const Signal& s) {
    if (s.breakpoint_period() > 0.0) p = std::min(p, s.breakpoint_period());
  };
  look(matched);
  look(b);
  for (const auto& c : meas_noise.components) look(c);
  for (const auto& c : unmatched.components) look(c);
  return p;
}

std::string to_string(SimStatus s) {
  switch (s) {
    case SimStatus::ReachedHorizon: return "ReachedHorizon";
    case SimStatus::Settled: return "Settled";
    case SimStatus::StepFailure: return "StepFailure";
  }
  return "?";
}

const Sample* Trajectory::at(double t) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const Sample& s, double v) { return s.t < v; });
  if (it == samples.end() || it->t != t) return nullptr;
  return &*it;
}

double evaluate_law(const FeedbackLaw& law, const ChainSpec& spec, double t, const Vector& xm) {
  return std::visit(
      [&](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PnfLaw>) {
          return pnf_feedback(l.gain, l.ts, l.eta, t, xm);
        } else if constexpr (std::is_same_v<L, FixedTimeLaw>) {
          return fixed_time_feedback(l.gains, l.sp, xm);
        } else if constexpr (std::is_same_v<L, MatchedRobustLaw>) {
          return matched_robust_feedback(l.gains, l.sp, spec, l.reg_eps, xm);
        } else if constexpr (std::is_same_v<L, PrescribedTimeLaw>) {
          return prescribed_time_feedback(l.gains, l.sp, l.T_target, xm);
        } else {
          return l.u(t, xm);
        }
      },
      law);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

/// A right-hand side evaluated with noise frozen at `hold`; returns false on a non-finite control.
using Rhs = std::function<bool(double t, double hold, const Vector& x, Vector& f, double& u)>;

struct StepHooks {
  /// Largest admissible step from (t, x, f) before error control.
  std::function<double(double, const Vector&, const Vector&)> cap;
  /// Called on every accepted state (including the initial one).
  std::function<void(double, const Vector&, double)> record;
  /// Returns true when integration should stop after this accepted state.
  std::function<bool(double, const Vector&)> stop;
};

struct DriveResult {
  bool failed = false;
  double t_fail = 0.0;
  std::string message;
};

DriveResult drive(const Rhs& rhs, double t0, double t_end, Vector x, const SimOptions& opts,
                  double hold_period, const std::vector<double>& output_times, const StepHooks& hooks) {
  DriveResult res;
  const auto n = x.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xn(n), err(n);
  double t = t0;
  double u = 0.0;
  auto hold_at = [&](double tt) {
    return hold_period > 0.0 ? hold_period * std::floor(tt / hold_period + 1e-12) : tt;
  };
  if (!rhs(t, hold_at(t), x, k1, u)) {
    res = {true, t, "non-finite control at start"};
    return res;
  }
  hooks.record(t, x, u);
  if (hooks.stop && hooks.stop(t, x)) return res;

  std::size_t next_out = 0;
  while (next_out < output_times.size() && output_times[next_out] <= t) ++next_out;
  double h = opts.h_init;
  long steps = 0;
  while (t < t_end) {
    if (++steps > opts.max_steps) {
      res = {true, t, "step budget exhausted"};
      return res;
    }
    double target = t_end;
    if (next_out < output_times.size()) target = std::min(target, output_times[next_out]);
    const double hold = hold_at(t);
    if (hold_period > 0.0) target = std::min(target, hold + hold_period);
    double h_try = h;
    if (hooks.cap) h_try = std::min(h_try, hooks.cap(t, x, k1));
    bool lands = false;
    if (t + h_try >= target || target - (t + h_try) < 1e-3 * h_try) {
      h_try = target - t;
      lands = true;
    }
    if (!(h_try >= opts.h_min) && !(lands && h_try > 0.0)) {
      res = {true, t, "step size underflow"};
      return res;
    }

    bool ok = true;
    double u_new = 0.0;
    const double hh = h_try;
    xs = x + hh * a21 * k1;
    ok = ok && rhs(t + c2 * hh, hold, xs, k2, u_new);
    xs = x + hh * (a31 * k1 + a32 * k2);
    ok = ok && rhs(t + c3 * hh, hold, xs, k3, u_new);
    xs = x + hh * (a41 * k1 + a42 * k2 + a43 * k3);
    ok = ok && rhs(t + c4 * hh, hold, xs, k4, u_new);
    xs = x + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    ok = ok && rhs(t + c5 * hh, hold, xs, k5, u_new);
    xs = x + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    ok = ok && rhs(t + hh, hold, xs, k6, u_new);
    const double t_new = lands ? target : t + hh;
    if (ok) {
      xn = x + hh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      ok = xn.allFinite() && rhs(t_new, hold, xn, k7, u_new);
    }
    if (!ok) {
      h = 0.25 * hh;
      if (h < opts.h_min) {
        res = {true, t, "non-finite state or control"};
        return res;
      }
      continue;
    }
    err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double e = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(x(i)), std::abs(xn(i)));
      e = std::max(e, std::abs(err(i)) / sc);
    }
    if (e > 1.0) {
      h = hh * std::max(0.2, 0.9 * std::pow(e, -0.2));
      if (h < opts.h_min) {
        res = {true, t, "step size underflow"};
        return res;
      }
      continue;
    }
    const double grow = e == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(e, -0.2)));
    // A step shortened to hit a breakpoint says little about the next one.
    h = lands ? std::max(hh * grow, h) : hh * grow;
    t = t_new;
    x = xn;
    // The last stage used the old hold value; re-evaluate when a new segment starts.
    if (hold_period > 0.0 && hold_at(t) != hold) {
      if (!rhs(t, hold_at(t), x, k7, u_new)) {
        res = {true, t, "non-finite control"};
        return res;
      }
    }
    k1 = k7;
    u = u_new;
    if (lands && next_out < output_times.size() && t >= output_times[next_out]) ++next_out;
    hooks.record(t, x, u);
    if (hooks.stop && hooks.stop(t, x)) return res;
  }
  return res;
}

/// Frozen-noise evaluation: Noise components read the hold time.
double signal_at(const Signal& s, double t, double hold) {
  return s.kind == Signal::Kind::Noise ? s.value(hold) : s.value(t);
}
Vector vsignal_at(const VectorSignal& v, double t, double hold, int n) {
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n && i < static_cast<int>(v.components.size()); ++i)
    out(i) = signal_at(v.components[i], t, hold);
  return out;
}

struct SwitchView {
  const HongGainSet* g = nullptr;
  const SwitchParams* sp = nullptr;
};

SwitchView switch_view(const FeedbackLaw& law) {
  if (auto p = std::get_if<FixedTimeLaw>(&law)) return {&p->gains, &p->sp};
  if (auto p = std::get_if<MatchedRobustLaw>(&law)) return {&p->gains, &p->sp};
  if (auto p = std::get_if<PrescribedTimeLaw>(&law)) return {&p->gains, &p->sp};
  return {};
}

std::array<double, 5> diagnostics(const FeedbackLaw& law, const Vector& x) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const auto view = switch_view(law);
  if (!view.sp) return {nan, nan, nan, nan, nan};
  const auto& sp = *view.sp;
  const auto& ell = view.g->ell;
  double kappa = kappa_of_x(sp, x);
  if (auto p = std::get_if<PrescribedTimeLaw>(&law)) {
    kappa = kappa_of_x(sp, dilate(WeightVector::pnf(p->gains.n), prescribed_time_scale(sp, p->T_target), x));
  } else if (std::holds_alternative<MatchedRobustLaw>(law)) {
    kappa = hong_value(ell, -sp.kappa0, x) > 1.0 ? sp.kappa0 : -sp.kappa0;
  }
  return {sp.V0(x), hong_value(ell, sp.kappa0, x), hong_value(ell, -sp.kappa0, x), kappa, iss_z(ell, sp, x)};
}

/// Distance (relative) of the law's switching function to its surfaces.
double surface_gap(const FeedbackLaw& law, const Vector& x) {
  if (auto p = std::get_if<FixedTimeLaw>(&law)) return band_edge_gap(p->sp, x);
  if (auto p = std::get_if<PrescribedTimeLaw>(&law)) {
    return band_edge_gap(p->sp, dilate(WeightVector::pnf(p->gains.n),
                                       prescribed_time_scale(p->sp, p->T_target), x));
  }
  if (auto p = std::get_if<MatchedRobustLaw>(&law)) {
    return std::abs(hong_value(p->gains.ell, -p->sp.kappa0, x) - 1.0);
  }
  return std::numeric_limits<double>::infinity();
}

void validate_b(const DisturbanceSpec& dist, const ChainSpec& spec) {
  if (dist.b.kind == Signal::Kind::Noise) {
    if (dist.b.offset - std::abs(dist.b.amp) < spec.b_lower * (1.0 - 1e-12)) {
      throw DomainError("integrate: b profile can drop below b_lower");
    }
    return;
  }
  const double lo = dist.b.kind == Signal::Kind::Sine ? dist.b.offset - std::abs(dist.b.amp)
                                                      : dist.b.value(0.0);
  if (lo < spec.b_lower * (1.0 - 1e-12)) throw DomainError("integrate: b profile can drop below b_lower");
}

}  // namespace

Trajectory integrate(const ChainSpec& spec, const FeedbackLaw& law, const DisturbanceSpec& dist_in,
                     const Vector& x0, const SimOptions& opts) {
  spec.validate();
  const int n = spec.n;
  if (x0.size() != n) throw std::invalid_argument("integrate: x0 has the wrong dimension");
  if (!x0.allFinite()) throw DomainError("integrate: x0 must be finite");
  validate_b(dist_in, spec);
  DisturbanceSpec dist = dist_in;
  dist.fill_noise_period(spec.T / 1e4);
  const double period = dist.min_period();
  const double hold_period = std::isfinite(period) ? period : 0.0;

  const bool is_pnf = std::holds_alternative<PnfLaw>(law);
  const double t_end = is_pnf ? opts.t_stop_frac * spec.T : (opts.t_end > 0.0 ? opts.t_end : spec.T);
  const Matrix J = jordan_block(n);

  Rhs rhs = [&](double t, double hold, const Vector& x, Vector& f, double& u) {
    const Vector xm = x + vsignal_at(dist.meas_noise, t, hold, n);
    u = evaluate_law(law, spec, t, xm);
    if (!std::isfinite(u)) return false;
    f.noalias() = J * x;
    f(n - 1) += signal_at(dist.matched, t, hold) + signal_at(dist.b, t, hold) * u;
    f += vsignal_at(dist.unmatched, t, hold, n);
    return f.allFinite();
  };

  Trajectory traj;
  int inside = 0;
  double entry = 0.0;
  StepHooks hooks;
  hooks.record = [&](double t, const Vector& x, double u) {
    traj.samples.push_back({t, x, u, diagnostics(law, x)});
  };
  hooks.stop = [&](double t, const Vector& x) {
    // PNF runs always go to t_stop_frac * T.
    if (is_pnf) return false;
    if (x.norm() <= opts.settle_radius) {
      if (inside++ == 0) entry = t;
      if (inside >= opts.settle_steps && traj.status != SimStatus::Settled) {
        traj.status = SimStatus::Settled;
        traj.status_time = entry;
        return opts.stop_on_settle;
      }
    } else {
      inside = 0;
      if (traj.status == SimStatus::Settled) traj.status = SimStatus::ReachedHorizon;
    }
    return false;
  };
  hooks.cap = [&](double t, const Vector& x, const Vector& f) {
    double cap = std::numeric_limits<double>::infinity();
    if (is_pnf) cap = 0.05 * (spec.T - t);
    if (surface_gap(law, x) < 0.05) {
      const double speed = f.norm();
      if (speed > 0.0) cap = std::min(cap, opts.switch_cap * std::max(x.norm(), opts.settle_radius) / speed);
    }
    return cap;
  };

  std::vector<double> outs = opts.output_times;
  std::sort(outs.begin(), outs.end());
  const auto res = drive(rhs, 0.0, t_end, x0, opts, hold_period, outs, hooks);
  if (res.failed) {
    traj.status = SimStatus::StepFailure;
    traj.status_time = res.t_fail;
    traj.message = res.message;
  } else if (traj.status != SimStatus::Settled) {
    // Still inside the ball at the horizon counts as settled even if the
    // remaining steps were too long to reach settle_steps.
    if (inside > 0) {
      traj.status = SimStatus::Settled;
      traj.status_time = entry;
    } else {
      traj.status = SimStatus::ReachedHorizon;
      traj.status_time = traj.samples.back().t;
    }
  }
  return traj;
}

Trajectory integrate_warped(const ChainSpec& spec, const LinearGain& gain, const TimeScale& ts,
                            double eta, const DisturbanceSpec& dist_in, const Vector& x0,
                            const SimOptions& opts, double sigma_max) {
  spec.validate();
  const int n = spec.n;
  if (x0.size() != n) throw std::invalid_argument("integrate_warped: x0 has the wrong dimension");
  if (!(eta >= 1.0)) throw DomainError("integrate_warped: eta must be >= 1");
  validate_b(dist_in, spec);
  DisturbanceSpec dist = dist_in;
  dist.fill_noise_period(spec.T / 1e4);
  // Noise holds are defined in x-time; in sigma they are not uniform, so each
  // stage reads its own x-time instead of a frozen one.
  const WeightVector w = WeightVector::pnf(n);
  const Vector r = w.r;
  const Matrix J = jordan_block(n);

  Rhs rhs = [&](double sigma, double, const Vector& y, Vector& f, double& u) {
    const double s = sigma / eta;
    const double t = ts.t_of_s(s);
    const double q = eta * ts.lambda_of_s(s);
    Vector d1 = vsignal_at(dist.meas_noise, t, t, n);
    for (int i = 0; i < n; ++i) d1(i) *= std::pow(q, r(i));
    u = -gain.K.dot(y + d1);
    if (!std::isfinite(u)) return false;
    const double a = ts.a_of_s(s) / eta;
    f.noalias() = J * y;
    for (int i = 0; i < n; ++i) f(i) += a * r(i) * y(i);
    f(n - 1) += signal_at(dist.b, t, t) * u + signal_at(dist.matched, t, t);
    const Vector d2 = vsignal_at(dist.unmatched, t, t, n);
    for (int i = 0; i < n; ++i) f(i) += std::pow(q, r(i) - 1.0) * d2(i);
    return f.allFinite();
  };

  Trajectory traj;
  double last_t = -1.0;
  StepHooks hooks;
  hooks.record = [&](double sigma, const Vector& y, double u) {
    const double s = sigma / eta;
    const double t = ts.t_of_s(s);
    if (!(t > last_t)) return;
    last_t = t;
    const double q = eta * ts.lambda_of_s(s);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = y(i) / std::pow(q, r(i));
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    traj.samples.push_back({t, x, u, {nan, nan, nan, nan, nan}});
  };

  const Vector y0 = x_to_y(ts, w, eta, 0.0, x0);
  std::vector<double> outs = opts.output_times;
  std::sort(outs.begin(), outs.end());
  const auto res = drive(rhs, 0.0, sigma_max, y0, opts, 0.0, outs, hooks);
  if (res.failed) {
    traj.status = SimStatus::StepFailure;
    traj.status_time = ts.t_of_s(res.t_fail / eta);
    traj.message = res.message;
  } else {
    traj.status = SimStatus::ReachedHorizon;
    traj.status_time = traj.samples.back().t;
  }
  return traj;
}

IssMetrics iss_metrics(const Trajectory& traj, const HongGainSet& g, const SwitchParams& sp,
                       double tail_frac, ZExponent exponent) {
  if (traj.samples.empty()) throw DomainError("iss_metrics: empty trajectory");
  if (!(tail_frac > 0.0 && tail_frac <= 1.0)) throw DomainError("iss_metrics: tail_frac must lie in (0, 1]");
  IssMetrics m;
  const double t0 = traj.samples.front().t;
  const double t1 = traj.samples.back().t;
  const double cut = t1 - tail_frac * (t1 - t0);
  for (const auto& s : traj.samples) {
    m.sup_norm = std::max(m.sup_norm, s.x.norm());
    if (s.t >= cut) m.limsup_Z = std::max(m.limsup_Z, iss_z(g.ell, sp, s.x, exponent));
  }
  if (traj.status == SimStatus::Settled) m.settle_time = traj.status_time;
  return m;
}

double persistent_entry_time(const Trajectory& traj, double radius) {
  double entry = std::numeric_limits<double>::quiet_NaN();
  for (auto it = traj.samples.rbegin(); it != traj.samples.rend() && it->x.norm() <= radius; ++it) entry = it->t;
  return entry;
}

double first_entry_time(const Trajectory& traj, double radius) {
  for (const auto& s : traj.samples)
    if (s.x.norm() <= radius) return s.t;
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> isotonic_fit(const std::vector<double>& y) {
  // Blocks of (mean, weight).
  std::vector<std::pair<double, double>> blocks;
  for (double v : y) {
    blocks.emplace_back(v, 1.0);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].first > blocks.back().first) {
      auto [m2, w2] = blocks.back();
      blocks.pop_back();
      auto& [m1, w1] = blocks.back();
      m1 = (m1 * w1 + m2 * w2) / (w1 + w2);
      w1 += w2;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& [m, w] : blocks) out.insert(out.end(), static_cast<std::size_t>(w), m);
  return out;
}

int batch_threads() {
  int n = 0;
  if (const char* env = std::getenv("PTSTAB_THREADS")) n = std::atoi(env);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

void run_batch_impl(int count, const std::function<void(int)>& job) {
  const int workers = std::min(batch_threads(), std::max(1, count));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int k = next++; k < count; k = next++) {
        try {
          job(k);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      (void)w;
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ptstab
