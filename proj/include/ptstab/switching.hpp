#pragma once

#include "ptstab/core.hpp"
#include "ptstab/hong.hpp"

#include <cstdint>
#include <string>

namespace ptstab {

/// Parameters of the state-dependent homogeneity degree kappa(x).
struct SwitchParams {
  double m = 0.5;
  double kappa0 = 0.0;
  /// V_0(x) = x^T P x.
  Matrix P;
  /// Largest r with {V_{kappa0} < r} inside {V_0 < 1 + m} (with safety 0.9).
  double r_plus = 0.0;
  /// Smallest r with {V_{-kappa0} < r} containing {V_0 < 1 - m} (with safety 1.1).
  double r_minus = 0.0;
  double T_settle = 0.0;
  double C = 0.0;
  /// min of V_{+kappa0} on {V_{-kappa0} = 1} (with safety 0.9).
  double E = 0.0;
  /// Upper control-gain bound used for the band estimates.
  double b_upper = 1.0;

  double V0(const Vector& x) const { return x.dot(P * x); }
};

/// Explicit constants of the parameter pipeline.
struct ExplicitConstants {
  double m = 0.0;
  /// Bound on |x_j|, |v_j| over the bands {1-m <= V_kappa <= 1+m}.
  double X_n = 0.0;
  /// |omega_kappa - omega_0| <= C1 |kappa|^{min(1, r_n)} on the bands.
  double C1 = 0.0;
  /// |V_kappa - V_0| <= C2 |kappa|^{min(1, r_n)} on the bands.
  double C2 = 0.0;
  /// Closed-form admissible kappa0, capped at 0.999/(2n).
  double kappa0_of_m = 0.0;
};

/// Sample counts and seed for every sweep in this module.
struct SwitchSampling {
  int samples = 20000;
  std::uint64_t seed = 11;
};

/// Points with V_kappa(x) = level, produced by dilating kappa-sphere samples.
std::vector<Vector> hong_level_samples(const Vector& ell, double kappa, double level, int N,
                                       std::uint64_t seed);

/// Points with V_kappa uniformly spread in [lo, hi].
std::vector<Vector> hong_band_samples(const Vector& ell, double kappa, double lo, double hi, int N,
                                      std::uint64_t seed);

ExplicitConstants explicit_constants(const HongGainSet& g, double m, double b_upper = 1.0,
                                     const SwitchSampling& sampling = {});

/// Crossing time through the band is (2/C) ln((1+m)/(1-m)).
double settling_bound(double C, double m, double kappa0, double r_plus, double r_minus);
double settling_bound(const HongGainSet& g, const SwitchParams& sp);

/// The same bound with the crossing term written as -2 ln(2m) / C.
double settling_bound_as_printed(double C, double m, double kappa0, double r_plus, double r_minus);

/// kappa0 <= 0 selects min(kappa0_of_m, 0.999/(2n)).
SwitchParams build_switch_params(const HongGainSet& g, double m = 0.5, double kappa0 = 0.0,
                                 double b_upper = 1.0, const SwitchSampling& sampling = {});

/// kappa0 on {V_0 > 1+m}, -kappa0 on {V_0 < 1-m}, affine in V_0 in between.
double kappa_of_x(const SwitchParams& sp, const Vector& x);

/// omega^H_{kappa(x)}(x) with l_n replaced by l_n / b_lower.
double fixed_time_feedback(const HongGainSet& g, const SwitchParams& sp, const Vector& x);

/// z / max(|z|, eps).
inline double regularized_sign(double z, double eps) { return z / std::max(std::abs(z), eps); }

/// Switched law omega_0: u_+ = omega^H_{+kappa0} while V_{-kappa0} > 1, u_- = omega^H_{-kappa0} otherwise.
double matched_switched_law(const HongGainSet& g, const SwitchParams& sp, const Vector& y);

/// (omega_0(y) + D sgn_eps(omega_0(y))) / b_lower.
double matched_robust_feedback(const HongGainSet& g, const SwitchParams& sp, const ChainSpec& spec,
                               double reg_eps, const Vector& y);

/// max(1, T_settle / T_target).
double prescribed_time_scale(const SwitchParams& sp, double T_target);

/// fixed_time_feedback at D^r_mu x, PNF weights, mu = prescribed_time_scale.
double prescribed_time_feedback(const HongGainSet& g, const SwitchParams& sp, double T_target,
                                const Vector& x);

/// Relative distance of V_0(x) to the nearer band edge.
double band_edge_gap(const SwitchParams& sp, const Vector& x);

enum class ZExponent { AsPrinted, Symmetric };

/// min(V_0, V_{kappa0}^{1+alpha(kappa0)}, V_{-kappa0}^{e}) with e = 1 - alpha(kappa0)
/// (AsPrinted) or 1 + alpha(-kappa0) (Symmetric).
double iss_z(const Vector& ell, const SwitchParams& sp, const Vector& x,
             ZExponent exponent = ZExponent::AsPrinted);

struct SwitchCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Band decay, containments, outer/inner decay and the geometric condition on samples.
std::vector<SwitchCheck> check_switch_params(const HongGainSet& g, const SwitchParams& sp,
                                             const SwitchSampling& sampling = {});

}  // namespace ptstab
