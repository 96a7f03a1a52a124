#pragma once

#include "ptstab/core.hpp"

#include <cstdint>

namespace ptstab {

/// beta(0..n-1) with beta_0 = 1 + kappa and (beta_j + 1) r_{j+1} = beta_0 + 1.
struct BetaExponents {
  double kappa = 0.0;
  Vector beta;
};

BetaExponents beta_exponents(int n, double kappa);

/// alpha(kappa) = kappa / (2 + kappa).
inline double decay_exponent(double kappa) { return kappa / (2.0 + kappa); }

/// Sampling grid used for every sphere sweep of the homogeneous controller.
struct SphereGrid {
  int samples_per_kappa = 1000;
  int kappa_count = 11;
  std::uint64_t seed = 1;

  SphereGrid refined(double scale) const;
};

/// Provenance of a decay constant.
struct DecayCertificate {
  SphereGrid grid;
  double safety = 4.0;
  int rounds = 0;
  /// Per-level gain bounds from the sampled recursion constants (entry 0 is ell_1).
  Vector formula_gains;
  /// min over samples of -Vdot / V^{1+alpha}.
  double min_ratio = 0.0;
  /// max over samples of Vdot + C V^{1+alpha}; must be <= 0.
  double max_residual = 0.0;
};

/// Gains of the backstepping cascade, valid uniformly for kappa in [-1/(2n), 1/(2n)].
/// `ell` is synthesized for unit control gain; feedback_gains() applies b_lower.
struct HongGainSet {
  int n = 0;
  Vector ell;
  double b_lower = 1.0;
  double C = 0.0;
  DecayCertificate certificate;

  Vector feedback_gains() const;
};

/// Virtual controls v_1..v_n; u = v_n.
struct HongControl {
  double u = 0.0;
  Vector v;
};

/// The cascade v_j = -ell_j [ [x_j]^{b_{j-1}} - [v_{j-1}]^{b_{j-1}} ]^{r_{j+1}/(r_j b_{j-1})}.
/// Works on a prefix: x may have fewer entries than ell.
template <typename Scalar>
Scalar hong_cascade(const Eigen::Ref<const Vector>& ell, Scalar kappa,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* v_out = nullptr) {
  const auto j_max = x.size();
  Scalar v_prev(0);
  Scalar beta_prev = Scalar(1) + kappa;  // beta_0
  if (v_out) v_out->resize(j_max);
  for (Eigen::Index j = 0; j < j_max; ++j) {
    // level j+1 in chain numbering: r_{j+1} = 1 + j kappa, r_{j+2} = 1 + (j+1) kappa.
    const Scalar r_here = Scalar(1) + Scalar(static_cast<double>(j)) * kappa;
    const Scalar r_next = r_here + kappa;
    const Scalar e = signed_power(x(j), beta_prev) - signed_power(v_prev, beta_prev);
    const Scalar p = r_next / (r_here * beta_prev);
    const Scalar v = -Scalar(ell(j)) * signed_power(e, p);
    if (v_out) (*v_out)(j) = v;
    v_prev = v;
    beta_prev = (Scalar(2) + kappa) / r_next - Scalar(1);
  }
  return v_prev;
}

HongControl hong_control(const Vector& ell, double kappa, const Vector& x);
HongControl hong_control(const HongGainSet& g, double kappa, const Vector& x);

struct LyapunovValue {
  double V = 0.0;
  Vector grad;
};

/// V_kappa = sum_j W_j, W_j = int_{v_{j-1}}^{x_j} ([s]^{b_{j-1}} - [v_{j-1}]^{b_{j-1}}) ds.
/// The gradient is analytic; factors undefined on the kinks are taken as 0.
LyapunovValue hong_lyapunov(const Vector& ell, double kappa, const Vector& x);
LyapunovValue hong_lyapunov(const HongGainSet& g, double kappa, const Vector& x);

/// Value only.
double hong_value(const Vector& ell, double kappa, const Vector& x);

/// dV/dt along x' = J x + u e_n with u supplied by the caller.
double lyapunov_rate(const LyapunovValue& lv, const Vector& x, double u);

/// dV/dt along the closed loop u = omega_kappa(x) with unit control gain.
double closed_loop_rate(const Vector& ell, double kappa, const Vector& x);

struct DecayReport {
  double C = 0.0;
  double worst_kappa = 0.0;
  Vector worst_x;
  std::size_t samples = 0;
  bool pass() const { return C > 0.0; }
};

/// min over kappa-grid x sphere samples of -Vdot / V^{1+alpha(kappa)}.
DecayReport verify_decay(const Vector& ell, const SphereGrid& grid);
DecayReport verify_decay(const HongGainSet& g, const SphereGrid& grid);

/// max over the same samples of Vdot + C V^{1+alpha}.
double decay_residual(const Vector& ell, double C, const SphereGrid& grid);

struct HongSynthesisConfig {
  SphereGrid grid;
  double safety = 4.0;
  int max_rounds = 20;
  /// Stored decay constant = margin * (sampled minimum ratio).
  double margin = 0.9;
};

class HongSynthesisError : public std::runtime_error {
 public:
  HongSynthesisError(const std::string& what, double kappa, Vector worst)
      : std::runtime_error(what), worst_kappa(kappa), worst_x(std::move(worst)) {}
  double worst_kappa;
  Vector worst_x;
};

HongGainSet synthesize_hong_gains(int n, const HongSynthesisConfig& config = {});

/// Matrix P with V_0(x) = x^T P x (kappa = 0, where the cascade is linear).
Matrix quadratic_form(const Vector& ell);

/// Closed-loop matrix of the kappa = 0 cascade: x' = L x.
Matrix linear_closed_loop(const Vector& ell);

}  // namespace ptstab
