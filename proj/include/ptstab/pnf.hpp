#pragma once

#include "ptstab/core.hpp"
#include "ptstab/timescale.hpp"

namespace ptstab {

/// Robust linear gain: (J - b e_n K^T)^T S + S (J - b e_n K^T) <= -rho I for b >= b_lower.
/// C0 and rho0 are filled by certify_perturbation().
struct LinearGain {
  int n = 0;
  Vector K;
  Matrix S;
  double rho = 0.0;
  double b_lower = 1.0;
  double C0 = 0.0;
  double rho0 = 0.0;
};

/// Tolerance used by every semidefiniteness test in this module.
inline constexpr double kLmiTol = 1e-9;

struct LmiReport {
  bool pass = false;
  /// max eig of L(b_lower) + rho I, must be <= kLmiTol.
  double endpoint_max_eig = 0.0;
  /// min eig of the slope matrix N = (e_n K^T)^T S + S e_n K^T, must be >= -kLmiTol.
  double slope_min_eig = 0.0;
};

/// Upper-triangular Toeplitz matrix sum_i k_i J^{i-1}. It commutes with J,
/// M^T e_1 = K and M e_n = (k_n, ..., k_1).
Matrix companion_lift(const Vector& K);

/// X solving A^T X + X A = -Q (Kronecker linear solve).
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Coefficients (c_1..c_m) of prod_{i=1}^m (s + i) = s^m + c_1 s^{m-1} + ... + c_m.
Vector integer_pole_polynomial(int m);

/// (a D_r + J - b e_n K^T)^T S + S (a D_r + J - b e_n K^T), D_r = diag(n - i + 1).
Matrix lmi_matrix(const LinearGain& g, double b, double a = 0.0);

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LinearGain synthesize_linear_gain(int n, double b_lower);

LmiReport verify_lmi(const LinearGain& g);

struct PerturbationCertificate {
  double C0 = 0.0;
  double rho0 = 0.0;
};

/// Largest C0 (relative tolerance 1e-3) keeping the LMI valid with margin
/// rho/2 for every a in [-C0, C0].
PerturbationCertificate certify_perturbation(const LinearGain& g);

/// Convenience: synthesize then certify.
LinearGain synthesize_certified_gain(int n, double b_lower);

/// Smallest eta for which |a/eta| <= C0 over the time scale, clamped to >= 1.
double minimal_eta(const LinearGain& g, const TimeScale& ts);

/// u = -K^T D^r_{eta lambda(t)} x.
double pnf_feedback(const LinearGain& g, const TimeScale& ts, double eta, double t, const Vector& x);

/// Constants of the Lyapunov integration for V(z) = z^T S z:
/// |z(xi)| <= c_init exp(-mu xi) |z(0)| + c_dist sup|d|.
struct EnvelopeConstants {
  double c_init = 0.0;
  double c_dist = 0.0;
  double mu = 0.0;
};
EnvelopeConstants envelope_constants(const LinearGain& g);

/// Per-coordinate bound on |x_i(t)| for the closed loop with matched |d| <= d_sup.
Vector convergence_envelope(const LinearGain& g, const TimeScale& ts, double eta, double x0_norm,
                            double d_sup, double t);

/// Same bound when the controller reads x + d1 with |d1| <= d1_sup; b_upper
/// bounds the control gain multiplying the injected noise.
Vector noise_envelope(const LinearGain& g, const TimeScale& ts, double eta, double x0_norm,
                      double d1_sup, double t, double b_upper = 1.0, double d_sup = 0.0);

}  // namespace ptstab
