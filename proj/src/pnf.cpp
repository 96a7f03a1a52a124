#include "ptstab/pnf.hpp"

#include <algorithm>

namespace ptstab {

namespace {

Matrix pnf_degree_matrix(int n) { return WeightVector::pnf(n).r.asDiagonal(); }

double max_eig(const Matrix& m) { return symmetric_eigenvalues(0.5 * (m + m.transpose())).maxCoeff(); }
double min_eig(const Matrix& m) { return symmetric_eigenvalues(0.5 * (m + m.transpose())).minCoeff(); }

}  // namespace

Matrix companion_lift(const Vector& K) {
  const auto n = K.size();
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) m(i, j) = K(j - i);
  return m;
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  const auto n = A.rows();
  const Matrix At = A.transpose();
  Matrix big = Matrix::Zero(n * n, n * n);
  // vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X.
  for (Eigen::Index b = 0; b < n; ++b) {
    big.block(b * n, b * n, n, n) += At;
    for (Eigen::Index c = 0; c < n; ++c) big.block(b * n, c * n, n, n).diagonal().array() += At(b, c);
  }
  const Vector rhs = -Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector sol = big.fullPivLu().solve(rhs);
  Matrix X = Eigen::Map<const Matrix>(sol.data(), n, n);
  return 0.5 * (X + X.transpose());
}

Vector integer_pole_polynomial(int m) {
  // Coefficients in descending powers, starting from the monic polynomial 1.
  std::vector<double> p{1.0};
  for (int root = 1; root <= m; ++root) {
    std::vector<double> q(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      q[k] += p[k];
      q[k + 1] += root * p[k];
    }
    p = std::move(q);
  }
  Vector c(m);
  for (int i = 0; i < m; ++i) c(i) = p[i + 1];
  return c;
}

Matrix lmi_matrix(const LinearGain& g, double b, double a) {
  const int n = g.n;
  const Matrix closed = a * pnf_degree_matrix(n) + jordan_block(n) - b * basis(n, n) * g.K.transpose();
  return closed.transpose() * g.S + g.S * closed;
}

LinearGain synthesize_linear_gain(int n, double b_lower) {
  if (n < 1) throw DomainError("synthesize_linear_gain: n must be >= 1");
  if (!(b_lower > 0.0)) throw DomainError("synthesize_linear_gain: b_lower must be positive");

  LinearGain g;
  g.n = n;
  g.b_lower = b_lower;
  if (n == 1) {
    g.K = Vector::Constant(1, 1.0 / b_lower);
    g.S = Matrix::Constant(1, 1, 0.5);
    g.rho = 1.0;
    return g;
  }

  // Output-injection gain Omega placing spec(J_{n-1} + Omega e_1^T) at {-1, ..., -(n-1)}.
  const int m = n - 1;
  const Vector omega = -integer_pole_polynomial(m);
  Matrix H = jordan_block(m);
  H.col(0) += omega;
  const Matrix S_tail = solve_lyapunov(H, Matrix::Identity(m, m));
  Matrix S_block = Matrix::Zero(n, n);
  S_block(0, 0) = 1.0;
  S_block.bottomRightCorner(m, m) = S_tail;

  // Transformed closed loop A_Omega (J - b G e_1^T) A_Omega^{-1}; only the
  // (1,1) entry depends on b.
  Matrix B = Matrix::Zero(n, n);
  B.block(0, 1, 1, m) = basis(m, 1).transpose();
  B.block(1, 0, m, 1) = -H * omega;
  B.bottomRightCorner(m, m) = H;
  auto block_margin = [&](double k1) {
    Matrix Bb = B;
    Bb(0, 0) = -(b_lower * k1 + omega(0));
    return max_eig(Bb.transpose() * S_block + S_block * Bb);
  };

  double k1 = 1.0 / b_lower;
  const double cap = std::ldexp(1.0 / b_lower, 40);
  while (block_margin(k1) > -0.5) {
    k1 *= 2.0;
    if (k1 > cap) throw SynthesisError("synthesize_linear_gain: k1 doubling exceeded 2^40");
  }

  // e_1-form gain G = (k1, -k1 Omega); original gain K is its reversal.
  Vector G(n);
  G(0) = k1;
  G.tail(m) = -k1 * omega;
  g.K = G.reverse();

  Matrix A_omega = Matrix::Identity(n, n);
  A_omega.block(1, 0, m, 1) = omega;
  const Matrix S1 = A_omega.transpose() * S_block * A_omega;
  const Matrix M = companion_lift(g.K);
  Matrix S = M.transpose() * S1 * M;
  S = 0.5 * (S + S.transpose());
  // The certificate is invariant under positive scaling of (S, rho).
  S /= symmetric_eigenvalues(S).maxCoeff();
  g.S = S;
  g.rho = -max_eig(lmi_matrix(g, b_lower));
  if (!(g.rho > 0.0)) throw SynthesisError("synthesize_linear_gain: no positive margin");
  return g;
}

LmiReport verify_lmi(const LinearGain& g) {
  LmiReport rep;
  const int n = g.n;
  const Matrix endpoint = lmi_matrix(g, g.b_lower) + g.rho * Matrix::Identity(n, n);
  const Matrix slope_vec = basis(n, n) * g.K.transpose();
  const Matrix slope = slope_vec.transpose() * g.S + g.S * slope_vec;
  rep.endpoint_max_eig = max_eig(endpoint);
  rep.slope_min_eig = min_eig(slope);
  const bool spd = min_eig(g.S) > 0.0;
  rep.pass = spd && rep.endpoint_max_eig <= kLmiTol && rep.slope_min_eig >= -kLmiTol;
  return rep;
}

PerturbationCertificate certify_perturbation(const LinearGain& g) {
  PerturbationCertificate cert;
  cert.rho0 = 0.5 * g.rho;
  const int n = g.n;
  const Matrix base = lmi_matrix(g, g.b_lower) + cert.rho0 * Matrix::Identity(n, n);
  const Matrix D = pnf_degree_matrix(n);
  const Matrix P = D * g.S + g.S * D;
  auto holds = [&](double c) {
    return max_eig(base + c * P) <= kLmiTol && max_eig(base - c * P) <= kLmiTol;
  };
  if (!holds(0.0) || !verify_lmi(g).pass) return cert;

  double lo = 0.0;
  double hi = 1.0;
  while (holds(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      cert.C0 = lo;
      return cert;
    }
  }
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  cert.C0 = lo;
  return cert;
}

LinearGain synthesize_certified_gain(int n, double b_lower) {
  LinearGain g = synthesize_linear_gain(n, b_lower);
  const auto cert = certify_perturbation(g);
  g.C0 = cert.C0;
  g.rho0 = cert.rho0;
  return g;
}

double minimal_eta(const LinearGain& g, const TimeScale& ts) {
  if (!(g.C0 > 0.0)) throw DomainError("minimal_eta: gain has no perturbation certificate");
  return std::max(1.0, ts.sup_a() / g.C0);
}

double pnf_feedback(const LinearGain& g, const TimeScale& ts, double eta, double t, const Vector& x) {
  return -g.K.dot(x_to_y(ts, WeightVector::pnf(g.n), eta, t, x));
}

EnvelopeConstants envelope_constants(const LinearGain& g) {
  if (!(g.rho0 > 0.0)) throw DomainError("envelope_constants: gain has no perturbation certificate");
  const Vector ev = symmetric_eigenvalues(g.S);
  const double lmin = ev.minCoeff();
  const double lmax = ev.maxCoeff();
  EnvelopeConstants c;
  c.mu = g.rho0 / (2.0 * lmax);
  c.c_init = std::sqrt(lmax / lmin);
  c.c_dist = (g.S * basis(g.n, g.n)).norm() / (c.mu * lmin);
  return c;
}

namespace {

/// q max(1, q^{n-1}) = max_i q^{r_i} for PNF weights.
double dilation_norm_bound(double q, int n) { return q * std::max(1.0, std::pow(q, n - 1)); }

}  // namespace

Vector convergence_envelope(const LinearGain& g, const TimeScale& ts, double eta, double x0_norm,
                            double d_sup, double t) {
  return noise_envelope(g, ts, eta, x0_norm, 0.0, t, 1.0, d_sup);
}

Vector noise_envelope(const LinearGain& g, const TimeScale& ts, double eta, double x0_norm,
                      double d1_sup, double t, double b_upper, double d_sup) {
  const auto c = envelope_constants(g);
  const int n = g.n;
  const double q0 = eta * ts.lambda(0.0);
  const double q = eta * ts.lambda(t);
  const double z0 = dilation_norm_bound(q0, n) * x0_norm;
  double dist = d_sup;
  if (d1_sup > 0.0) dist += b_upper * g.K.norm() * dilation_norm_bound(q, n) * d1_sup;
  const double z_bound = c.c_init * std::exp(-c.mu * eta * ts.s(t)) * z0 + c.c_dist * dist;
  Vector env(n);
  for (int i = 0; i < n; ++i) env(i) = z_bound / std::pow(q, n - i);
  return env;
}

}  // namespace ptstab
