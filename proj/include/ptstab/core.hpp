#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ptstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Plant data for x' = J_n x + (d + b u) e_n.
struct ChainSpec {
  int n = 1;
  double T = 1.0;
  double b_lower = 1.0;
  double b_upper = 1.0;  // may be +inf
  double d_bound = 0.0;

  void validate() const;
};

enum class WeightConvention { Pnf, Hong };

/// Homogeneity weights r together with the rule that produced them.
struct WeightVector {
  Vector r;
  WeightConvention convention = WeightConvention::Pnf;
  double kappa = 0.0;  // only meaningful for Hong

  int size() const { return static_cast<int>(r.size()); }

  /// r_i = n - i + 1.
  static WeightVector pnf(int n);
  /// r_j = 1 + (j - 1) kappa, kappa in [-1/(2n), 1/(2n)].
  static WeightVector hong(int n, double kappa);
};

/// Largest admissible |kappa| for an n-th order chain.
inline double kappa_limit(int n) { return 1.0 / (2.0 * n); }

/// Throws DomainError unless kappa lies in [-1/(2n), 1/(2n)].
void check_kappa(int n, double kappa);

/// sign(x) |x|^alpha.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar alpha) {
  using std::abs;
  using std::pow;
  if (!(alpha > Scalar(0))) throw DomainError("signed_power: exponent must be positive");
  if (x == Scalar(0)) return Scalar(0);
  const Scalar m = pow(abs(x), alpha);
  return x < Scalar(0) ? -m : m;
}

/// |x|^q for a possibly negative q, with the convention 0^q = 0. Used for
/// derivative factors that are only defined almost everywhere.
template <typename Scalar>
Scalar abs_power_ae(Scalar x, Scalar q) {
  using std::abs;
  using std::pow;
  if (x == Scalar(0)) return q == Scalar(0) ? Scalar(1) : Scalar(0);
  return pow(abs(x), q);
}

/// diag(lambda^{r_i}).
Matrix dilation_matrix(const WeightVector& w, double lambda);

/// Component-wise lambda^{r_i} x_i.
template <typename Derived>
Vector dilate(const WeightVector& w, double lambda, const Eigen::MatrixBase<Derived>& x) {
  if (!(lambda > 0.0)) throw DomainError("dilate: lambda must be positive");
  if (x.size() != w.r.size()) throw std::invalid_argument("dilate: dimension mismatch");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = std::pow(lambda, w.r(i)) * x(i);
  return out;
}

/// n-th Jordan block: J e_i = e_{i-1}, ones on the superdiagonal.
Matrix jordan_block(int n);

/// Canonical basis vector e_i (1-based, as in the chain notation).
Vector basis(int n, int i);

/// Points x in R^j with sum_i |x_i|^{2/r_i(kappa)} = 1, N per grid value of
/// kappa, where r_i(kappa) = 1 + (i - 1) kappa. `n` is the full chain order
/// and fixes the admissible kappa range.
std::vector<Vector> sample_sphere(int j, int n, const std::vector<double>& kappa_grid, int N,
                                  std::uint64_t seed);

/// Same sampling, but each returned point is paired with the kappa it
/// belongs to.
struct SpherePoint {
  double kappa;
  Vector x;
};
std::vector<SpherePoint> sample_sphere_tagged(int j, int n, const std::vector<double>& kappa_grid,
                                              int N, std::uint64_t seed);

/// Radial (dilation) projection of x != 0 onto the kappa-sphere.
Vector project_to_sphere(const Vector& x, double kappa);

/// sum_i |x_i|^{2/r_i(kappa)} - 1.
double sphere_residual(const Vector& x, double kappa);

/// `count` evenly spaced values covering [-1/(2n), 1/(2n)] inclusive.
std::vector<double> kappa_grid(int n, int count = 11);

/// Symmetric eigenvalues in ascending order.
Vector symmetric_eigenvalues(const Matrix& m);

}  // namespace ptstab
