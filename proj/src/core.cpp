#include "ptstab/core.hpp"

#include <random>
#include <string>

namespace ptstab {

void ChainSpec::validate() const {
  if (n < 1) throw DomainError("ChainSpec: n must be >= 1");
  if (!(T > 0.0)) throw DomainError("ChainSpec: T must be positive");
  if (!(b_lower > 0.0)) throw DomainError("ChainSpec: b_lower must be positive");
  if (!(b_upper >= b_lower)) throw DomainError("ChainSpec: b_upper must be >= b_lower");
  if (!(d_bound >= 0.0)) throw DomainError("ChainSpec: d_bound must be non-negative");
}

WeightVector WeightVector::pnf(int n) {
  if (n < 1) throw DomainError("WeightVector::pnf: n must be >= 1");
  WeightVector w;
  w.r.resize(n);
  for (int i = 0; i < n; ++i) w.r(i) = n - i;
  w.convention = WeightConvention::Pnf;
  return w;
}

WeightVector WeightVector::hong(int n, double kappa) {
  if (n < 1) throw DomainError("WeightVector::hong: n must be >= 1");
  check_kappa(n, kappa);
  WeightVector w;
  w.r.resize(n);
  for (int j = 0; j < n; ++j) w.r(j) = 1.0 + j * kappa;
  w.convention = WeightConvention::Hong;
  w.kappa = kappa;
  return w;
}

void check_kappa(int n, double kappa) {
  // A few ulps of slack so grid endpoints computed as k/(2n) are accepted.
  const double lim = kappa_limit(n) * (1.0 + 1e-12);
  if (!(std::abs(kappa) <= lim)) {
    throw DomainError("kappa " + std::to_string(kappa) + " outside [-1/(2n), 1/(2n)] for n=" +
                      std::to_string(n));
  }
}

Matrix dilation_matrix(const WeightVector& w, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("dilation_matrix: lambda must be positive");
  Vector d(w.r.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(lambda, w.r(i));
  return d.asDiagonal();
}

Matrix jordan_block(int n) {
  Matrix j = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = 1.0;
  return j;
}

Vector basis(int n, int i) {
  if (i < 1 || i > n) throw std::out_of_range("basis: index outside 1..n");
  Vector e = Vector::Zero(n);
  e(i - 1) = 1.0;
  return e;
}

double sphere_residual(const Vector& x, double kappa) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = 1.0 + static_cast<double>(i) * kappa;
    s += std::pow(std::abs(x(i)), 2.0 / r);
  }
  return s - 1.0;
}

Vector project_to_sphere(const Vector& x, double kappa) {
  double mass = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) mass += std::pow(std::abs(x(i)), 2.0 / (1.0 + i * kappa));
  if (!(mass > 0.0)) throw DomainError("project_to_sphere: zero vector");
  const double mu = 1.0 / std::sqrt(mass);
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = std::pow(mu, 1.0 + i * kappa) * x(i);
  return out;
}

std::vector<SpherePoint> sample_sphere_tagged(int j, int n, const std::vector<double>& kappa_grid,
                                              int N, std::uint64_t seed) {
  if (j < 1 || j > n) throw DomainError("sample_sphere: need 1 <= j <= n");
  if (N < 1) throw DomainError("sample_sphere: N must be >= 1");
  for (double k : kappa_grid) check_kappa(n, k);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SpherePoint> out;
  out.reserve(kappa_grid.size() * static_cast<std::size_t>(N));
  Vector g(j);
  for (double kappa : kappa_grid) {
    for (int k = 0; k < N; ++k) {
      double mass = 0.0;
      do {
        for (int i = 0; i < j; ++i) g(i) = normal(rng);
        mass = 0.0;
        for (int i = 0; i < j; ++i) mass += std::pow(std::abs(g(i)), 2.0 / (1.0 + i * kappa));
      } while (!(mass > 0.0));
      // Dilating g by mu scales every term |mu^{r_i} g_i|^{2/r_i} by mu^2, so
      // the root in the dilation parameter is explicit.
      out.push_back({kappa, project_to_sphere(g, kappa)});
    }
  }
  return out;
}

std::vector<Vector> sample_sphere(int j, int n, const std::vector<double>& kappa_grid, int N,
                                  std::uint64_t seed) {
  std::vector<Vector> pts;
  for (auto& p : sample_sphere_tagged(j, n, kappa_grid, N, seed)) pts.push_back(std::move(p.x));
  return pts;
}

std::vector<double> kappa_grid(int n, int count) {
  if (count < 1) throw DomainError("kappa_grid: count must be >= 1");
  const double lim = kappa_limit(n);
  if (count == 1) return {0.0};
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = -lim + 2.0 * lim * i / (count - 1);
  g.front() = -lim;
  g.back() = lim;
  return g;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace ptstab
