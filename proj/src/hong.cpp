#include "ptstab/hong.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace ptstab {

BetaExponents beta_exponents(int n, double kappa) {
  if (n < 1) throw DomainError("beta_exponents: n must be >= 1");
  check_kappa(n, kappa);
  BetaExponents b;
  b.kappa = kappa;
  b.beta.resize(n);
  b.beta(0) = 1.0 + kappa;
  for (int j = 1; j < n; ++j) b.beta(j) = (2.0 + kappa) / (1.0 + j * kappa) - 1.0;
  return b;
}

SphereGrid SphereGrid::refined(double scale) const {
  if (!(scale > 0.0)) throw DomainError("SphereGrid::refined: scale must be positive");
  SphereGrid g = *this;
  g.samples_per_kappa = std::max(1, static_cast<int>(std::lround(samples_per_kappa * scale)));
  return g;
}

Vector HongGainSet::feedback_gains() const {
  Vector e = ell;
  e(n - 1) /= b_lower;
  return e;
}

HongControl hong_control(const Vector& ell, double kappa, const Vector& x) {
  if (x.size() > ell.size()) throw std::invalid_argument("hong_control: dimension mismatch");
  HongControl c;
  c.u = hong_cascade<double>(ell, kappa, x, &c.v);
  return c;
}

HongControl hong_control(const HongGainSet& g, double kappa, const Vector& x) {
  check_kappa(g.n, kappa);
  return hong_control(g.ell, kappa, x);
}

namespace {

/// Everything the cascade produces on a prefix x^{(j)}.
struct CascadeLevels {
  Vector v;         // v_1..v_j
  Vector e;         // e_1..e_j
  Vector beta;      // beta_0..beta_{j-1}
  Vector p;         // exponents of e_j in v_j
  Vector W;         // W_1..W_j
  Matrix W_grad;    // column k: gradient of W_{k+1} in R^j
  Matrix h;         // column k: |v_{k+1}|^{beta_{k+1}-1} grad v_{k+1}
};

CascadeLevels evaluate_levels(const Vector& ell, double kappa, const Vector& x) {
  const auto j_max = x.size();
  CascadeLevels L;
  L.v.resize(j_max);
  L.e.resize(j_max);
  L.beta.resize(j_max);
  L.p.resize(j_max);
  L.W.resize(j_max);
  L.W_grad = Matrix::Zero(j_max, j_max);
  L.h = Matrix::Zero(j_max, j_max);

  double v_prev = 0.0;
  double beta = 1.0 + kappa;
  Vector h_prev = Vector::Zero(j_max);
  for (Eigen::Index j = 0; j < j_max; ++j) {
    const double r_here = 1.0 + j * kappa;
    const double r_next = r_here + kappa;
    const double p = r_next / (r_here * beta);
    const double xj = x(j);
    const double e = signed_power(xj, beta) - signed_power(v_prev, beta);
    const double v = -ell(j) * signed_power(e, p);

    L.beta(j) = beta;
    L.p(j) = p;
    L.e(j) = e;
    L.v(j) = v;
    L.W(j) = (std::pow(std::abs(xj), beta + 1.0) - std::pow(std::abs(v_prev), beta + 1.0)) /
                 (beta + 1.0) -
             signed_power(v_prev, beta) * (xj - v_prev);

    Vector gw = -beta * (xj - v_prev) * h_prev;
    gw(j) += e;
    L.W_grad.col(j) = gw;

    Vector g = -beta * h_prev;
    g(j) += beta * abs_power_ae(xj, beta - 1.0);
    const double beta_next = (2.0 + kappa) / r_next - 1.0;
    const Vector h = -std::pow(ell(j), beta_next) * p * abs_power_ae(e, p * beta_next - 1.0) * g;
    L.h.col(j) = h;

    h_prev = h;
    v_prev = v;
    beta = beta_next;
  }
  return L;
}

}  // namespace

LyapunovValue hong_lyapunov(const Vector& ell, double kappa, const Vector& x) {
  if (x.size() > ell.size()) throw std::invalid_argument("hong_lyapunov: dimension mismatch");
  const auto L = evaluate_levels(ell, kappa, x);
  return {L.W.sum(), L.W_grad.rowwise().sum()};
}

LyapunovValue hong_lyapunov(const HongGainSet& g, double kappa, const Vector& x) {
  check_kappa(g.n, kappa);
  return hong_lyapunov(g.ell, kappa, x);
}

double hong_value(const Vector& ell, double kappa, const Vector& x) {
  double V = 0.0;
  double v_prev = 0.0;
  double beta = 1.0 + kappa;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double r_here = 1.0 + j * kappa;
    const double r_next = r_here + kappa;
    const double xj = x(j);
    V += (std::pow(std::abs(xj), beta + 1.0) - std::pow(std::abs(v_prev), beta + 1.0)) /
             (beta + 1.0) -
         signed_power(v_prev, beta) * (xj - v_prev);
    const double e = signed_power(xj, beta) - signed_power(v_prev, beta);
    v_prev = -ell(j) * signed_power(e, r_next / (r_here * beta));
    beta = (2.0 + kappa) / r_next - 1.0;
  }
  return V;
}

double lyapunov_rate(const LyapunovValue& lv, const Vector& x, double u) {
  const auto n = x.size();
  double rate = lv.grad(n - 1) * u;
  for (Eigen::Index i = 0; i + 1 < n; ++i) rate += lv.grad(i) * x(i + 1);
  return rate;
}

double closed_loop_rate(const Vector& ell, double kappa, const Vector& x) {
  const auto L = evaluate_levels(ell, kappa, x);
  const Vector grad = L.W_grad.rowwise().sum();
  const auto n = x.size();
  double rate = grad(n - 1) * L.v(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) rate += grad(i) * x(i + 1);
  return rate;
}

namespace {

struct RatioScan {
  double min_ratio = std::numeric_limits<double>::infinity();
  double worst_kappa = 0.0;
  Vector worst_x;
  std::size_t count = 0;
};

double decay_ratio(const Vector& ell, double kappa, const Vector& x) {
  const double V = hong_value(ell, kappa, x);
  return -closed_loop_rate(ell, kappa, x) / std::pow(V, 1.0 + decay_exponent(kappa));
}

/// Randomized pattern search on the kappa-sphere starting from a sample.
SpherePoint polish_minimum(const Vector& ell, SpherePoint start, double& value,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = start.x.size();
  const int tries = 4 * static_cast<int>(n);
  for (double step = 0.05; step > 1e-7;) {
    bool improved = false;
    for (int k = 0; k < tries; ++k) {
      Vector dir(n);
      for (Eigen::Index i = 0; i < n; ++i) dir(i) = normal(rng);
      const Vector cand = project_to_sphere(start.x + step * dir / dir.norm(), start.kappa);
      const double r = decay_ratio(ell, start.kappa, cand);
      if (r < value) {
        value = r;
        start.x = cand;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return start;
}

RatioScan scan_ratios(const Vector& ell, const std::vector<SpherePoint>& pts, std::uint64_t seed) {
  constexpr std::size_t kPolished = 8;
  RatioScan s;
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double ratio = decay_ratio(ell, pts[i].kappa, pts[i].x);
    ++s.count;
    // NaN sorts first so that it is reported.
    ranked.emplace_back(std::isnan(ratio) ? -std::numeric_limits<double>::infinity() : ratio, i);
  }
  const std::size_t keep = std::min(kPolished, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  for (std::size_t k = 0; k < keep; ++k) {
    double value = ranked[k].first;
    SpherePoint best = pts[ranked[k].second];
    if (std::isfinite(value)) best = polish_minimum(ell, best, value, rng);
    if (!(value >= s.min_ratio)) {
      s.min_ratio = value;
      s.worst_kappa = best.kappa;
      s.worst_x = best.x;
    }
  }
  return s;
}

RatioScan scan_ratios(const Vector& ell, const SphereGrid& grid) {
  const int n = static_cast<int>(ell.size());
  return scan_ratios(ell,
                     sample_sphere_tagged(n, n, kappa_grid(n, grid.kappa_count),
                                          grid.samples_per_kappa, grid.seed),
                     grid.seed);
}

}  // namespace

DecayReport verify_decay(const Vector& ell, const SphereGrid& grid) {
  const auto s = scan_ratios(ell, grid);
  DecayReport r;
  r.C = std::isfinite(s.min_ratio) ? s.min_ratio : -std::numeric_limits<double>::infinity();
  r.worst_kappa = s.worst_kappa;
  r.worst_x = s.worst_x;
  r.samples = s.count;
  return r;
}

DecayReport verify_decay(const HongGainSet& g, const SphereGrid& grid) {
  return verify_decay(g.ell, grid);
}

double decay_residual(const Vector& ell, double C, const SphereGrid& grid) {
  const int n = static_cast<int>(ell.size());
  const auto pts = sample_sphere_tagged(n, n, kappa_grid(n, grid.kappa_count),
                                        grid.samples_per_kappa, grid.seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) {
    const double V = hong_value(ell, pt.kappa, pt.x);
    const double rate = closed_loop_rate(ell, pt.kappa, pt.x);
    worst = std::max(worst, rate + C * std::pow(V, 1.0 + decay_exponent(pt.kappa)));
  }
  return worst;
}

namespace {

/// Samples on the j-dimensional spheres used at level j of the induction.
std::vector<SpherePoint> level_samples(int j, int n, const SphereGrid& grid,
                                       std::uint64_t salt = 0) {
  return sample_sphere_tagged(j, n, kappa_grid(n, grid.kappa_count), grid.samples_per_kappa,
                              grid.seed + static_cast<std::uint64_t>(j) * 7919u + salt);
}

/// min over S^j of -dV_j/dt / V_j^{1+alpha} along the j-th sub-chain closed by v_j.
double level_ratio_min(const Vector& ell, int j, const std::vector<SpherePoint>& pts,
                       std::uint64_t seed) {
  return scan_ratios(ell.head(j), pts, seed).min_ratio;
}

/// Gain lower bound for level j >= 2 from sampled K_j, L_j, M_j.
double level_gain_bound(const Vector& ell, int j, int n, const std::vector<SpherePoint>& pts,
                        double safety) {
  Vector ell_j = ell.head(j);
  ell_j(j - 1) = 1.0;  // v_j's gain does not enter K, L, M
  double K = 0.0;
  double Lc = 0.0;
  double M = std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) {
    const auto lv = evaluate_levels(ell_j, pt.kappa, pt.x);
    const double agap = std::abs(pt.x(j - 1) - lv.v(j - 2));
    K = std::max(K, std::abs(lv.e(j - 2)));
    if (agap < 1e-8) continue;
    const double beta_prev = lv.beta(j - 1);
    const double beta_t = std::min(1.0, beta_prev);
    double cross = 0.0;
    for (int i = 0; i + 1 < j; ++i) cross += lv.W_grad(i, j - 1) * pt.x(i + 1);
    Lc = std::max(Lc, std::abs(cross) / std::pow(agap, beta_t));
    const double r_j = 1.0 + (j - 1) * pt.kappa;
    const double Z = std::pow(std::abs(lv.e(j - 1)), 1.0 + lv.p(j - 1));
    M = std::min(M, Z / std::pow(agap, 2.0 * (1.0 + pt.kappa) / (r_j * beta_t)));
  }
  K *= safety;
  Lc *= safety;
  M /= safety;
  if (!(M > 0.0) || !std::isfinite(M)) return std::numeric_limits<double>::quiet_NaN();

  double bound = 0.0;
  for (double kappa : kappa_grid(n, 11)) {
    const double beta_prev = (2.0 + kappa) / (1.0 + (j - 1) * kappa) - 1.0;
    const double beta_t = std::min(1.0, beta_prev);
    const double r_j = 1.0 + (j - 1) * kappa;
    const double xi = std::pow(ell(0) / ((K + Lc) * std::ldexp(1.0, j - 1)), 1.0 / beta_t);
    const double q = 2.0 * (1.0 + kappa) / (r_j * beta_t) - 1.0 / beta_t;
    bound = std::max(bound, (K + Lc) / (M * std::pow(xi, q)));
  }
  return bound;
}

}  // namespace

HongGainSet synthesize_hong_gains(int n, const HongSynthesisConfig& config) {
  if (n < 1) throw DomainError("synthesize_hong_gains: n must be >= 1");
  if (!(config.safety >= 2.0)) throw DomainError("synthesize_hong_gains: safety factor must be >= 2");
  if (config.grid.samples_per_kappa < 1 || config.grid.kappa_count < 1) {
    throw DomainError("synthesize_hong_gains: empty grid");
  }

  HongGainSet g;
  g.n = n;
  g.ell = Vector::Ones(n);
  g.certificate.formula_gains = Vector::Ones(n);
  int rounds = 0;
  for (int j = 2; j <= n; ++j) {
    const auto pts = level_samples(j, n, config.grid);
    const double bound = level_gain_bound(g.ell, j, n, pts, config.safety);
    g.certificate.formula_gains(j - 1) = bound;
    // Scale-free form of the induction target: the normalized decay rate of V_j on
    // S^j must stay above ell_1 / 2^{j-1} on the grid and on an independent 10x denser
    // probe (each sampled minimum is polished by a local search). Gains grow by
    // doubling from 1; the sampled bound caps the search.
    const auto probe = level_samples(j, n, config.grid.refined(10.0), 0x9e3779b9u);
    const double target = g.ell(0) / std::ldexp(1.0, j - 1);
    auto accepted = [&] {
      const double a = level_ratio_min(g.ell, j, pts, config.grid.seed);
      if (!(a >= target)) return false;
      const double b = level_ratio_min(g.ell, j, probe, config.grid.seed + 1);
      return a >= target && b >= target;
    };
    g.ell(j - 1) = 1.0;
    int level_rounds = 0;
    while (!accepted()) {
      if (std::isfinite(bound) && g.ell(j - 1) >= bound) break;
      if (++level_rounds > config.max_rounds) {
        const auto rep = verify_decay(g.ell.head(j), config.grid);
        std::ostringstream os;
        os << "synthesize_hong_gains: level " << j << " still failing after " << config.max_rounds
           << " doubling rounds";
        throw HongSynthesisError(os.str(), rep.worst_kappa, rep.worst_x);
      }
      g.ell(j - 1) *= 2.0;
      if (std::isfinite(bound)) g.ell(j - 1) = std::min(g.ell(j - 1), std::max(bound, 1.0));
    }
    rounds += level_rounds;
  }

  const auto s = scan_ratios(g.ell, config.grid);
  if (!(s.min_ratio > 0.0)) {
    throw HongSynthesisError("synthesize_hong_gains: decay inequality fails on the sample grid",
                             s.worst_kappa, s.worst_x);
  }
  g.C = config.margin * s.min_ratio;
  g.certificate.grid = config.grid;
  g.certificate.safety = config.safety;
  g.certificate.rounds = rounds;
  g.certificate.min_ratio = s.min_ratio;
  g.certificate.max_residual = decay_residual(g.ell, g.C, config.grid);
  return g;
}

Matrix quadratic_form(const Vector& ell) {
  const auto n = ell.size();
  // V_0 is an exact quadratic form; recover it by polarization.
  Matrix P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector ei = Vector::Zero(n);
    ei(i) = 1.0;
    P(i, i) = hong_value(ell, 0.0, ei);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      Vector s = Vector::Zero(n);
      s(i) = 1.0;
      s(k) = 1.0;
      P(i, k) = P(k, i) = 0.5 * (hong_value(ell, 0.0, s) - P(i, i) - P(k, k));
    }
  }
  return P;
}

Matrix linear_closed_loop(const Vector& ell) {
  const auto n = ell.size();
  Matrix L = jordan_block(static_cast<int>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector ei = Vector::Zero(n);
    ei(i) = 1.0;
    L(n - 1, i) = hong_control(ell, 0.0, ei).u;
  }
  return L;
}

}  // namespace ptstab
