#include "ptstab/switching.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <random>

namespace ptstab {

namespace {

double alpha_of(double kappa) { return decay_exponent(kappa); }

/// V_kappa(D^{r(kappa)}_mu x) = mu^{2+kappa} V_kappa(x).
Vector scale_to_level(const Vector& ell, double kappa, const Vector& x, double level) {
  const int n = static_cast<int>(x.size());
  const double V = hong_value(ell, kappa, x);
  const double mu = std::pow(level / V, 1.0 / (2.0 + kappa));
  return dilate(WeightVector::hong(n, kappa), mu, x);
}

/// Positive root of y^{1+b} = (1+b) X^b y + c.
double level_coordinate_bound(double X, double beta, double c) {
  auto f = [&](double y) { return std::pow(y, 1.0 + beta) - (1.0 + beta) * std::pow(X, beta) * y - c; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto [lo, up] =
      boost::math::tools::toms748_solve(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return up;
}

}  // namespace

std::vector<Vector> hong_level_samples(const Vector& ell, double kappa, double level, int N,
                                       std::uint64_t seed) {
  const int n = static_cast<int>(ell.size());
  auto pts = sample_sphere(n, n, {kappa}, N, seed);
  for (auto& x : pts) x = scale_to_level(ell, kappa, x, level);
  return pts;
}

std::vector<Vector> hong_band_samples(const Vector& ell, double kappa, double lo, double hi, int N,
                                      std::uint64_t seed) {
  const int n = static_cast<int>(ell.size());
  auto pts = sample_sphere(n, n, {kappa}, N, seed);
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5u);
  std::uniform_real_distribution<double> level(lo, hi);
  for (auto& x : pts) x = scale_to_level(ell, kappa, x, level(rng));
  return pts;
}

ExplicitConstants explicit_constants(const HongGainSet& g, double m, double b_upper,
                                     const SwitchSampling& sampling) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("explicit_constants: m must lie in (0, 1)");
  if (!(b_upper >= g.b_lower)) throw DomainError("explicit_constants: b_upper must be >= b_lower");
  const int n = g.n;
  ExplicitConstants ec;
  ec.m = m;

  // Coordinate bound, level by level.
  for (double kappa : kappa_grid(n)) {
    const auto be = beta_exponents(n, kappa);
    double beta = be.beta(0);
    double xb = std::pow((1.0 + beta) * (1.0 + m), 1.0 / (1.0 + beta));
    double vb = g.ell(0) * std::pow(xb, 1.0 + kappa);
    double X = std::max(xb, vb);
    for (int j = 2; j <= n; ++j) {
      beta = be.beta(j - 1);
      const double c = (2.0 + beta) * std::pow(X, 1.0 + beta) + (1.0 + beta) * (1.0 + m);
      xb = level_coordinate_bound(X, beta, c);
      const double r_here = 1.0 + (j - 1) * kappa;
      const double p = (r_here + kappa) / (r_here * beta);
      vb = g.ell(j - 1) * std::pow(std::pow(xb, beta) + std::pow(X, beta), p);
      X = std::max({X, xb, vb});
    }
    ec.X_n = std::max(ec.X_n, 1.1 * X);
  }

  // Differences to kappa = 0 on the bands.
  const auto grid = kappa_grid(n);
  const int per = std::max(1, sampling.samples / static_cast<int>(grid.size() - 1));
  std::uint64_t salt = 0;
  for (double kappa : grid) {
    ++salt;
    if (kappa == 0.0) continue;
    const double expo = std::min(1.0, 1.0 + (n - 1) * kappa);
    const double scale = std::pow(std::abs(kappa), expo);
    for (const auto& x : hong_band_samples(g.ell, kappa, 1.0 - m, 1.0 + m, per, sampling.seed + salt)) {
      const double dw = std::abs(hong_control(g.ell, kappa, x).u - hong_control(g.ell, 0.0, x).u);
      const double dv = std::abs(hong_value(g.ell, kappa, x) - hong_value(g.ell, 0.0, x));
      ec.C1 = std::max(ec.C1, dw / scale);
      ec.C2 = std::max(ec.C2, dv / scale);
    }
  }
  ec.C1 *= 2.0;
  ec.C2 *= 2.0;

  const double V0_en = hong_value(g.ell, 0.0, basis(n, n));
  const double base = g.C * (1.0 - m) / (4.0 * std::sqrt(1.0 + m) * std::sqrt(V0_en) * ec.C1 * b_upper);
  ec.kappa0_of_m = std::min(std::pow(base, 2.0 * n / (n + 1.0)), 0.999 * kappa_limit(n));
  return ec;
}

double settling_bound(double C, double m, double kappa0, double r_plus, double r_minus) {
  const double ap = alpha_of(kappa0);
  const double am = alpha_of(-kappa0);
  return (std::pow(r_plus, -ap) / ap + 2.0 * std::log((1.0 + m) / (1.0 - m)) +
          std::pow(r_minus, -am) / (-am)) /
         C;
}

double settling_bound(const HongGainSet& g, const SwitchParams& sp) {
  return settling_bound(g.C, sp.m, sp.kappa0, sp.r_plus, sp.r_minus);
}

double settling_bound_as_printed(double C, double m, double kappa0, double r_plus, double r_minus) {
  const double ap = alpha_of(kappa0);
  const double am = alpha_of(-kappa0);
  return (std::pow(r_plus, -ap) / ap - 2.0 * std::log(2.0 * m) + std::pow(r_minus, -am) / (-am)) / C;
}

SwitchParams build_switch_params(const HongGainSet& g, double m, double kappa0, double b_upper,
                                 const SwitchSampling& sampling) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("build_switch_params: m must lie in (0, 1)");
  if (!(g.C > 0.0)) throw DomainError("build_switch_params: gain set has no decay constant");
  const int n = g.n;
  if (!std::isfinite(b_upper)) b_upper = g.b_lower;
  SwitchParams sp;
  sp.m = m;
  sp.C = g.C;
  sp.b_upper = b_upper;
  sp.P = quadratic_form(g.ell);
  if (!(kappa0 > 0.0)) kappa0 = explicit_constants(g, m, b_upper, sampling).kappa0_of_m;
  if (!(kappa0 > 0.0 && kappa0 < kappa_limit(n))) {
    throw DomainError("build_switch_params: kappa0 must lie in (0, 1/(2n))");
  }
  sp.kappa0 = kappa0;

  // V_0 is quadratic, so its level sets are scaled Euclidean spheres.
  auto v0_level = [&](double level, std::uint64_t seed) {
    auto pts = sample_sphere(n, n, {0.0}, sampling.samples, seed);
    for (auto& x : pts) x *= std::sqrt(level / sp.V0(x));
    return pts;
  };
  double rp = std::numeric_limits<double>::infinity();
  for (const auto& x : v0_level(1.0 + m, sampling.seed)) rp = std::min(rp, hong_value(g.ell, kappa0, x));
  double rm = 0.0;
  for (const auto& x : v0_level(1.0 - m, sampling.seed + 1)) rm = std::max(rm, hong_value(g.ell, -kappa0, x));
  sp.r_plus = 0.9 * rp;
  sp.r_minus = 1.1 * rm;

  double E = std::numeric_limits<double>::infinity();
  for (const auto& x : hong_level_samples(g.ell, -kappa0, 1.0, sampling.samples, sampling.seed + 2)) {
    E = std::min(E, hong_value(g.ell, kappa0, x));
  }
  sp.E = 0.9 * E;
  sp.T_settle = settling_bound(g.C, m, kappa0, sp.r_plus, sp.r_minus);
  return sp;
}

double kappa_of_x(const SwitchParams& sp, const Vector& x) {
  const double V0 = sp.V0(x);
  if (V0 > 1.0 + sp.m) return sp.kappa0;
  if (V0 < 1.0 - sp.m) return -sp.kappa0;
  return sp.kappa0 * (1.0 + (V0 - (1.0 + sp.m)) / sp.m);
}

double fixed_time_feedback(const HongGainSet& g, const SwitchParams& sp, const Vector& x) {
  return hong_control(g.feedback_gains(), kappa_of_x(sp, x), x).u;
}

double matched_switched_law(const HongGainSet& g, const SwitchParams& sp, const Vector& y) {
  const double k = hong_value(g.ell, -sp.kappa0, y) > 1.0 ? sp.kappa0 : -sp.kappa0;
  return hong_control(g.ell, k, y).u;
}

double matched_robust_feedback(const HongGainSet& g, const SwitchParams& sp, const ChainSpec& spec,
                               double reg_eps, const Vector& y) {
  if (!(reg_eps > 0.0)) throw DomainError("matched_robust_feedback: reg_eps must be positive");
  const double w0 = matched_switched_law(g, sp, y);
  return (w0 + spec.d_bound * regularized_sign(w0, reg_eps)) / spec.b_lower;
}

double prescribed_time_scale(const SwitchParams& sp, double T_target) {
  if (!(T_target > 0.0)) throw DomainError("prescribed_time_scale: T_target must be positive");
  return std::max(1.0, sp.T_settle / T_target);
}

double prescribed_time_feedback(const HongGainSet& g, const SwitchParams& sp, double T_target,
                                const Vector& x) {
  const double mu = prescribed_time_scale(sp, T_target);
  return fixed_time_feedback(g, sp, dilate(WeightVector::pnf(g.n), mu, x));
}

double band_edge_gap(const SwitchParams& sp, const Vector& x) {
  const double V0 = sp.V0(x);
  return std::min(std::abs(V0 - (1.0 + sp.m)), std::abs(V0 - (1.0 - sp.m))) / (1.0 + sp.m);
}

double iss_z(const Vector& ell, const SwitchParams& sp, const Vector& x, ZExponent exponent) {
  const double k = sp.kappa0;
  const double inner = exponent == ZExponent::AsPrinted ? 1.0 - alpha_of(k) : 1.0 + alpha_of(-k);
  return std::min({sp.V0(x), std::pow(hong_value(ell, k, x), 1.0 + alpha_of(k)),
                   std::pow(hong_value(ell, -k, x), inner)});
}

std::vector<SwitchCheck> check_switch_params(const HongGainSet& g, const SwitchParams& sp,
                                             const SwitchSampling& sampling) {
  const int n = g.n;
  const int N = sampling.samples;
  const std::uint64_t seed = sampling.seed + 1000;
  const Vector en = basis(n, n);
  const Vector& ell = g.ell;
  const double m = sp.m;
  const double k0 = sp.kappa0;
  std::vector<SwitchCheck> out;
  auto add = [&](std::string name, double value, double bound, bool pass) {
    out.push_back({std::move(name), value, bound, pass});
  };

  // Band: the kappa(x) closed loop must keep dV_0/dt <= -C V_0 / 2.
  auto band = sample_sphere(n, n, {0.0}, N, seed);
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(1.0 - m, 1.0 + m);
    for (auto& x : band) x *= std::sqrt(level(rng) / sp.V0(x));
  }
  double delta_term = 0.0;
  double worst_rate = -std::numeric_limits<double>::infinity();
  for (const auto& x : band) {
    const double w = hong_control(ell, kappa_of_x(sp, x), x).u;
    const double w0 = hong_control(ell, 0.0, x).u;
    delta_term = std::max(delta_term, 2.0 * std::abs(x.dot(sp.P * en)) * sp.b_upper * std::abs(w - w0));
    const Vector Px = sp.P * x;
    for (double b : {1.0, sp.b_upper / g.b_lower}) {
      Vector f = jordan_block(n) * x;
      f(n - 1) += b * w;
      worst_rate = std::max(worst_rate, 2.0 * Px.dot(f) / (0.5 * sp.C * sp.V0(x)));
    }
  }
  add("band perturbation 2|x'Pe_n| b |w_k - w_0|", delta_term, sp.C * (1.0 - m) / 2.0,
      delta_term <= sp.C * (1.0 - m) / 2.0);
  add("band decay max dV0/(C V0/2)", worst_rate, -1.0, worst_rate <= -1.0);

  // Containments of sublevel sets.
  double outer = 0.0;
  for (const auto& x : hong_level_samples(ell, k0, sp.r_plus, N, seed + 1)) outer = std::max(outer, sp.V0(x));
  add("containment V0 on {V_k0 = r_plus}", outer, 1.0 + m, outer <= 1.0 + m);
  double inner = 0.0;
  {
    auto pts = sample_sphere(n, n, {0.0}, N, seed + 2);
    for (auto& x : pts) {
      x *= std::sqrt((1.0 - m) / sp.V0(x));
      inner = std::max(inner, hong_value(ell, -k0, x));
    }
  }
  add("containment V_-k0 on {V0 = 1-m}", inner, sp.r_minus, inner <= sp.r_minus);
  double s1 = 0.0;
  for (const auto& x : hong_level_samples(ell, k0, sp.E, N, seed + 3)) s1 = std::max(s1, hong_value(ell, -k0, x));
  add("containment V_-k0 on {V_+k0 = E}", s1, 1.0, s1 <= 1.0);

  // Outer and inner homogeneous decay at half the certified constant.
  double outer_ratio = std::numeric_limits<double>::infinity();
  for (const auto& x : hong_band_samples(ell, k0, sp.r_plus, 10.0 * sp.r_plus, N, seed + 4)) {
    if (sp.V0(x) <= 1.0 + m) continue;
    const double V = hong_value(ell, k0, x);
    outer_ratio = std::min(outer_ratio, -closed_loop_rate(ell, k0, x) / std::pow(V, 1.0 + alpha_of(k0)));
  }
  add("outer decay min -dV/V^{1+a}", outer_ratio, sp.C / 2.0, outer_ratio >= sp.C / 2.0);
  double inner_ratio = std::numeric_limits<double>::infinity();
  for (const auto& x : hong_level_samples(ell, -k0, 1.0, N, seed + 5)) {
    inner_ratio = std::min(inner_ratio, -closed_loop_rate(ell, -k0, x));
  }
  add("inner decay min -dV/V^{1+a}", inner_ratio, sp.C / 2.0, inner_ratio >= sp.C / 2.0);

  // Geometric condition dV/dx_n * u <= 0 for both switched laws.
  double geom = -std::numeric_limits<double>::infinity();
  for (double k : {k0, -k0}) {
    for (const auto& x : hong_level_samples(ell, k, 1.0, N / 2, seed + 6)) {
      const auto lv = hong_lyapunov(ell, k, x);
      geom = std::max(geom, lv.grad(n - 1) * hong_control(ell, k, x).u);
    }
  }
  add("geometric condition max dV/dx_n u", geom, 0.0, geom <= 0.0);
  return out;
}

}  // namespace ptstab
