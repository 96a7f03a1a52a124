#include "generators.hpp"
#include "ptstab/switching.hpp"

#include <doctest.h>

using namespace ptstab;
using ptstab::testing::Gen;
using ptstab::testing::rel_err;

namespace {

struct Fixture {
  HongGainSet g;
  SwitchParams sp;
  Fixture() : g(synthesize_hong_gains(2)), sp(build_switch_params(g)) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Vector on_level(const SwitchParams& sp, Vector x, double level) { return x * std::sqrt(level / sp.V0(x)); }

}  // namespace

TEST_CASE("kappa_of_x at the band edges and midpoint") {
  const auto& sp = fixture().sp;
  Gen gen(1);
  for (int k = 0; k < 100; ++k) {
    const Vector d = gen.state(2, 1, 1);
    CHECK(kappa_of_x(sp, on_level(sp, d, 1 + sp.m)) == doctest::Approx(sp.kappa0).epsilon(1e-12));
    CHECK(kappa_of_x(sp, on_level(sp, d, 1 - sp.m)) == doctest::Approx(-sp.kappa0).epsilon(1e-12));
    CHECK(std::abs(kappa_of_x(sp, on_level(sp, d, 1.0))) < 1e-12 * sp.kappa0 + 1e-18);
    CHECK(kappa_of_x(sp, on_level(sp, d, 5.0)) == sp.kappa0);
    CHECK(kappa_of_x(sp, on_level(sp, d, 0.1)) == -sp.kappa0);
  }
}

TEST_CASE("kappa_of_x is continuous and monotone along rays") {
  const auto& sp = fixture().sp;
  Gen gen(2);
  for (int k = 0; k < 50; ++k) {
    const Vector d = gen.state(2, 1, 1);
    double prev = -1e300;
    for (int i = 0; i <= 2000; ++i) {
      const double level = 0.2 + 1.6 * i / 2000.0;
      const double kap = kappa_of_x(sp, on_level(sp, d, level));
      CHECK(kap >= -sp.kappa0);
      CHECK(kap <= sp.kappa0);
      CHECK(kap >= prev);
      if (i > 0) CHECK(kap - prev <= sp.kappa0 / sp.m * (1.6 / 2000.0) * (1 + 1e-9));
      prev = kap;
    }
  }
}

TEST_CASE("fixed-time feedback") {
  const auto& [g, sp] = fixture();
  CHECK(fixed_time_feedback(g, sp, Vector::Zero(2)) == 0.0);
  Gen gen(3);
  for (int k = 0; k < 100; ++k) {
    const Vector x = on_level(sp, gen.state(2, 1, 1), gen.uniform(1.6, 100.0));
    CHECK(fixed_time_feedback(g, sp, x) == hong_control(g.feedback_gains(), sp.kappa0, x).u);
  }
  // Continuity probe across both edges.
  for (int k = 0; k < 200; ++k) {
    const Vector d = gen.state(2, 1, 1);
    for (double edge : {1 - sp.m, 1 + sp.m}) {
      const Vector x = on_level(sp, d, edge);
      const Vector step = 1e-6 * gen.state(2, 1, 1);
      const double du = std::abs(fixed_time_feedback(g, sp, x + step) - fixed_time_feedback(g, sp, x - step));
      CHECK(du < 1e-3);
    }
  }
}

TEST_CASE("matched robust feedback") {
  const auto& [g0, sp] = fixture();
  HongGainSet g = g0;
  ChainSpec spec;
  spec.n = 2;
  spec.d_bound = 0.0;
  // D = 0, V_- > 1: the + law divided by b_lower.
  Vector y(2);
  y << 3, -1;
  REQUIRE(hong_value(g.ell, -sp.kappa0, y) > 1.0);
  spec.b_lower = 2.0;
  CHECK(matched_robust_feedback(g, sp, spec, 1e-3, y) == doctest::Approx(hong_control(g.ell, sp.kappa0, y).u / 2));
  CHECK(matched_robust_feedback(g, sp, spec, 1e-3, Vector::Zero(2)) == 0.0);

  // omega_0(y) = -3 with D = 1, b_lower = 1 gives -4.
  spec.b_lower = 1.0;
  spec.d_bound = 1.0;
  const Vector dir = y.normalized();
  double lo = 0.0, hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (matched_switched_law(g, sp, mid * dir) > -3.0 ? lo : hi) = mid;
  }
  const Vector ys = hi * dir;
  REQUIRE(matched_switched_law(g, sp, ys) == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(matched_robust_feedback(g, sp, spec, 1e-3, ys) == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK_THROWS_AS(matched_robust_feedback(g, sp, spec, 0.0, ys), DomainError);
  // Inside the regularization layer the sign term is linear.
  CHECK(regularized_sign(5e-4, 1e-3) == doctest::Approx(0.5));
  CHECK(regularized_sign(-2.0, 1e-3) == -1.0);
}

TEST_CASE("switch parameters") {
  const auto& [g, sp] = fixture();
  CHECK(sp.kappa0 > 0.0);
  CHECK(sp.kappa0 < kappa_limit(2));
  CHECK(symmetric_eigenvalues(sp.P).minCoeff() > 0.0);
  CHECK(sp.T_settle == doctest::Approx(settling_bound(g, sp)));
  for (const auto& c : check_switch_params(g, sp)) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  const auto ec = explicit_constants(g, 0.5);
  CHECK(ec.X_n > 0.0);
  CHECK(ec.C1 > 0.0);
  CHECK(std::isfinite(ec.C1));
  CHECK(ec.kappa0_of_m == doctest::Approx(sp.kappa0));
  CHECK_THROWS_AS(explicit_constants(g, 1.0), DomainError);
  CHECK_THROWS_AS(build_switch_params(g, 0.5, 0.3), DomainError);
}

TEST_CASE("explicit constants for n=1") {
  const auto g = synthesize_hong_gains(1);
  const auto ec = explicit_constants(g, 0.5);
  CHECK(std::isfinite(ec.C1));
  CHECK(ec.C1 > 0.0);
  CHECK(ec.kappa0_of_m > 0.0);
  CHECK(ec.kappa0_of_m <= 0.999 * kappa_limit(1) + 1e-15);
}

TEST_CASE("settling bound structure") {
  const double C = 0.75, k0 = 0.01, rp = 1.3, rm = 0.55;
  CHECK(settling_bound(2 * C, 0.5, k0, rp, rm) == doctest::Approx(settling_bound(C, 0.5, k0, rp, rm) / 2));
  CHECK(settling_bound(C, 0.5, k0, rp, rm) > 0.0);
  CHECK(settling_bound_as_printed(C, 1e-6, k0, rp, rm) > settling_bound_as_printed(C, 1e-2, k0, rp, rm));
  // The two crossing terms differ by (2/C)(ln((1+m)/(1-m)) + ln(2m)).
  const double m = 0.3;
  CHECK(settling_bound(C, m, k0, rp, rm) - settling_bound_as_printed(C, m, k0, rp, rm) ==
        doctest::Approx(2 / C * (std::log((1 + m) / (1 - m)) + std::log(2 * m))));
}

TEST_CASE("prescribed-time feedback") {
  const auto& [g, sp] = fixture();
  CHECK(prescribed_time_scale(sp, sp.T_settle) == 1.0);
  CHECK(prescribed_time_scale(sp, sp.T_settle / 4) == doctest::Approx(4.0));
  CHECK(prescribed_time_feedback(g, sp, 1.0, Vector::Zero(2)) == 0.0);
  Gen gen(4);
  for (int k = 0; k < 50; ++k) {
    const Vector x = gen.state(2, 0.1, 10);
    CHECK(prescribed_time_feedback(g, sp, sp.T_settle, x) == fixed_time_feedback(g, sp, x));
  }
  CHECK_THROWS_AS(prescribed_time_scale(sp, 0.0), DomainError);
}

TEST_CASE("ISS function Z") {
  const auto& [g, sp] = fixture();
  CHECK(iss_z(g.ell, sp, Vector::Zero(2)) == 0.0);
  Gen gen(5);
  for (int k = 0; k < 200; ++k) {
    const Vector x = gen.state(2, 1e-3, 1e3);
    const double z = iss_z(g.ell, sp, x);
    CHECK(z > 0.0);
    CHECK(z <= sp.V0(x));
    CHECK(iss_z(g.ell, sp, x, ZExponent::Symmetric) > 0.0);
  }
  // Z is small near the origin.
  CHECK(iss_z(g.ell, sp, Vector::Constant(2, 1e-6)) < 1e-10);
  const Vector e = on_level(sp, Vector::Ones(2), 1 + sp.m);
  CHECK(band_edge_gap(sp, e) < 1e-12);
}
