#include "generators.hpp"
#include "ptstab/timescale.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

using namespace ptstab;
using ptstab::testing::Gen;
using ptstab::testing::rel_err;

namespace {

double integrate_a(const TimeScale& ts, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double t) { return ts.a(t); }, lo, hi,
                                                                        15, 1e-13);
}

double integrate_lambda(const TimeScale& ts, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double t) { return 1.0 / ts.A(t); },
                                                                        0.0, hi, 15, 1e-13);
}

}  // namespace

TEST_CASE("power law T=2 m=2 closed forms") {
  const TimeScale ts(2.0, Density::power_law(2));
  for (double t : {0.0, 0.3, 1.0, 1.7, 1.99}) {
    CHECK(rel_err(ts.A(t), (2 - t) * (2 - t) / 2) < 1e-14);
    CHECK(rel_err(ts.lambda(t), 2 / ((2 - t) * (2 - t))) < 1e-14);
    CHECK(rel_err(ts.s(t), t / (2 - t)) < 1e-12);
  }
}

TEST_CASE("A and s agree with quadrature of their defining integrals") {
  const std::vector<std::pair<double, Density>> cases{{1.0, Density::constant(1.0)},
                                                      {3.0, Density::constant(0.5)},
                                                      {2.0, Density::power_law(2)},
                                                      {1.5, Density::power_law(3)},
                                                      {1.0, Density::exp_flat()},
                                                      {2.0, Density::exp_flat()}};
  for (const auto& [T, d] : cases) {
    const TimeScale ts(T, d);
    for (double frac : {0.0, 0.1, 0.5, 0.8, 0.9}) {
      const double t = frac * T;
      CAPTURE(d.to_string());
      CAPTURE(t);
      CHECK(rel_err(ts.A(t), integrate_a(ts, t, T)) < 1e-10);
      if (t > 0) CHECK(rel_err(ts.s(t), integrate_lambda(ts, t)) < 1e-9);
      CHECK(rel_err(ts.lambda(t), 1.0 / ts.A(t)) < 1e-14);
    }
  }
}

TEST_CASE("t_of_s inverts s and lambda_of_s matches lambda") {
  Gen gen(1);
  for (const Density& d : {Density::constant(2.0), Density::power_law(1), Density::power_law(4), Density::exp_flat()}) {
    const TimeScale ts(1.5, d);
    for (int k = 0; k < 50; ++k) {
      const double t = gen.uniform(0.0, 0.9 * 1.5);
      const double s = ts.s(t);
      CAPTURE(d.to_string());
      CHECK(std::abs(ts.t_of_s(s) - t) < 1e-9);
      CHECK(rel_err(ts.lambda_of_s(s), ts.lambda(t)) < 1e-7);
      CHECK(rel_err(ts.a_of_s(s), ts.a(t)) < 1e-7);
    }
  }
}

TEST_CASE("lambda_dot equals a lambda^2 and matches finite differences") {
  for (const Density& d : {Density::constant(1.0), Density::power_law(3), Density::exp_flat()}) {
    const TimeScale ts(1.0, d);
    for (double t : {0.1, 0.4, 0.7}) {
      const double h = 1e-6;
      const double fd = (ts.lambda(t + h) - ts.lambda(t - h)) / (2 * h);
      CHECK(rel_err(ts.lambda_dot(t), fd) < 1e-6);
      CHECK(rel_err(ts.lambda_dot(t), ts.a(t) * ts.lambda(t) * ts.lambda(t)) < 1e-13);
    }
  }
}

TEST_CASE("sup_a") {
  CHECK(TimeScale(2.0, Density::constant(3.0)).sup_a() == 3.0);
  CHECK(TimeScale(2.0, Density::power_law(3)).sup_a() == doctest::Approx(4.0));
  // exp(-1/tau)/tau^2 peaks at tau = 1/2 with value 4 e^{-2}.
  CHECK(TimeScale(2.0, Density::exp_flat()).sup_a() == doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("x_to_y and y_to_x are inverse") {
  Gen gen(2);
  const TimeScale ts(1.0, Density::power_law(2));
  for (int k = 0; k < 200; ++k) {
    const int n = gen.integer(1, 5);
    const auto w = WeightVector::pnf(n);
    const double eta = gen.log_uniform(0.5, 8);
    const double t = gen.uniform(0.0, 0.99);
    const Vector x = gen.vector(n, -2, 2);
    const Vector y = x_to_y(ts, w, eta, t, x);
    CHECK((y_to_x(ts, w, eta, t, y) - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
    CHECK(y(n - 1) == doctest::Approx(eta * ts.lambda(t) * x(n - 1)));
  }
}

TEST_CASE("density parsing and validation") {
  CHECK(Density::parse("constant:2.5").c == 2.5);
  CHECK(Density::parse("power:3").m == 3);
  CHECK(Density::parse("expflat").kind == Density::Kind::ExpFlat);
  CHECK(Density::parse(Density::power_law(4).to_string()).m == 4);
  CHECK_THROWS(Density::parse("bogus"));
  CHECK_THROWS(Density::parse("power:0"));
  CHECK_THROWS(TimeScale(1.0, Density::constant(-1.0)));
  const TimeScale ts(1.0, Density::constant(1.0));
  CHECK_THROWS_AS(ts.lambda(1.0), DomainError);
}
