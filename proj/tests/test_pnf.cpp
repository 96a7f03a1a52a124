#include "generators.hpp"
#include "ptstab/pnf.hpp"

#include <doctest.h>

using namespace ptstab;
using ptstab::testing::Gen;
using ptstab::testing::rel_err;

namespace {

double max_eig(const Matrix& m) { return symmetric_eigenvalues(0.5 * (m + m.transpose())).maxCoeff(); }

}  // namespace

TEST_CASE("LMI certificate suite") {
  for (int n = 1; n <= 6; ++n) {
    for (double b : {0.25, 1.0, 4.0}) {
      CAPTURE(n);
      CAPTURE(b);
      const LinearGain g = synthesize_linear_gain(n, b);
      const LmiReport rep = verify_lmi(g);
      CHECK(rep.pass);
      CHECK(rep.endpoint_max_eig <= kLmiTol);
      CHECK(rep.slope_min_eig >= -kLmiTol);
      CHECK(symmetric_eigenvalues(g.S).minCoeff() > 0.0);
      // n = 1 keeps the exact S = 1/2; larger orders are normalized.
      if (n > 1) CHECK(max_eig(g.S) == doctest::Approx(1.0).epsilon(1e-12));
      // Monotone robustness in b.
      for (double scale : {2.0, 100.0}) {
        const Matrix L = lmi_matrix(g, scale * b) + g.rho * Matrix::Identity(n, n);
        CHECK(max_eig(L) <= kLmiTol);
      }
    }
  }
}

TEST_CASE("n=1 gain is exact") {
  for (double b : {0.25, 1.0, 4.0}) {
    const LinearGain g = synthesize_linear_gain(1, b);
    CHECK(g.K(0) == doctest::Approx(1.0 / b).epsilon(1e-15));
    CHECK(g.S(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.rho == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("companion lift identities") {
  Gen gen(1);
  for (int k = 0; k < 50; ++k) {
    const int n = gen.integer(1, 6);
    const Vector K = gen.vector(n, -3, 3);
    const Matrix M = companion_lift(K);
    const Matrix J = jordan_block(n);
    CHECK((M * J - J * M).norm() < 1e-12);
    CHECK((M.transpose() * basis(n, 1) - K).norm() == 0.0);
    CHECK((M * basis(n, n) - K.reverse()).norm() == 0.0);
  }
}

TEST_CASE("Lyapunov solve residual") {
  Gen gen(2);
  for (int k = 0; k < 30; ++k) {
    const int n = gen.integer(1, 6);
    // Stable A: shift a random matrix left of the imaginary axis.
    Matrix A = Matrix::Random(n, n);
    A -= (A.norm() + 1.0) * Matrix::Identity(n, n);
    const Matrix Q = Matrix::Identity(n, n);
    const Matrix X = solve_lyapunov(A, Q);
    CHECK((A.transpose() * X + X * A + Q).norm() < 1e-10);
    CHECK(symmetric_eigenvalues(X).minCoeff() > 0.0);
  }
}

TEST_CASE("integer pole polynomial") {
  const Vector c = integer_pole_polynomial(3);
  CHECK(c(0) == 6.0);
  CHECK(c(1) == 11.0);
  CHECK(c(2) == 6.0);
  // Roots -1..-m: evaluate the monic polynomial at s = -i.
  for (int m = 1; m <= 6; ++m) {
    const Vector p = integer_pole_polynomial(m);
    for (int i = 1; i <= m; ++i) {
      double v = 1.0;
      for (int j = 0; j < m; ++j) v = v * (-i) + p(j);
      CHECK(std::abs(v) < 1e-9);
    }
  }
}

TEST_CASE("perturbation certificate") {
  for (int n = 1; n <= 4; ++n) {
    const LinearGain g = synthesize_certified_gain(n, 1.0);
    CHECK(g.rho0 == doctest::Approx(g.rho / 2));
    CHECK(g.C0 > 0.0);
    for (double a : {-g.C0, 0.0, g.C0}) {
      const Matrix L = lmi_matrix(g, g.b_lower, a) + g.rho0 * Matrix::Identity(n, n);
      CHECK(max_eig(L) <= kLmiTol);
    }
  }
}

TEST_CASE("scaled LMI holds along the time scale once eta >= minimal_eta") {
  for (const Density& d : {Density::constant(1.0), Density::constant(5.0), Density::power_law(3)}) {
    const TimeScale ts(2.0, d);
    for (int n : {2, 3}) {
      const LinearGain g = synthesize_certified_gain(n, 1.0);
      const double eta = minimal_eta(g, ts);
      CHECK(eta >= 1.0);
      CHECK(eta >= ts.sup_a() / g.C0 * (1 - 1e-12));
      for (double frac : {0.0, 0.25, 0.5, 0.9}) {
        const double a = ts.a(frac * 2.0) / eta;
        for (double b : {1.0, 3.0}) {
          const Matrix L = lmi_matrix(g, b, a) + g.rho0 * Matrix::Identity(n, n);
          CHECK(max_eig(L) <= kLmiTol);
        }
      }
    }
  }
}

TEST_CASE("pnf feedback in the scalar case") {
  const LinearGain g = synthesize_certified_gain(1, 1.0);
  const TimeScale ts(1.0, Density::constant(1.0));
  for (double t : {0.0, 0.5, 0.9}) CHECK(pnf_feedback(g, ts, 1.0, t, Vector::Constant(1, 2.0)) == doctest::Approx(-2.0 / (1 - t)));
}

TEST_CASE("envelopes decay to zero and scale with the data") {
  const LinearGain g = synthesize_certified_gain(2, 1.0);
  const TimeScale ts(1.0, Density::constant(1.0));
  const double eta = minimal_eta(g, ts);
  const Vector e0 = convergence_envelope(g, ts, eta, 1.0, 0.0, 0.0);
  const Vector e1 = convergence_envelope(g, ts, eta, 1.0, 0.0, 0.999);
  CHECK(e0.minCoeff() >= 1.0 - 1e-12);
  CHECK(e1.maxCoeff() < e0.minCoeff());
  const Vector e2 = convergence_envelope(g, ts, eta, 2.0, 0.0, 0.5);
  CHECK((e2 - 2.0 * convergence_envelope(g, ts, eta, 1.0, 0.0, 0.5)).norm() < 1e-12 * e2.norm());
  CHECK((convergence_envelope(g, ts, eta, 1.0, 1.0, 0.5).array() >= convergence_envelope(g, ts, eta, 1.0, 0.0, 0.5).array()).all());
  CHECK((noise_envelope(g, ts, eta, 1.0, 0.1, 0.5).array() >= convergence_envelope(g, ts, eta, 1.0, 0.0, 0.5).array()).all());
}

TEST_CASE("invalid synthesis input") {
  CHECK_THROWS(synthesize_linear_gain(0, 1.0));
  CHECK_THROWS(synthesize_linear_gain(2, 0.0));
}
