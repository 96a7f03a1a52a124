#include "ptstab/timescale.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/tools/roots.hpp>

#include <sstream>

namespace ptstab {

void Density::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (!(c > 0.0)) throw DomainError("Density: constant density needs c > 0");
      break;
    case Kind::PowerLaw:
      if (m < 1) throw DomainError("Density: power law needs integer m >= 1");
      break;
    case Kind::ExpFlat:
      break;
  }
}

std::string Density::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Constant: os << "constant:" << c; break;
    case Kind::PowerLaw: os << "power:" << m; break;
    case Kind::ExpFlat: os << "expflat"; break;
  }
  return os.str();
}

Density Density::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  Density d;
  try {
    if (head == "constant") {
      d = constant(tail.empty() ? 1.0 : std::stod(tail));
    } else if (head == "power") {
      d = power_law(tail.empty() ? 1 : std::stoi(tail));
    } else if (head == "expflat") {
      d = exp_flat();
    } else {
      throw DomainError("unknown density '" + text + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const DomainError*>(&e)) throw;
    throw DomainError("malformed density '" + text + "'");
  }
  d.validate();
  return d;
}

TimeScale::TimeScale(double T, Density density) : T_(T), density_(density) {
  if (!(T > 0.0)) throw DomainError("TimeScale: T must be positive");
  density_.validate();
}

void TimeScale::check_t(double t) const {
  if (!(t >= 0.0) || t > t_guard()) throw DomainError("TimeScale: t outside [0, T(1-1e-9)]");
}

double TimeScale::a(double t) const {
  check_t(t);
  const double tau = T_ - t;
  switch (density_.kind) {
    case Density::Kind::Constant: return density_.c;
    case Density::Kind::PowerLaw: return std::pow(tau, density_.m - 1);
    case Density::Kind::ExpFlat: return std::exp(-1.0 / tau) / (tau * tau);
  }
  return 0.0;
}

double TimeScale::A(double t) const {
  check_t(t);
  const double tau = T_ - t;
  switch (density_.kind) {
    case Density::Kind::Constant: return density_.c * tau;
    case Density::Kind::PowerLaw: return std::pow(tau, density_.m) / density_.m;
    case Density::Kind::ExpFlat: return std::exp(-1.0 / tau);
  }
  return 0.0;
}

double TimeScale::lambda(double t) const {
  check_t(t);
  const double tau = T_ - t;
  switch (density_.kind) {
    case Density::Kind::Constant: return 1.0 / (density_.c * tau);
    case Density::Kind::PowerLaw: return density_.m / std::pow(tau, density_.m);
    case Density::Kind::ExpFlat: return std::exp(1.0 / tau);
  }
  return 0.0;
}

double TimeScale::lambda_dot(double t) const {
  const double l = lambda(t);
  return a(t) * l * l;
}

namespace {

// Antiderivative of exp(w)/w^2; with w = 1/(T - t), s(t) = G(1/(T - t)) - G(1/T).
double expflat_primitive(double w) { return boost::math::expint(w) - std::exp(w) / w; }

}  // namespace

double TimeScale::s_expflat(double t) const {
  return expflat_primitive(1.0 / (T_ - t)) - expflat_primitive(1.0 / T_);
}

double TimeScale::s(double t) const {
  check_t(t);
  const double tau = T_ - t;
  switch (density_.kind) {
    case Density::Kind::Constant: return std::log(T_ / tau) / density_.c;
    case Density::Kind::PowerLaw: {
      const int m = density_.m;
      if (m == 1) return std::log(T_ / tau);
      return m / (m - 1.0) * (std::pow(tau, 1.0 - m) - std::pow(T_, 1.0 - m));
    }
    case Density::Kind::ExpFlat: return s_expflat(t);
  }
  return 0.0;
}

double TimeScale::t_of_s(double s) const {
  if (!(s >= 0.0)) throw DomainError("TimeScale::t_of_s: s must be non-negative");
  switch (density_.kind) {
    case Density::Kind::Constant: return T_ * -std::expm1(-density_.c * s);
    case Density::Kind::PowerLaw: {
      const int m = density_.m;
      if (m == 1) return T_ * -std::expm1(-s);
      const double tau = std::pow(s * (m - 1.0) / m + std::pow(T_, 1.0 - m), -1.0 / (m - 1.0));
      return T_ - tau;
    }
    case Density::Kind::ExpFlat: {
      if (s == 0.0) return 0.0;
      // exp(1/(T - t)) overflows past T - t ~ 1/700.
      const double hi = std::min(t_guard(), T_ - 1.0 / 700.0);
      if (hi <= 0.0 || s_expflat(hi) < s) {
        throw DomainError("TimeScale::t_of_s: s beyond representable range");
      }
      // Solve in w = 1/(T - t), where the primitive is explicit.
      const double target = s + expflat_primitive(1.0 / T_);
      auto f = [target](double w) { return expflat_primitive(w) - target; };
      const double w_lo = 1.0 / T_;
      const double w_hi = 1.0 / (T_ - hi);
      std::uintmax_t iters = 200;
      auto tol = boost::math::tools::eps_tolerance<double>(52);
      auto [lo_w, up_w] = boost::math::tools::toms748_solve(f, w_lo, w_hi, -s, f(w_hi), tol, iters);
      const double lo = T_ - 1.0 / lo_w;
      const double up = T_ - 1.0 / up_w;
      return 0.5 * (lo + up);
    }
  }
  return 0.0;
}

double TimeScale::lambda_of_s(double s) const {
  switch (density_.kind) {
    case Density::Kind::Constant: return std::exp(density_.c * s) / (density_.c * T_);
    case Density::Kind::PowerLaw: {
      const int m = density_.m;
      if (m == 1) return std::exp(s) / T_;
      const double w = s * (m - 1.0) / m + std::pow(T_, 1.0 - m);  // tau^{1-m}
      return m * std::pow(w, m / (m - 1.0));
    }
    case Density::Kind::ExpFlat: return std::exp(1.0 / (T_ - t_of_s(s)));
  }
  return 0.0;
}

double TimeScale::a_of_s(double s) const {
  switch (density_.kind) {
    case Density::Kind::Constant: return density_.c;
    case Density::Kind::PowerLaw: {
      const int m = density_.m;
      if (m == 1) return 1.0;
      return 1.0 / (s * (m - 1.0) / m + std::pow(T_, 1.0 - m));
    }
    case Density::Kind::ExpFlat: {
      const double tau = T_ - t_of_s(s);
      return std::exp(-1.0 / tau) / (tau * tau);
    }
  }
  return 0.0;
}

double TimeScale::sup_a() const {
  switch (density_.kind) {
    case Density::Kind::Constant: return density_.c;
    case Density::Kind::PowerLaw: return std::pow(T_, density_.m - 1);
    case Density::Kind::ExpFlat: {
      // exp(-1/tau)/tau^2 peaks at tau = 1/2.
      const double tau = std::min(T_, 0.5);
      return std::exp(-1.0 / tau) / (tau * tau);
    }
  }
  return 0.0;
}

Vector x_to_y(const TimeScale& ts, const WeightVector& w, double eta, double t, const Vector& x) {
  if (!(eta > 0.0)) throw DomainError("x_to_y: eta must be positive");
  if (t >= ts.horizon()) throw DomainError("x_to_y: t must be < T");
  return dilate(w, eta * ts.lambda(t), x);
}

Vector y_to_x(const TimeScale& ts, const WeightVector& w, double eta, double t, const Vector& y) {
  if (!(eta > 0.0)) throw DomainError("y_to_x: eta must be positive");
  if (t >= ts.horizon()) throw DomainError("y_to_x: t must be < T");
  return dilate(w, 1.0 / (eta * ts.lambda(t)), y);
}

}  // namespace ptstab
