#pragma once

#include "ptstab/core.hpp"

#include <string>

namespace ptstab {

/// Time densities a(t) on [0, T] admitted by the toolkit.
struct Density {
  enum class Kind { Constant, PowerLaw, ExpFlat };
  Kind kind = Kind::Constant;
  double c = 1.0;  // Constant
  int m = 1;       // PowerLaw: a(t) = (T - t)^{m - 1}

  static Density constant(double c) { return {Kind::Constant, c, 1}; }
  static Density power_law(int m) { return {Kind::PowerLaw, 1.0, m}; }
  static Density exp_flat() { return {Kind::ExpFlat, 1.0, 1}; }

  void validate() const;
  std::string to_string() const;
  /// Parses "constant:c", "power:m" or "expflat".
  static Density parse(const std::string& text);
};

/// The warp (a, A, lambda, s) built from a density on [0, T):
/// A(t) = int_t^T a, lambda = 1/A, s(t) = int_0^t lambda.
class TimeScale {
 public:
  TimeScale(double T, Density density);

  double horizon() const { return T_; }
  const Density& density() const { return density_; }

  /// Largest t accepted by the t-indexed evaluators.
  double t_guard() const { return T_ * (1.0 - 1e-9); }

  double a(double t) const;
  double A(double t) const;
  double lambda(double t) const;
  /// d lambda / dt = a lambda^2.
  double lambda_dot(double t) const;
  double s(double t) const;
  double t_of_s(double s) const;

  /// lambda and a expressed in warped time, without the horizon guard.
  double lambda_of_s(double s) const;
  double a_of_s(double s) const;

  /// sup over [0, T] of |a|.
  double sup_a() const;

 private:
  void check_t(double t) const;
  double s_expflat(double t) const;

  double T_;
  Density density_;
};

/// D^r_{eta lambda(t)} x.
Vector x_to_y(const TimeScale& ts, const WeightVector& w, double eta, double t, const Vector& x);
/// Inverse of x_to_y.
Vector y_to_x(const TimeScale& ts, const WeightVector& w, double eta, double t, const Vector& y);

}  // namespace ptstab
