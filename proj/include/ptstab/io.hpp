#pragma once

#include "ptstab/hong.hpp"
#include "ptstab/pnf.hpp"
#include "ptstab/sim.hpp"
#include "ptstab/switching.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace ptstab {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g, enough to round-trip every double.
std::string format_double(double v);

/// "a;b;c".
std::string format_vector(const Vector& v);
/// Rows as in format_vector, joined by " , ".
std::string format_matrix(const Matrix& m);
Vector parse_vector(const std::string& text);
Matrix parse_matrix(const std::string& text);

/// Contents of a gain file: exactly one of `linear` / `hong` is set.
struct GainFile {
  std::string kind;  // "pnf" or "hong"
  std::optional<LinearGain> linear;
  std::optional<HongGainSet> hong;
  std::optional<SwitchParams> switching;
  /// Seed recorded at synthesis time.
  std::uint64_t seed = 0;
};

void write_gain_file(std::ostream& os, const GainFile& g);
GainFile read_gain_file(std::istream& is);
void save_gain_file(const std::string& path, const GainFile& g);
GainFile load_gain_file(const std::string& path);

/// Flat `section.key = value` text; `#` starts a comment.
class Config {
 public:
  static Config parse(std::istream& is);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Keys not in `known`, in sorted order.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Header t,x1..xn,u,V0,Vkp,Vkm,kappa,Z and one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int n);

}  // namespace ptstab
