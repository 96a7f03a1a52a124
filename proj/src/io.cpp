#include "ptstab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ptstab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw FormatError("empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + sep.size();
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v(i));
  }
  return out;
}

std::string format_matrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += " , ";
    out += format_vector(m.row(i).transpose());
  }
  return out;
}

Vector parse_vector(const std::string& text) {
  const auto parts = split_on(trim(text), ";");
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(parts[i]);
  return v;
}

Matrix parse_matrix(const std::string& text) {
  const auto rows = split_on(trim(text), ",");
  Matrix m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector r = parse_vector(rows[i]);
    if (i == 0) m.resize(static_cast<Eigen::Index>(rows.size()), r.size());
    if (r.size() != m.cols()) throw FormatError("ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

void write_gain_file(std::ostream& os, const GainFile& g) {
  auto kv = [&](const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; };
  kv("kind", g.kind);
  kv("seed", std::to_string(g.seed));
  if (g.linear) {
    const auto& l = *g.linear;
    kv("n", std::to_string(l.n));
    kv("b_lower", format_double(l.b_lower));
    kv("K", format_vector(l.K));
    kv("S", format_matrix(l.S));
    kv("rho", format_double(l.rho));
    os << "[certificate]\n";
    kv("C0", format_double(l.C0));
    kv("rho0", format_double(l.rho0));
    kv("lmi_tol", format_double(kLmiTol));
  } else if (g.hong) {
    const auto& h = *g.hong;
    kv("n", std::to_string(h.n));
    kv("b_lower", format_double(h.b_lower));
    kv("ell", format_vector(h.ell));
    kv("C", format_double(h.C));
    os << "[certificate]\n";
    const auto& c = h.certificate;
    kv("samples_per_kappa", std::to_string(c.grid.samples_per_kappa));
    kv("kappa_count", std::to_string(c.grid.kappa_count));
    kv("grid_seed", std::to_string(c.grid.seed));
    kv("safety", format_double(c.safety));
    kv("rounds", std::to_string(c.rounds));
    kv("formula_gains", format_vector(c.formula_gains));
    kv("min_ratio", format_double(c.min_ratio));
    kv("max_residual", format_double(c.max_residual));
  }
  if (g.switching) {
    const auto& s = *g.switching;
    os << "[switching]\n";
    kv("m", format_double(s.m));
    kv("kappa0", format_double(s.kappa0));
    kv("P", format_matrix(s.P));
    kv("r_plus", format_double(s.r_plus));
    kv("r_minus", format_double(s.r_minus));
    kv("T_settle", format_double(s.T_settle));
    kv("C", format_double(s.C));
    kv("E", format_double(s.E));
    kv("b_upper", format_double(s.b_upper));
  }
}

GainFile read_gain_file(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError("line " + std::to_string(lineno) + ": bad section");
      section = line.substr(1, line.size() - 2);
      if (section != "certificate" && section != "switching") {
        throw FormatError("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) throw FormatError("duplicate key " + key);
  }

  std::set<std::string> used;
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw FormatError("missing key " + k);
    used.insert(k);
    return it->second;
  };
  auto num = [&](const std::string& k) { return to_double(need(k)); };
  auto integer = [&](const std::string& k) {
    const double v = num(k);
    if (v != std::floor(v)) throw FormatError("key " + k + " must be an integer");
    return static_cast<long long>(v);
  };

  GainFile g;
  g.kind = need("kind");
  g.seed = static_cast<std::uint64_t>(integer("seed"));
  const int n = static_cast<int>(integer("n"));
  if (n < 1) throw FormatError("n must be >= 1");
  if (g.kind == "pnf") {
    LinearGain l;
    l.n = n;
    l.b_lower = num("b_lower");
    l.K = parse_vector(need("K"));
    l.S = parse_matrix(need("S"));
    l.rho = num("rho");
    l.C0 = num("certificate.C0");
    l.rho0 = num("certificate.rho0");
    num("certificate.lmi_tol");
    if (l.K.size() != n || l.S.rows() != n || l.S.cols() != n) throw FormatError("dimension mismatch");
    g.linear = l;
  } else if (g.kind == "hong") {
    HongGainSet h;
    h.n = n;
    h.b_lower = num("b_lower");
    h.ell = parse_vector(need("ell"));
    h.C = num("C");
    auto& c = h.certificate;
    c.grid.samples_per_kappa = static_cast<int>(integer("certificate.samples_per_kappa"));
    c.grid.kappa_count = static_cast<int>(integer("certificate.kappa_count"));
    c.grid.seed = static_cast<std::uint64_t>(integer("certificate.grid_seed"));
    c.safety = num("certificate.safety");
    c.rounds = static_cast<int>(integer("certificate.rounds"));
    c.formula_gains = parse_vector(need("certificate.formula_gains"));
    c.min_ratio = num("certificate.min_ratio");
    c.max_residual = num("certificate.max_residual");
    if (h.ell.size() != n) throw FormatError("dimension mismatch");
    g.hong = h;
    if (kv.count("switching.m")) {
      SwitchParams s;
      s.m = num("switching.m");
      s.kappa0 = num("switching.kappa0");
      s.P = parse_matrix(need("switching.P"));
      s.r_plus = num("switching.r_plus");
      s.r_minus = num("switching.r_minus");
      s.T_settle = num("switching.T_settle");
      s.C = num("switching.C");
      s.E = num("switching.E");
      s.b_upper = num("switching.b_upper");
      if (s.P.rows() != n || s.P.cols() != n) throw FormatError("dimension mismatch");
      g.switching = s;
    }
  } else {
    throw FormatError("unknown kind '" + g.kind + "'");
  }
  for (const auto& [k, v] : kv) {
    if (!used.count(k)) throw FormatError("unknown key " + k);
  }
  return g;
}

void save_gain_file(const std::string& path, const GainFile& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_gain_file(os, g);
  if (!os) throw std::runtime_error("write failed: " + path);
}

GainFile load_gain_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path);
  return read_gain_file(is);
}

Config Config::parse(std::istream& is) {
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) throw FormatError(where + ": expected section.key = value");
    const std::string key = trim(line.substr(0, eq));
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw FormatError(where + ": key '" + key + "' is not of the form section.key");
    }
    if (!c.values_.emplace(key, trim(line.substr(eq + 1))).second) {
      throw FormatError(where + ": duplicate key '" + key + "'");
    }
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot read " + path);
  return parse(is);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return to_double(it->second);
  } catch (const FormatError&) {
    throw FormatError(key + ": bad number '" + it->second + "'");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, fallback);
  if (v != std::floor(v)) throw FormatError(key + ": expected an integer");
  return static_cast<int>(v);
}

std::vector<std::string> Config::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int n) {
  os << 't';
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  os << ",u";
  for (const char* name : kDiagnosticNames) os << ',' << name;
  os << '\n';
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    for (int i = 0; i < n; ++i) os << ',' << format_double(s.x(i));
    os << ',' << format_double(s.u);
    for (double d : s.diag) os << ',' << format_double(d);
    os << '\n';
  }
}

}  // namespace ptstab
