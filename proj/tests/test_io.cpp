#include "generators.hpp"
#include "ptstab/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace ptstab;
using ptstab::testing::Gen;

namespace {

GainFile round_trip(const GainFile& g) {
  std::stringstream ss;
  write_gain_file(ss, g);
  return read_gain_file(ss);
}

GainFile read_text(const std::string& text) {
  std::istringstream is(text);
  return read_gain_file(is);
}

std::string pnf_text() {
  GainFile g;
  g.kind = "pnf";
  g.linear = synthesize_certified_gain(3, 0.5);
  std::ostringstream os;
  write_gain_file(os, g);
  return os.str();
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  Gen gen(1);
  for (int k = 0; k < 5000; ++k) {
    const double v = gen.normal() * std::pow(10.0, gen.integer(-300, 300));
    CHECK(parse_vector(format_double(v))(0) == v);
  }
  const Vector v = gen.vector(7, -1, 1);
  CHECK((parse_vector(format_vector(v)) - v).norm() == 0.0);
  const Matrix m = Matrix::Random(3, 4);
  CHECK((parse_matrix(format_matrix(m)) - m).norm() == 0.0);
  CHECK_THROWS_AS(parse_matrix("1;2 , 3"), FormatError);
  CHECK_THROWS_AS(parse_vector("1;x"), FormatError);
}

TEST_CASE("pnf gain file round-trip is exact") {
  GainFile g;
  g.kind = "pnf";
  g.seed = 17;
  g.linear = synthesize_certified_gain(4, 0.25);
  const GainFile r = round_trip(g);
  CHECK(r.kind == "pnf");
  CHECK(r.seed == 17);
  REQUIRE(r.linear);
  CHECK((r.linear->K - g.linear->K).norm() == 0.0);
  CHECK((r.linear->S - g.linear->S).norm() == 0.0);
  CHECK(r.linear->rho == g.linear->rho);
  CHECK(r.linear->C0 == g.linear->C0);
  CHECK(r.linear->rho0 == g.linear->rho0);
  CHECK(r.linear->b_lower == g.linear->b_lower);
}

TEST_CASE("hong gain file with switching section round-trips") {
  GainFile g;
  g.kind = "hong";
  g.seed = 3;
  g.hong = synthesize_hong_gains(2);
  g.switching = build_switch_params(*g.hong);
  const GainFile r = round_trip(g);
  REQUIRE(r.hong);
  REQUIRE(r.switching);
  CHECK((r.hong->ell - g.hong->ell).norm() == 0.0);
  CHECK(r.hong->C == g.hong->C);
  CHECK(r.hong->certificate.min_ratio == g.hong->certificate.min_ratio);
  CHECK((r.hong->certificate.formula_gains - g.hong->certificate.formula_gains).norm() == 0.0);
  CHECK(r.hong->certificate.grid.seed == g.hong->certificate.grid.seed);
  CHECK((r.switching->P - g.switching->P).norm() == 0.0);
  CHECK(r.switching->kappa0 == g.switching->kappa0);
  CHECK(r.switching->T_settle == g.switching->T_settle);
  CHECK(r.switching->E == g.switching->E);
  // Writing again gives the same bytes.
  std::ostringstream a, b;
  write_gain_file(a, g);
  write_gain_file(b, r);
  CHECK(a.str() == b.str());
}

TEST_CASE("corrupt gain files are rejected") {
  const std::string good = pnf_text();
  CHECK_NOTHROW(read_text(good));
  CHECK_THROWS_AS(read_text(good + "extra=1\n"), FormatError);
  CHECK_THROWS_AS(read_text(good + "rho=1\n"), FormatError);
  CHECK_THROWS_AS(read_text("kind=pnf\n"), FormatError);
  CHECK_THROWS_AS(read_text("garbage\n"), FormatError);
  CHECK_THROWS_AS(read_text(good + "[bogus]\n"), FormatError);
  std::string wrong_kind = good;
  wrong_kind.replace(wrong_kind.find("kind=pnf"), 8, "kind=xyz");
  CHECK_THROWS_AS(read_text(wrong_kind), FormatError);
  std::string short_k = good;
  const auto pos = short_k.find("\nK=") + 3;
  short_k.erase(pos, short_k.find(';', pos) - pos + 1);
  CHECK_THROWS_AS(read_text(short_k), FormatError);
  CHECK_THROWS_AS(load_gain_file("/nonexistent/file.gain"), FormatError);
}

TEST_CASE("config parsing") {
  std::istringstream is("# experiment\nplant.n = 3  # order\n\ncontroller.kind=pnf\nsim.rel_tol = 1e-8\n");
  const Config c = Config::parse(is);
  CHECK(c.get_int("plant.n", 0) == 3);
  CHECK(c.get("controller.kind", "") == "pnf");
  CHECK(c.get_double("sim.rel_tol", 0) == 1e-8);
  CHECK(c.get_double("sim.abs_tol", 5.0) == 5.0);
  CHECK(c.unknown_keys({"plant.n", "controller.kind"}) == std::vector<std::string>{"sim.rel_tol"});
  std::istringstream dup("plant.n = 1\nplant.n = 2\n");
  CHECK_THROWS_AS(Config::parse(dup), FormatError);
  std::istringstream nodot("plant = 1\n");
  CHECK_THROWS_AS(Config::parse(nodot), FormatError);
  std::istringstream noeq("plant.n\n");
  CHECK_THROWS_AS(Config::parse(noeq), FormatError);
  std::istringstream bad("plant.n = 2.5\nplant.T = x\n");
  const Config b = Config::parse(bad);
  CHECK_THROWS_AS(b.get_int("plant.n", 0), FormatError);
  CHECK_THROWS_AS(b.get_double("plant.T", 0), FormatError);
}

TEST_CASE("trajectory CSV") {
  Trajectory tr;
  tr.samples.push_back({0.0, Vector::Ones(2), -1.0, {1, 2, 3, 0.1, 0.5}});
  tr.samples.push_back({0.5, Vector::Zero(2), 0.0, {0, 0, 0, 0, 0}});
  std::ostringstream os;
  write_trajectory_csv(os, tr, 2);
  const std::string s = os.str();
  CHECK(s.rfind("t,x1,x2,u,V0,Vkp,Vkm,kappa,Z\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK(s.find('\r') == std::string::npos);
  CHECK(s.find("0.5,0,0,0,0,0,0,0,0\n") != std::string::npos);
}
