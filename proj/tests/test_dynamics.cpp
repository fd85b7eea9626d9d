#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zs/dynamics.hpp"

using namespace zs;

namespace {
constexpr double kPi = std::numbers::pi;

std::pair<std::vector<LimitCycle>, std::vector<LimitCycle>> split(const std::vector<LimitCycle>& cs) {
  std::vector<LimitCycle> sinks, sources;
  for (const auto& c : cs) (c.kind == CycleKind::Sink ? sinks : sources).push_back(c);
  return {sinks, sources};
}
}  // namespace

TEST_CASE("circular distance and reduction") {
  CHECK(circular_distance(0.1, 2 * kPi - 0.1) == doctest::Approx(0.2));
  CHECK(circular_distance(1.0, 1.0 + 4 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  auto p = reduce(SymbolDescriptor::homogeneous(2.0), {7.0, -1.0, -0.5});
  CHECK(p.x1 == doctest::Approx(7.0 - 2 * kPi));
  CHECK(p.x2 == doctest::Approx(2 * kPi - 1.0));
  CHECK(p.theta == doctest::Approx(2 * kPi - 0.5));
  CHECK(reduce(SymbolDescriptor::normal_form(1.0), {7.0, 0, 0}).x1 == 7.0);
}

TEST_CASE("projection onto the energy surface") {
  auto s = SymbolDescriptor::homogeneous(2.0);
  double th = project_to_sigma(s, 0.3, 1.5, 0.5, 0.2);
  CHECK(symbol_at(s, {1.5, 0.5, th}) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("homogeneous cycles sit where the coupling balances the frequency") {
  for (double omega : {0.0, 0.2, -0.3}) {
    const double beta = 1.5;
    auto cs = find_cycles(SymbolDescriptor::homogeneous(beta), omega);
    auto [sinks, sources] = split(cs);
    REQUIRE(sinks.size() == 2);
    REQUIRE(sources.size() == 2);
    for (const auto& c : cs) {
      CHECK(std::cos(c.x1) == doctest::Approx(-omega / beta).epsilon(1e-8));
      CHECK(c.lyapunov == doctest::Approx(std::sqrt(beta * beta - omega * omega)).epsilon(1e-5));
      CHECK(c.period == doctest::Approx(2 * kPi).epsilon(1e-8));
      CHECK(std::abs(c.gamma) * c.lyapunov == doctest::Approx(1.0).epsilon(1e-5));
      CHECK((c.gamma > 0) == (c.kind == CycleKind::Sink));
    }
  }
}

TEST_CASE("frozen cycle table for beta 2 at zero frequency") {
  auto cs = find_cycles(SymbolDescriptor::homogeneous(2.0), 0.0);
  REQUIRE(cs.size() == 4);
  const double x1[] = {4.71238898039, 1.57079632679, 4.71238898039, 1.57079632679};
  const double th[] = {0.0, kPi, kPi, 0.0};
  const int ori[] = {1, -1, -1, 1};
  for (int i = 0; i < 4; ++i) {
    CHECK(cs[i].id == i);
    CHECK(cs[i].x1 == doctest::Approx(x1[i]).epsilon(1e-9));
    CHECK(circular_distance(cs[i].theta, th[i]) < 1e-9);
    CHECK(cs[i].orientation == ori[i]);
    CHECK(cs[i].lyapunov == doctest::Approx(2.0).epsilon(1e-5));
  }
}

TEST_CASE("normal form exponent is recovered") {
  for (double lam : {0.7, 1.0, 1.3}) {
    auto cs = find_cycles(SymbolDescriptor::normal_form(lam), 0.0);
    REQUIRE(!cs.empty());
    for (const auto& c : cs) {
      CHECK(c.lyapunov == doctest::Approx(lam).epsilon(1e-6));
      CHECK(c.lyapunov_monodromy == doctest::Approx(lam).epsilon(1e-5));
    }
  }
}

TEST_CASE("flow conserves the symbol") {
  auto s = SymbolDescriptor::internal_wave(2.0);
  auto h = principal(s);
  CospherePoint p{1.4, 0.2, 0.0};
  p.theta = project_to_sigma(h, 0.1, p.x1, p.x2, 0.5);
  auto tr = integrate(h, 0.1, p, 0.0, 50.0);
  CHECK(tr.max_drift < 1e-8);
  for (const auto& q : tr.points) CHECK(symbol_at(h, q) == doctest::Approx(0.1).epsilon(1e-7));
  // attracted onto a sink: x1 converges to a root of cos x1 = -omega/beta
  CHECK(std::abs(std::cos(tr.points.back().x1) + 0.05) < 1e-3);
}

TEST_CASE("return map fixes the cycle anchor") {
  auto cs = find_cycles(SymbolDescriptor::homogeneous(2.0), 0.0);
  for (const auto& c : cs) {
    auto r = return_map(c.symbol, c.omega, c.x1, c.theta, 0.0, c.kind == CycleKind::Sink ? 1 : -1);
    CHECK(circular_distance(r.x1, c.x1) < 1e-9);
    CHECK(std::abs(r.time) == doctest::Approx(c.period).epsilon(1e-8));
  }
}

TEST_CASE("section density equals the inverse exponent") {
  for (double lam : {0.7, 1.3}) {
    auto cs = find_cycles(SymbolDescriptor::normal_form(lam), 0.0);
    auto sec = build_section(cs.front(), 0.1);
    CHECK(sec.mu.size() == sec.z.size());
    for (double m : sec.mu) CHECK(m == doctest::Approx(1 / lam).epsilon(1e-6));
  }
}

TEST_CASE("section phase and local coordinate") {
  auto cs = find_cycles(SymbolDescriptor::homogeneous(2.0), 0.0);
  const auto& c = cs.front();
  CHECK(local_x1(c, c.x1 + 0.1) == doctest::Approx(c.orientation * 0.1));
  CHECK(section_phase(c, c.x1 + 0.1, 0.5) == doctest::Approx(0.5 + c.gamma * std::log(0.1)));
}

TEST_CASE("fixed points on the energy surface are reported") {
  CHECK_THROWS_AS(check_no_fixed_points(SymbolDescriptor::homogeneous(2.0), -1.0), AssumptionViolation);
  CHECK_NOTHROW(check_no_fixed_points(SymbolDescriptor::homogeneous(2.0), 0.0));
}

TEST_CASE("scattering relation connects every source branch to a sink") {
  auto cs = find_cycles(SymbolDescriptor::homogeneous(2.0), 0.0);
  auto [sinks, sources] = split(cs);
  RelationOptions opt;
  opt.samples = 16;
  auto t = scattering_relation(sources, sinks, opt);
  CHECK(t.rows.size() == 2 * sources.size());
  for (const auto& r : t.rows) {
    CHECK(r.single_target);
    CHECK(r.sink >= 0);
    CHECK(r.z.size() == r.y.size());
    CHECK(r.predict(r.z.front()) == doctest::Approx(r.y.front()).epsilon(1e-9));
  }
  opt.workers = 4;
  auto t4 = scattering_relation(sources, sinks, opt);
  for (size_t i = 0; i < t.rows.size(); ++i) CHECK(t.rows[i].y == t4.rows[i].y);
}
