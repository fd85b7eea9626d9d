#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "zs/symbols.hpp"

using namespace zs;

namespace {

// central difference of the symbol in one of its four slots
double fd(const SymbolDescriptor& s, int slot, double x1, double x2, double xi1, double xi2) {
  const double h = 1e-6;
  double a[4] = {x1, x2, xi1, xi2}, b[4] = {x1, x2, xi1, xi2};
  a[slot] += h;
  b[slot] -= h;
  return (evaluate(s, a[0], a[1], a[2], a[3]) - evaluate(s, b[0], b[1], b[2], b[3])) / (2 * h);
}

}  // namespace

TEST_CASE("family names round trip") {
  for (Family f : {Family::InternalWave, Family::Homogeneous, Family::NormalForm, Family::Tao})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK(family_name(Family::Homogeneous) == "internal-wave-homogeneous");
  CHECK_THROWS_AS(family_from_name("nope"), std::invalid_argument);
}

TEST_CASE("closed-form values") {
  CHECK(evaluate(SymbolDescriptor::homogeneous(2.0), 0.0, 0.0, 0.0, 3.0) == doctest::Approx(-1.0));
  CHECK(evaluate(SymbolDescriptor::homogeneous(1.5), std::acos(0.2), 0.0, 3.0, 4.0) ==
        doctest::Approx(0.8 - 0.3));
  CHECK(evaluate(SymbolDescriptor::internal_wave(2.0), 0.3, 0.1, 2.0, -1.0) ==
        doctest::Approx(-1.0 / std::sqrt(6.0) - 2.0 * std::cos(0.3)).epsilon(1e-15));
  CHECK(evaluate(SymbolDescriptor::normal_form(0.7), 0.4, 1.0, 2.0, 0.5) == doctest::Approx(0.25 - 0.28));
}

TEST_CASE("frozen tao value") {
  CHECK(evaluate(SymbolDescriptor::tao(2.0, 5), 0.3, 0.1, 5.0, 0.2) ==
        doctest::Approx(-0.038782511445850772).epsilon(1e-14));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(evaluate(SymbolDescriptor::homogeneous(2.0), 0, 0, 0, 0), DomainError);
  CHECK_THROWS_AS(evaluate(SymbolDescriptor::normal_form(1.0), 0, 0, 1.0, 0.9), DomainError);
  CHECK_THROWS_AS(evaluate(SymbolDescriptor::normal_form(1.0), 0, 0, -1.0, 0.0), DomainError);
}

TEST_CASE("homogeneous symbol has degree zero in xi") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 50; ++i) {
    double x1 = u(rng), xi1 = u(rng), xi2 = u(rng), t = 0.1 + std::abs(u(rng));
    auto s = SymbolDescriptor::homogeneous(1.3);
    CHECK(evaluate(s, x1, 0, t * xi1, t * xi2) == doctest::Approx(evaluate(s, x1, 0, xi1, xi2)).epsilon(1e-14));
  }
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<SymbolDescriptor> syms{SymbolDescriptor::internal_wave(2.0), SymbolDescriptor::homogeneous(1.4),
                                     SymbolDescriptor::tao(2.0, 5)};
  for (const auto& s : syms)
    for (int i = 0; i < 40; ++i) {
      double x1 = u(rng), xi1 = s.family == Family::Tao ? 5.0 + 2.5 * u(rng) / 2 : u(rng), xi2 = u(rng) / 2;
      auto g = gradient(s, x1, 0, xi1, xi2);
      CHECK(g.dx1 == doctest::Approx(fd(s, 0, x1, 0, xi1, xi2)).epsilon(1e-6));
      CHECK(g.dx2 == 0.0);
      CHECK(g.dxi1 == doctest::Approx(fd(s, 2, x1, 0, xi1, xi2)).epsilon(1e-6));
      CHECK(g.dxi2 == doctest::Approx(fd(s, 3, x1, 0, xi1, xi2)).epsilon(1e-6));
    }
  auto nf = SymbolDescriptor::normal_form(0.8);
  auto g = gradient(nf, 0.3, 0, 2.0, 0.4);
  CHECK(g.dx1 == doctest::Approx(-0.8));
  CHECK(g.dxi1 == doctest::Approx(fd(nf, 2, 0.3, 0, 2.0, 0.4)).epsilon(1e-6));
  CHECK(g.dxi2 == doctest::Approx(0.5));
}

TEST_CASE("cutoff profiles") {
  CHECK(bump(0) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(smooth_step(0) == 0.0);
  CHECK(smooth_step(1) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  for (double t = 0.05; t < 1; t += 0.1) {
    CHECK(smooth_step(t) + smooth_step(1 - t) == doctest::Approx(1.0).epsilon(1e-14));
    double d = (smooth_step(t + 1e-6) - smooth_step(t - 1e-6)) / 2e-6;
    CHECK(smooth_step_derivative(t) == doctest::Approx(d).epsilon(1e-5));
  }
  auto cp = chi_profiles(5);
  CHECK(cp.chi(4.0) == 1.0);
  CHECK(cp.chi(6.0) == 1.0);
  CHECK(cp.chi(3.0) == 0.0);
  CHECK(cp.chi(7.0) == 0.0);
  CHECK(cp.chi(6.5) == doctest::Approx(0.5));
  CHECK_THROWS(chi_profiles(1));
}

TEST_CASE("tao symbol equals the internal wave symbol away from the plateau") {
  auto t = SymbolDescriptor::tao(2.0, 5);
  auto a = SymbolDescriptor::internal_wave(2.0);
  CHECK(evaluate(t, 0.7, 0, 1.0, 0.3) == evaluate(a, 0.7, 0, 1.0, 0.3));
  CHECK(evaluate(t, 0.7, 0, 5.0, 1.5) == evaluate(a, 0.7, 0, 5.0, 1.5));
  // on the plateau at xi2 = 0 the cos x1 coupling vanishes
  CHECK(t.coupling(5.0, 0.0) == 0.0);
}

TEST_CASE("principal family and JSON round trip") {
  CHECK(principal(SymbolDescriptor::internal_wave(1.7)) == SymbolDescriptor::homogeneous(1.7));
  CHECK(principal(SymbolDescriptor::tao(2.0, 5)) == SymbolDescriptor::homogeneous(2.0));
  for (const auto& s : {SymbolDescriptor::internal_wave(2.5), SymbolDescriptor::homogeneous(1.1),
                        SymbolDescriptor::normal_form(0.7, 0.3), SymbolDescriptor::tao(1.5, 6)})
    CHECK(symbol_from_json(to_json(s)) == s);
}
