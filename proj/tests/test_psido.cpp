#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "zs/psido.hpp"

using namespace zs;

namespace {

SpectralField random_field(const TorusGrid& g, unsigned seed, int kmax) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  SpectralField f(g);
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2) f.at(k1, k2) = cplx(nd(rng), nd(rng));
  return f;
}

}  // namespace

TEST_CASE("homogeneous matrix entries are known in closed form") {
  TorusGrid g(16, 16);
  auto m = assemble(SymbolDescriptor::homogeneous(2.0), g);
  CHECK(m.hermitian);
  CHECK(hermitian_defect(m.A) == 0.0);
  auto e = SpectralField::mode(g, 3, 4);
  auto Ae = apply(m, e);
  CHECK(std::abs(Ae.at(3, 4) - 0.8) < 1e-14);
  CHECK(std::abs(Ae.at(2, 4) + 1.0) < 1e-14);
  CHECK(std::abs(Ae.at(4, 4) + 1.0) < 1e-14);
  Ae.at(3, 4) = Ae.at(2, 4) = Ae.at(4, 4) = 0;
  CHECK(Ae.coeffs.norm() < 1e-14);
}

TEST_CASE("pieces are the k2 rows for x2-independent symbols") {
  TorusGrid g(16, 12);
  auto m = assemble(SymbolDescriptor::internal_wave(2.0), g);
  CHECK(int(m.components.size()) == g.m2());
  for (const auto& c : m.components) {
    CHECK(int(c.size()) == g.m1());
    for (int i : c) CHECK(g.k2_of(i) == g.k2_of(c.front()));
  }
}

TEST_CASE("matrix and matrix-free application agree away from the band edge") {
  TorusGrid g(32, 32);
  for (const auto& s : {SymbolDescriptor::internal_wave(2.0), SymbolDescriptor::homogeneous(1.3),
                        SymbolDescriptor::tao(2.0, 5)}) {
    auto m = assemble(s, g);
    auto f = random_field(g, 9, 10);
    auto a = apply(m, f);
    auto b = apply_matrix_free(s, f);
    CHECK((a.coeffs - b.coeffs).norm() / a.coeffs.norm() < 1e-12);
  }
}

TEST_CASE("assembly does not depend on the worker count") {
  TorusGrid g(32, 32);
  auto s = SymbolDescriptor::tao(2.0, 5);
  std::ostringstream a, b;
  export_matrix(assemble(s, g, 1), a);
  export_matrix(assemble(s, g, 4), b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find('\n') != std::string::npos);
}

TEST_CASE("shifted solve inverts the operator") {
  TorusGrid g(32, 32);
  auto m = assemble(SymbolDescriptor::internal_wave(2.0), g);
  auto f = random_field(g, 2, 6);
  auto u = resolvent_solve(m, 0.1, 0.05, f);
  auto r = apply(m, u);
  r.coeffs -= cplx(0.1, 0.05) * u.coeffs;
  CHECK((r.coeffs - f.coeffs).norm() / f.coeffs.norm() < 1e-12);
  ShiftedSolver s(m, cplx(0.1, 0.05));
  CHECK((s.solve(f).coeffs - u.coeffs).norm() < 1e-12);
}

TEST_CASE("eigenvalue counts and level spacing") {
  TorusGrid g(32, 32);
  auto m = assemble(SymbolDescriptor::homogeneous(2.0), g);
  int c = m.component_of[g.index(0, 1)];
  CHECK(count_below(m, c, -10.0) == 0);
  CHECK(count_below(m, c, 10.0) == int(m.components[c].size()));
  CHECK(count_below(m, c, 0.0) <= count_below(m, c, 0.5));
  auto ls = level_spacing(m, 0.0, SpectralField::mode(g, 0, 1));
  CHECK(ls.count > 0);
  CHECK(ls.spacing == doctest::Approx(2 * ls.halfwidth / ls.count));
}

TEST_CASE("dyadic ladder") {
  auto l = dyadic_ladder(2, 4);
  REQUIRE(l.size() == 3);
  CHECK(l[0] == 0.25);
  CHECK(l[2] == 0.0625);
}

TEST_CASE("limiting absorption reports a monotone ladder") {
  TorusGrid g(128, 128);
  auto m = assemble(SymbolDescriptor::internal_wave(2.0), g);
  auto f = SpectralField::mode(g, 0, 1);
  auto sol = limiting_absorption(m, 0.05, f, dyadic_ladder(0, 14));
  CHECK(sol.report.monotone);
  CHECK(sol.report.used_epsilons.size() >= 2);
  for (double e : sol.report.used_epsilons) CHECK(e >= sol.report.clearance * sol.report.spacing.spacing);
  CHECK(sol.iterates.size() == sol.report.used_epsilons.size());
}

TEST_CASE("limiting absorption refuses rungs below the level spacing") {
  TorusGrid g(64, 64);
  auto m = assemble(SymbolDescriptor::internal_wave(2.0), g);
  auto f = SpectralField::mode(g, 0, 1);
  CHECK_THROWS_AS(limiting_absorption(m, 0.05, f, {1e-3, 1e-4}), NoConvergence);
}

TEST_CASE("limiting absorption rejects data on the band edge") {
  TorusGrid g(64, 64);
  auto m = assemble(SymbolDescriptor::internal_wave(2.0), g);
  auto f = SpectralField::mode(g, g.K1(), 1);
  CHECK_THROWS(limiting_absorption(m, 0.05, f, dyadic_ladder(0, 4)));
}

TEST_CASE("the tao plateau mode is an embedded eigenvector") {
  TorusGrid g(64, 64);
  auto s = SymbolDescriptor::tao(2.0, 5);
  auto m = assemble(s, g);
  auto e5 = SpectralField::mode(g, 5, 0);
  CHECK(l2_norm(apply(m, e5)) < 1e-13);
  auto ev = eigencheck(m, -1e-6, 1e-6, 4);
  REQUIRE(!ev.empty());
  double best = 0;
  for (const auto& e : ev) {
    CHECK(std::abs(e.value) < 1e-6);
    auto r = apply(m, e.vector);
    r.coeffs -= e.value * e.vector.coeffs;
    CHECK(l2_norm(r) < 1e-10 * l2_norm(e.vector));
    best = std::max(best, std::abs(inner(e.vector, e5)) / (l2_norm(e.vector) * l2_norm(e5)));
  }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projection removes the eigenvector component") {
  TorusGrid g(16, 16);
  auto u0 = SpectralField::mode(g, 2, 0);
  u0.coeffs /= l2_norm(u0);
  auto u1 = SpectralField::mode(g, 1, 1);
  u1.coeffs /= l2_norm(u1);
  CHECK_THROWS(project_out(SpectralField::mode(g, 2, 0), SpectralField::mode(g, 2, 0)));
  auto f = random_field(g, 1, 5);
  auto p = project_out(u0, f);
  CHECK(std::abs(inner(p, u0)) < 1e-12);
  auto q = project_out_basis({u0, u1}, f);
  CHECK(std::abs(q.at(2, 0)) < 1e-14);
  CHECK(std::abs(q.at(1, 1)) < 1e-14);
  CHECK(std::abs(q.at(3, 3) - f.at(3, 3)) < 1e-14);
}
