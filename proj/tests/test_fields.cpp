#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "zs/fields.hpp"

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

TEST_CASE("grid indexing covers the band once") {
  TorusGrid g(16, 12);
  CHECK(g.K1() == 7);
  CHECK(g.K2() == 5);
  CHECK(g.modes() == 15 * 11);
  std::vector<int> seen(g.modes(), 0);
  for (int k1 = -g.K1(); k1 <= g.K1(); ++k1)
    for (int k2 = -g.K2(); k2 <= g.K2(); ++k2) {
      int i = g.index(k1, k2);
      seen[i]++;
      CHECK(g.k1_of(i) == k1);
      CHECK(g.k2_of(i) == k2);
    }
  for (int s : seen) CHECK(s == 1);
  CHECK_FALSE(g.in_band(8, 0));
}

TEST_CASE("single mode synthesizes to a plane wave") {
  TorusGrid g(16, 16);
  auto v = synthesize(SpectralField::mode(g, 3, -2));
  double err = 0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      err = std::max(err, std::abs(v[i * g.n2 + j] - std::exp(cplx(0, 3 * g.x1(i) - 2 * g.x2(j)))));
  CHECK(err < 1e-13);
}

TEST_CASE("analyze inverts synthesize on the band") {
  TorusGrid g(32, 24);
  auto f = random_field(g, 7, 10);
  auto back = analyze(g, synthesize(f));
  CHECK((back.coeffs - f.coeffs).norm() / f.coeffs.norm() < 1e-13);
}

TEST_CASE("dft round trip and sign convention") {
  std::vector<cplx> v{1.0, cplx(0, 2), -3.0, cplx(1, 1), 0.5};
  auto fw = dft(v, false);
  auto bw = dft(fw, true);
  for (size_t i = 0; i < v.size(); ++i) CHECK(std::abs(bw[i] / double(v.size()) - v[i]) < 1e-14);
  // e^{2 pi i j/5} has all its forward weight on m = 1
  std::vector<cplx> w(5);
  for (int j = 0; j < 5; ++j) w[j] = std::exp(cplx(0, 2 * std::numbers::pi * j / 5));
  auto fwd = dft(w, false);
  CHECK(std::abs(fwd[1] - 5.0) < 1e-13);
  CHECK(std::abs(fwd[0]) < 1e-13);
}

TEST_CASE("Parseval between grid and coefficients") {
  TorusGrid g(32, 32);
  auto f = random_field(g, 11, 12);
  double a = grid_l2_squared(g, synthesize(f));
  double b = l2_norm(f) * l2_norm(f);
  CHECK(std::abs(a - b) / b < 1e-12);
  CHECK(std::abs(inner(f, f).real() - b) / b < 1e-14);
  CHECK(sobolev_norm(f, 0) == doctest::Approx(l2_norm(f)).epsilon(1e-14));
}

TEST_CASE("Sobolev norms are ordered in s") {
  TorusGrid g(32, 32);
  auto f = random_field(g, 3, 14);
  CHECK(sobolev_norm(f, -1) < sobolev_norm(f, 0));
  CHECK(sobolev_norm(f, 0) < sobolev_norm(f, 1));
}

TEST_CASE("high frequency fraction") {
  TorusGrid g(32, 32);
  SpectralField f(g);
  f.at(1, 1) = 1.0;
  f.at(10, 0) = 1.0;
  CHECK(high_frequency_fraction(f, 8) == doctest::Approx(0.5));
  CHECK(high_frequency_fraction(f, 12) == doctest::Approx(0.0));
}

TEST_CASE("atom coefficients agree with direct summation") {
  TorusGrid g(64, 64);
  WavePacketAtom a{1.0, 2.5, 0.7, 0.125};
  auto direct = atom_values(g, a);
  auto spec = synthesize(atom_field(g, a));
  double err = 0, mx = 0;
  for (size_t i = 0; i < direct.size(); ++i) {
    err = std::max(err, std::abs(direct[i] - spec[i]));
    mx = std::max(mx, std::abs(direct[i]));
  }
  CHECK(err / mx < 1e-8);
  CHECK(l2_norm(atom_field(g, a)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matched plane wave has unit wave packet intensity") {
  TorusGrid g(128, 128);
  auto u = SpectralField::mode(g, 8, 0);
  WavePacketAtom a{2.0, 1.0, 0.0, 0.125};
  auto w = wavepacket_transform(u, {a});
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-3));
  WavePacketAtom off{2.0, 1.0, std::numbers::pi / 2, 0.125};
  CHECK(wavepacket_transform(u, {off})[0] < 1e-3);
}

TEST_CASE("atoms outside the band are rejected") {
  TorusGrid g(16, 16);
  WavePacketAtom a{0, 0, 0, 0.01};
  CHECK_THROWS_AS(check_in_band(g, a), OutOfBand);
}

TEST_CASE("field dump round trip keeps every bit") {
  TorusGrid g(16, 8);
  auto f = random_field(g, 5, 3);
  std::string path = "field_roundtrip.zsf";
  write_field(path, f, "note");
  auto back = read_field(path);
  CHECK(back.grid == g);
  CHECK((back.coeffs - f.coeffs).norm() == 0.0);
  auto bytes = field_dump_bytes(f, "note");
  CHECK(bytes.substr(0, 4) == "ZSFD");
  CHECK(bytes.find("ZSMD") != std::string::npos);
  CHECK(field_dump_bytes(f).find("ZSMD") == std::string::npos);
}
