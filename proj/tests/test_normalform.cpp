#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "zs/normalform.hpp"

using namespace zs;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("alpha at zero and a frozen value") {
  CHECK(std::abs(alpha(0.0).value - cplx(0, 1 / (2 * kPi))) < 1e-16);
  auto a = alpha(1.0);
  CHECK(a.value.real() == doctest::Approx(-0.11863133232416372).epsilon(1e-14));
  CHECK(a.value.imag() == doctest::Approx(0.38128640008630982).epsilon(1e-14));
  CHECK(a.phase >= 0);
  CHECK(a.phase < 2 * kPi);
}

TEST_CASE("alpha magnitude matches the reflection formula") {
  for (double x : {-20.0, -5.0, -1.0, -0.5, 0.5, 1.0, 5.0, 20.0, 100.0}) {
    double ref = alpha_magnitude_closed_form(x);
    CHECK(alpha(x).magnitude == doctest::Approx(ref).epsilon(1e-12));
    double sq = std::exp(kPi * x) * (kPi * x / std::sinh(kPi * x)) / (4 * kPi * kPi);
    CHECK(ref * ref == doctest::Approx(sq).epsilon(1e-12));
  }
}

TEST_CASE("theta follows the Stirling expansion") {
  for (double x : {10.0, 50.0, 200.0}) {
    CHECK(theta_asymptotic_defect(x, ThetaReference::Stirling) * x < 0.1);
  }
  // the other sign of the x ln x term drifts away linearly in x ln x
  CHECK(theta_asymptotic_defect(50.0, ThetaReference::Stated) > 0.1);
}

TEST_CASE("unwrapped theta is continuous") {
  std::vector<double> xs;
  for (int i = 0; i <= 400; ++i) xs.push_back(-10 + 0.05 * i);
  auto t = theta_unwrapped(xs);
  for (size_t i = 1; i < t.size(); ++i) CHECK(std::abs(t[i] - t[i - 1]) < 0.5);
}

TEST_CASE("upper boundary power") {
  cplx z(-1.0, 0.7);
  CHECK(std::abs(upper_pow(2.0, z) - std::pow(cplx(2.0, 0), z)) < 1e-15);
  // from above, -2 = 2 e^{i pi}
  CHECK(std::abs(upper_pow(-2.0, z) - std::pow(2.0, -1.0) * std::exp(cplx(0, 0.7 * std::log(2.0))) *
                                          std::exp(z * cplx(0, kPi))) < 1e-15);
  CHECK(std::abs(upper_pow(-2.0, z) - std::pow(cplx(-2.0, 1e-300), z)) < 1e-14);
  CHECK_THROWS(upper_pow(0.0, z));
}

TEST_CASE("T multiplier is unitary with adjoint inverse") {
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> lams{0.7, 1.9};
  ScatteringDataVector f(6, {0, 1}, lams);
  for (int j = 0; j < 2; ++j)
    for (int k = -6; k <= 6; ++k) f.at(j, k) = cplx(nd(rng), nd(rng));
  auto g = t_multiplier(f, lams, +1, TDirection::Forward);
  CHECK(g.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-14));
  auto b = t_multiplier(g, lams, +1, TDirection::Adjoint);
  CHECK((b.stacked() - f.stacked()).norm() < 1e-14);
  CHECK(std::abs(g.at(0, 0) - f.at(0, 0) * std::exp(cplx(0, -alpha(0).phase))) < 1e-15);
}

TEST_CASE("stacked layout round trip") {
  ScatteringDataVector f(2, {3, 4}, {1.0, 2.0});
  CVec v(f.dim());
  for (int i = 0; i < f.dim(); ++i) v[i] = cplx(i, -i);
  f.set_stacked(v);
  CHECK(f.at(1, -2) == cplx(5, -5));
  CHECK(f.stacked() == v);
  CHECK_THROWS(ScatteringDataVector(2, {1}, {1.0, 2.0}));
}

TEST_CASE("model annihilator converges at the stencil order") {
  ModelSolutionSpec spec{0.7, -1, 2, {0.3, cplx(0, 1), 1.0, cplx(0.5, 0.5), -0.2}};
  for (int order : {2, 4}) {
    auto coarse = CylinderGrid::centred(2.5, 0.02, 8);
    auto fine = CylinderGrid::centred(2.5, 0.01, 8);
    double r0 = annihilator_residual(spec, coarse, evaluate_model(spec, coarse), order).max_abs;
    double r1 = annihilator_residual(spec, fine, evaluate_model(spec, fine), order).max_abs;
    CHECK(std::log2(r0 / r1) == doctest::Approx(order).epsilon(0.15));
  }
}

TEST_CASE("cell-centred cylinder grid avoids the origin") {
  auto g = CylinderGrid::centred(1.0, 0.1, 4);
  CHECK(g.x1.size() == 20);
  for (double x : g.x1) CHECK(std::abs(x) >= 0.05 - 1e-15);
  CHECK(g.x1.front() == doctest::Approx(-0.95));
}

TEST_CASE("section coefficient recovers the symbol") {
  cplx a(0.4, -1.1);
  double kappa = 0.8;
  for (int side : {1, -1}) {
    cplx c = a * alpha(kappa).value * upper_pow(side * 0.3, cplx(-1, kappa));
    auto r = section_to_symbol(c, kappa, side, 0.3);
    CHECK_FALSE(r.dropped);
    CHECK(std::abs(r.a - a) < 1e-14);
  }
  CHECK_THROWS(section_to_symbol(1.0, 0.1, 1, 1.5));
}

TEST_CASE("power fit ignores a smooth background") {
  cplx a(0.4, -1.1);
  double kappa = -1.2;
  std::vector<double> pos{0.3, 0.2, 0.15, -0.15, -0.2, -0.3};
  std::vector<cplx> cs, model;
  for (double d : pos) {
    cplx m = alpha(kappa).value * upper_pow(d, cplx(-1, kappa));
    model.push_back(m);
    cs.push_back(a * m + cplx(0.2, 0.1) - 0.5 * d);
  }
  CHECK(std::abs(fit_symbol(cs, pos, kappa, 0.0, 2) - a) < 1e-12);
  CHECK(std::abs(fit_model(cs, model, pos, 2) - a) < 1e-12);
}

TEST_CASE("plateau window transforms") {
  PlateauWindow w;
  CHECK(w.value(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.value(3) < 1e-12);
  // trapezoid transforms of a function that is flat to roundoff at the ends
  for (double om : {0.0, 0.7, 3.0}) {
    cplx h = 0, hx = 0;
    const double dy = 1e-3;
    for (int i = -4000; i <= 4000; ++i) {
      double y = i * dy;
      h += w.value(y) * std::exp(cplx(0, -om * y)) * dy;
      hx += y * w.value(y) * std::exp(cplx(0, -om * y)) * dy;
    }
    CHECK(std::abs(h / (2 * kPi) - w.hat(om)) < 1e-10);
    CHECK(std::abs(hx / (2 * kPi) - w.hat_x(om)) < 1e-10);
  }
}

TEST_CASE("half line transform matches the direct Fourier integral") {
  PlateauWindow w;
  auto kernel = [&](double om) { return cplx(w.hat(om), 0); };
  const double kappa = 0.6, damp = 0.5;
  for (double xi : {-3.0, 0.0, 4.0}) {
    cplx direct = 0;
    const double dy = 5e-4;
    for (int i = -8000; i <= 8000; ++i) {
      double y = i * dy;
      cplx f = w.value(y) * alpha(kappa).value * std::pow(cplx(y, damp), cplx(-1, kappa));
      direct += f * std::exp(cplx(0, -xi * y)) * dy;
    }
    direct /= 2 * kPi;
    CHECK(std::abs(half_line_transform(kernel, xi, kappa, 90.0, damp) - direct) < 1e-6);
  }
}
