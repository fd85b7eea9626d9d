#include "zs/normalform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include <Eigen/QR>

namespace zs {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_2pi(double t) {
  double r = std::fmod(t, 2 * kPi);
  return r < 0 ? r + 2 * kPi : r;
}

struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet gsl_quiet;

const gsl_integration_glfixed_table* gl_table() {
  static const gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(400);
  return t;
}
}  // namespace

AlphaValue alpha(double x) {
  if (!(std::abs(x) <= 700.0)) throw std::overflow_error("alpha argument outside |x| <= 700");
  gsl_sf_result lnr, arg;
  int status = gsl_sf_lngamma_complex_e(1.0, -x, &lnr, &arg);
  if (status) throw std::runtime_error("log-Gamma evaluation failed");
  AlphaValue out;
  out.x = x;
  out.magnitude = std::exp(lnr.val + 0.5 * kPi * x - std::log(2 * kPi));
  out.phase = wrap_2pi(arg.val + 0.5 * kPi);
  out.value = std::polar(out.magnitude, out.phase);
  return out;
}

double alpha_magnitude_closed_form(double x) {
  double r = std::abs(x) < 1e-8 ? 1.0 : std::sqrt(kPi * x / std::sinh(kPi * x));
  return std::exp(0.5 * kPi * x) / (2 * kPi) * r;
}

double theta_reference(double x, ThetaReference ref) {
  double base = x * std::log(std::abs(x)) - x;
  return ref == ThetaReference::Stated ? base + 0.5 * kPi : -base + 0.25 * kPi;
}

double theta_asymptotic_defect(double x, ThetaReference ref) {
  double d = std::remainder(alpha(x).phase - theta_reference(x, ref), 2 * kPi);
  return std::abs(d);
}

std::vector<double> theta_unwrapped(const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    double t = alpha(xs[i]).phase;
    if (i == 0) {
      out[i] = t;
    } else {
      out[i] = out[i - 1] + std::remainder(t - out[i - 1], 2 * kPi);
    }
  }
  return out;
}

cplx upper_pow(double y, cplx z) {
  if (y == 0.0) throw std::invalid_argument("upper_pow at y = 0");
  cplx lg(std::log(std::abs(y)), y < 0 ? kPi : 0.0);
  return std::exp(z * lg);
}

ScatteringDataVector::ScatteringDataVector(int ks, std::vector<int> ids, std::vector<double> lams)
    : Ks(ks), cycle_ids(std::move(ids)), lambdas(std::move(lams)) {
  if (cycle_ids.size() != lambdas.size()) throw std::invalid_argument("circle metadata mismatch");
  circles.assign(cycle_ids.size(), CVec::Zero(2 * Ks + 1));
}

CVec ScatteringDataVector::stacked() const {
  CVec v(dim());
  for (int j = 0; j < circle_count(); ++j) v.segment(j * (2 * Ks + 1), 2 * Ks + 1) = circles[j];
  return v;
}

void ScatteringDataVector::set_stacked(const CVec& v) {
  if (v.size() != dim()) throw std::invalid_argument("stacked size mismatch");
  for (int j = 0; j < circle_count(); ++j) circles[j] = v.segment(j * (2 * Ks + 1), 2 * Ks + 1);
}

double ScatteringDataVector::l2_norm() const {
  double acc = 0;
  for (const auto& c : circles) acc += c.squaredNorm();
  return std::sqrt(2 * kPi * acc);
}

ScatteringDataVector t_multiplier(const ScatteringDataVector& f, const std::vector<double>& lambdas,
                                  int sign, TDirection dir) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (int(lambdas.size()) != f.circle_count()) throw std::invalid_argument("one lambda per circle");
  ScatteringDataVector out = f;
  for (int j = 0; j < f.circle_count(); ++j) {
    if (!(lambdas[j] > 0)) throw std::invalid_argument("lambda must be positive");
    for (int k = -f.Ks; k <= f.Ks; ++k) {
      double th = alpha(k / lambdas[j]).phase;
      cplx ph = std::polar(1.0, dir == TDirection::Forward ? -th : th);
      out.at(j, k) = ph * f.at(j, k);
    }
  }
  return out;
}

CylinderGrid CylinderGrid::centred(double L, double h, int n2) {
  CylinderGrid g;
  g.n2 = n2;
  int m = int(std::llround(2 * L / h));
  for (int i = 0; i < m; ++i) g.x1.push_back(-L + (i + 0.5) * h);
  for (double x : g.x1)
    if (std::abs(x) < 1e-12) throw std::invalid_argument("cylinder grid contains x1 = 0");
  return g;
}

double CylinderGrid::x2(int j) const { return 2 * kPi * j / n2; }

std::vector<cplx> evaluate_model(const ModelSolutionSpec& spec, const CylinderGrid& g) {
  if (int(spec.a.size()) != 2 * spec.K + 1) throw std::invalid_argument("model coefficient count");
  if (2 * spec.K >= g.n2) throw std::invalid_argument("model band exceeds the x2 grid");
  std::vector<cplx> amp(spec.a.size());
  for (int k = -spec.K; k <= spec.K; ++k) amp[k + spec.K] = alpha(spec.gamma() * k).value * spec.coeff(k);
  std::vector<cplx> out(g.x1.size() * g.n2);
  for (size_t i = 0; i < g.x1.size(); ++i) {
    double y = g.x1[i];
    if (y == 0.0) throw std::invalid_argument("model evaluated at x1 = 0");
    for (int k = -spec.K; k <= spec.K; ++k) {
      cplx radial = amp[k + spec.K] * upper_pow(y, cplx(-1.0, spec.gamma() * k));
      if (radial == 0.0) continue;
      for (int j = 0; j < g.n2; ++j) out[i * g.n2 + j] += radial * std::polar(1.0, k * g.x2(j));
    }
  }
  return out;
}

namespace {
std::vector<double> central_stencil(int order) {
  switch (order) {
    case 2: return {-0.5, 0.0, 0.5};
    case 4: return {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    case 6: return {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    case 8:
      return {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  }
  throw std::invalid_argument("finite-difference order must be 2, 4, 6 or 8");
}
}  // namespace

AnnihilatorResult annihilator_residual(const ModelSolutionSpec& spec, const CylinderGrid& g,
                                       const std::vector<cplx>& values, int fd_order, double rmin,
                                       double rmax) {
  const int n2 = g.n2;
  const int nx = int(g.x1.size());
  if (int(values.size()) != nx * n2) throw std::invalid_argument("value count mismatch");
  auto st = central_stencil(fd_order);
  const int r = int(st.size()) / 2;
  const double h = g.x1[1] - g.x1[0];

  // spectral D_x2 row by row
  std::vector<cplx> d2(values.size());
  std::vector<cplx> row(n2);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < n2; ++j) row[j] = values[i * n2 + j];
    auto hat = dft(row, false);
    for (int m = 0; m < n2; ++m) {
      int k = m <= n2 / 2 ? m : m - n2;
      if (2 * std::abs(k) == n2) k = 0;
      hat[m] *= double(k) / n2;  // D = -i d/dx2 acts as k
    }
    auto back = dft(hat, true);
    for (int j = 0; j < n2; ++j) d2[i * n2 + j] = back[j];
  }

  AnnihilatorResult res;
  const double gam = spec.gamma();
  const cplx I(0, 1);
  for (int i = r; i < nx - r; ++i) {
    double x = g.x1[i];
    if (std::abs(x) < rmin || std::abs(x) > rmax) continue;
    if ((g.x1[i - r] > 0) != (g.x1[i + r] > 0)) continue;
    res.x1.push_back(x);
    for (int j = 0; j < n2; ++j) {
      cplx du = 0;
      for (int s = -r; s <= r; ++s) du += st[s + r] * values[(i + s) * n2 + j];
      du /= h;
      cplx D1u = -I * du;
      cplx Lu = gam * d2[i * n2 + j] - x * D1u + I * values[i * n2 + j];
      Lu *= spec.lambda;
      res.residual.push_back(Lu);
      res.max_abs = std::max(res.max_abs, std::abs(Lu));
    }
  }
  return res;
}

SymbolRecovery section_to_symbol(cplx c, double kappa, int side, double delta) {
  if (!(delta > 0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  cplx model = alpha(kappa).value * upper_pow(side * delta, cplx(-1.0, kappa));
  SymbolRecovery out;
  if (std::abs(model) < 1e-12) {
    out.dropped = true;
    return out;
  }
  out.a = c / model;
  return out;
}

cplx fit_symbol(const std::vector<cplx>& cs, const std::vector<double>& positions, double kappa,
                double shift, int nsmooth) {
  const int m = int(cs.size());
  if (m == 0 || positions.size() != cs.size()) throw std::invalid_argument("ladder size mismatch");
  nsmooth = std::max(0, std::min(nsmooth, m - 1));
  Eigen::MatrixXcd M(m, 1 + nsmooth);
  Eigen::VectorXcd rhs(m);
  const cplx al = alpha(kappa).value;
  for (int i = 0; i < m; ++i) {
    double d = positions[i];
    cplx sing = shift > 0 ? std::exp(cplx(-1.0, kappa) * std::log(cplx(d, shift)))
                          : upper_pow(d, cplx(-1.0, kappa));
    M(i, 0) = al * sing;
    for (int p = 0; p < nsmooth; ++p) M(i, 1 + p) = std::pow(d, p);
    rhs[i] = cs[i];
  }
  Eigen::VectorXcd sol = M.colPivHouseholderQr().solve(rhs);
  return sol[0];
}

cplx fit_model(const std::vector<cplx>& cs, const std::vector<cplx>& model, const std::vector<double>& positions,
               int nsmooth) {
  const int m = int(cs.size());
  if (m == 0 || positions.size() != cs.size() || model.size() != cs.size())
    throw std::invalid_argument("ladder size mismatch");
  nsmooth = std::max(0, std::min(nsmooth, m - 1));
  Eigen::MatrixXcd M(m, 1 + nsmooth);
  Eigen::VectorXcd rhs(m);
  for (int i = 0; i < m; ++i) {
    M(i, 0) = model[i];
    for (int p = 0; p < nsmooth; ++p) M(i, 1 + p) = std::pow(positions[i], p);
    rhs[i] = cs[i];
  }
  Eigen::VectorXcd sol = M.colPivHouseholderQr().solve(rhs);
  return sol[0];
}

double PlateauWindow::value(double y) const {
  return 0.5 * (std::erf((y + a) / s) - std::erf((y - a) / s));
}

double PlateauWindow::hat(double om) const {
  double g = std::exp(-0.25 * s * s * om * om);
  if (std::abs(om) < 1e-8) return a / kPi * g;
  return std::sin(a * om) / (kPi * om) * g;
}

cplx PlateauWindow::hat_x(double om) const {
  // i d/d om of hat
  double g = std::exp(-0.25 * s * s * om * om);
  double dg = -0.5 * s * s * om * g;
  double f, df;
  if (std::abs(om) < 1e-5) {
    f = a / kPi * (1 - a * a * om * om / 6);
    df = -a * a * a * om / (3 * kPi);
  } else {
    f = std::sin(a * om) / (kPi * om);
    df = (a * std::cos(a * om) * om - std::sin(a * om)) / (kPi * om * om);
  }
  return cplx(0, df * g + f * dg);
}

cplx half_line_transform(const std::function<cplx(double)>& kernel, double xi, double kappa,
                         double reach, double damping) {
  double lo = std::max(0.0, xi - reach), hi = xi + reach;
  if (hi <= 0) return 0.0;
  const auto* t = gl_table();
  cplx acc = 0;
  if (lo < 1.0) {
    // eta = e^{-t}, t in [0, 40]
    for (size_t i = 0; i < t->n; ++i) {
      double tt, w;
      gsl_integration_glfixed_point(0.0, 40.0, i, &tt, &w, t);
      double eta = std::exp(-tt);
      acc += w * eta * std::polar(std::exp(-damping * eta), -kappa * std::log(eta)) * kernel(xi - eta);
    }
    lo = 1.0;
  }
  if (hi > lo) {
    for (size_t i = 0; i < t->n; ++i) {
      double eta, w;
      gsl_integration_glfixed_point(lo, hi, i, &eta, &w, t);
      acc += w * std::polar(std::exp(-damping * eta), -kappa * std::log(eta)) * kernel(xi - eta);
    }
  }
  return acc / (2 * kPi);
}

}  // namespace zs
