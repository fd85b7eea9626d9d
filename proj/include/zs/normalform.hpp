#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "zs/fields.hpp"

namespace zs {

struct AlphaValue {
  double x = 0;
  cplx value;
  double magnitude = 0;
  double phase = 0;  // in [0, 2 pi)
};

// alpha(x) = i Gamma(1 - i x) e^{pi x / 2} / (2 pi), via log-Gamma; |x| <= 700
AlphaValue alpha(double x);
// e^{pi x/2}/(2 pi) sqrt(pi x / sinh pi x), independent of any Gamma evaluation
double alpha_magnitude_closed_form(double x);

enum class ThetaReference {
  Stated,   // x ln x - x + pi/2
  Stirling  // -(x ln x - x) + pi/4, the expansion of arg(i Gamma(1 - i x))
};
double theta_reference(double x, ThetaReference ref);
// circular distance between theta(x) and the reference expansion
double theta_asymptotic_defect(double x, ThetaReference ref = ThetaReference::Stated);
// continuous lift of theta over an increasing sample
std::vector<double> theta_unwrapped(const std::vector<double>& xs);

// (y + i0)^z, boundary value from Im y > 0
cplx upper_pow(double y, cplx z);

struct ScatteringDataVector {
  int Ks = 0;
  std::vector<int> cycle_ids;
  std::vector<double> lambdas;
  std::vector<CVec> circles;  // each of length 2Ks+1, k = -Ks..Ks

  ScatteringDataVector() = default;
  ScatteringDataVector(int ks, std::vector<int> ids, std::vector<double> lams);

  int circle_count() const { return int(circles.size()); }
  int dim() const { return circle_count() * (2 * Ks + 1); }
  cplx& at(int j, int k) { return circles[j][k + Ks]; }
  cplx at(int j, int k) const { return circles[j][k + Ks]; }
  CVec stacked() const;
  void set_stacked(const CVec& v);
  double l2_norm() const;
};

enum class TDirection { Forward, Adjoint };

// T f_j(k) = e^{-i theta(k / lambda_j)} f_j(k); the adjoint conjugates the phase.
// sign selects which cycle family the lambdas belong to and is kept for bookkeeping.
ScatteringDataVector t_multiplier(const ScatteringDataVector& f, const std::vector<double>& lambdas,
                                  int sign, TDirection dir);

struct ModelSolutionSpec {
  double lambda = 1.0;
  int side = +1;  // +1 sink model, -1 mirrored source model
  int K = 0;
  std::vector<cplx> a;  // k = -K..K

  double gamma() const { return side / lambda; }
  cplx coeff(int k) const { return a[k + K]; }
};

struct CylinderGrid {
  std::vector<double> x1;
  int n2 = 16;

  // cell-centred points on [-L, L] with spacing h; never hits x1 = 0 when L/h is an integer
  static CylinderGrid centred(double L, double h, int n2);
  double x2(int j) const;
};

// row-major values [i * n2 + j]
std::vector<cplx> evaluate_model(const ModelSolutionSpec& spec, const CylinderGrid& g);

struct AnnihilatorResult {
  std::vector<double> x1;        // points where the residual was formed
  std::vector<cplx> residual;    // row-major over x1 x n2
  double max_abs = 0;
};

// L = gamma D_x2 - x1 D_x1 + i, scaled by lambda so the sink case reads D_x2 - lambda x1 D_x1 + i lambda
AnnihilatorResult annihilator_residual(const ModelSolutionSpec& spec, const CylinderGrid& g,
                                       const std::vector<cplx>& values, int fd_order,
                                       double rmin = 0.2, double rmax = 2.0);

struct SymbolRecovery {
  cplx a = 0;
  bool dropped = false;
};

// trace coefficient c at signed position d = side*delta -> a, with kappa = gamma*k
SymbolRecovery section_to_symbol(cplx c, double kappa, int side, double delta);

// least-squares fit of c(d) = alpha(kappa) a (d + i shift)^{-1+i kappa} + sum_p c_p d^p
// over the signed positions; returns a
cplx fit_symbol(const std::vector<cplx>& cs, const std::vector<double>& positions, double kappa,
                double shift = 0.0, int nsmooth = 2);
// same fit against given model values in place of the bare power
cplx fit_model(const std::vector<cplx>& cs, const std::vector<cplx>& model, const std::vector<double>& positions,
               int nsmooth = 2);

// erf plateau window w(y) = (erf((y+a)/s) - erf((y-a)/s))/2 and its transforms
struct PlateauWindow {
  double a = 1.1;
  double s = 0.12;
  double value(double y) const;
  // (1/2pi) int w(y) e^{-i om y} dy
  double hat(double om) const;
  // (1/2pi) int y w(y) e^{-i om y} dy
  cplx hat_x(double om) const;
};

// (1/2pi) int_0^inf K(xi - eta) eta^{-i kappa} e^{-damping eta} d eta; the Fourier transform at xi of
// W(y) alpha(kappa) (y + i damping)^{-1 + i kappa} when K is the transform of W
cplx half_line_transform(const std::function<cplx(double)>& kernel, double xi, double kappa,
                         double reach = 90.0, double damping = 0.0);

}  // namespace zs
