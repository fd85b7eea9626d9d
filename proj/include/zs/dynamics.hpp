#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "zs/fields.hpp"
#include "zs/symbols.hpp"

namespace zs {

struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DriftAbort : std::runtime_error {
  double drift = 0;
  DriftAbort(const std::string& w, double d) : std::runtime_error(w), drift(d) {}
};
struct StepUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonHyperbolic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CospherePoint {
  double x1 = 0, x2 = 0, theta = 0;
};

// angles reduced to [0, 2pi); x1 is left alone for the normal-form family (it lives on R)
CospherePoint reduce(const SymbolDescriptor& s, CospherePoint p);
double circular_distance(double a, double b);

double symbol_at(const SymbolDescriptor& s, const CospherePoint& p);
// (x1', x2', theta') of the rescaled Hamiltonian field at xi = (cos theta, sin theta)
std::array<double, 3> rescaled_field(const SymbolDescriptor& s, const CospherePoint& p);

// theta on Sigma(omega) near the guess, by Newton in theta
double project_to_sigma(const SymbolDescriptor& s, double omega, double x1, double x2,
                        double theta_guess);

struct Trajectory {
  std::vector<double> t;
  std::vector<CospherePoint> points;
  double max_drift = 0;
};

// adaptive Dormand-Prince; aborts when |p - omega| exceeds drift_limit
Trajectory integrate(const SymbolDescriptor& s, double omega, const CospherePoint& start, double t0,
                     double t1, double tol = 1e-10, double drift_limit = 1e-6);

enum class CycleKind { Sink, Source };

struct LimitCycle {
  int id = 0;
  CycleKind kind = CycleKind::Sink;
  SymbolDescriptor symbol;  // the model the cycle belongs to
  double omega = 0;
  double x1 = 0;      // anchor on the section x2 = 0
  double theta = 0;
  std::vector<CospherePoint> samples;
  double period = 0;  // flow time of one lap
  double lyapunov = 0;
  double lyapunov_monodromy = 0;
  double multiplier = 0;
  int orientation = 1;  // sign of cos theta on the cycle
  double gamma = 0;     // signed normal-form exponent, |gamma| = 1/lambda to leading order
};

struct FindOptions {
  int seeds = 8;
  double horizon = 100;
  double tol = 1e-10;
  int workers = 1;
};

// sinks first, then sources; each group ordered by x1 in (-pi, pi], then theta
std::vector<LimitCycle> find_cycles(const SymbolDescriptor& s, double omega,
                                    const FindOptions& opt = {});

// throws AssumptionViolation when the rescaled field vanishes somewhere on Sigma(omega)
void check_no_fixed_points(const SymbolDescriptor& s, double omega, int grid = 24);

struct LyapunovEstimate {
  double lambda = 0;             // Richardson-refined return-map derivative
  double lambda_monodromy = 0;   // variational monodromy
  double multiplier = 0;
  double period = 0;
};

LyapunovEstimate lyapunov(const LimitCycle& c, double section_x2 = 0.0);

// one lap of the return map in x2-time: forward for sinks, backward for sources
struct ReturnResult {
  double x1 = 0, theta = 0, time = 0;
};
ReturnResult return_map(const SymbolDescriptor& s, double omega, double x1, double theta_guess,
                        double x2_start, int direction, double tol = 1e-13);

struct CrossSection {
  int cycle_id = 0;
  int side = 1;         // which transverse side, in local coordinates
  double offset = 0;
  double gamma = 0;
  std::vector<double> z;
  std::vector<CospherePoint> points;
  std::vector<double> mu;
  double min_angle_deg = 0;
  double invariance_defect = 0;
  int birkhoff_iterations = 0;
};

CrossSection build_section(const LimitCycle& c, double offset, int side = 1, int m = 64);

struct RelationRow {
  int source = 0, sigma = 1;
  int sink = -1, sigma_out = 0;
  std::vector<double> z, y, dydz;  // y is a continuous lift
  bool single_target = true;
  bool monotone = false;
  int winding = 0;

  double predict(double z0) const;  // y(z0) by periodic interpolation of the lift
};

struct ScatteringRelationTable {
  double offset = 0;
  std::vector<RelationRow> rows;  // ordered by (source, sigma = +1, -1)
};

struct BudgetError : std::runtime_error {
  CospherePoint stray;
  BudgetError(const std::string& w, CospherePoint p) : std::runtime_error(w), stray(p) {}
};

struct RelationOptions {
  int samples = 32;
  double offset = 0.1;
  double budget = 200;
  double glue = 0.3;  // normal-form family: |x1loc| where the mirrored source hands over
  bool reverse = false;  // sink -> source by the backward flow
  int workers = 1;
};

ScatteringRelationTable scattering_relation(const std::vector<LimitCycle>& sources,
                                            const std::vector<LimitCycle>& sinks,
                                            const RelationOptions& opt = {});

// local coordinate x1loc = orientation * (x1 - x1*) and section phase z = x2 + gamma ln|x1loc|
double local_x1(const LimitCycle& c, double x1);
double section_phase(const LimitCycle& c, double x1, double x2);

// fraction of wave-packet energy at scale h away from the Lagrangians over the given cycles;
// an atom counts as on when |x1 - x1*| and the angle gap are both within 3 h^{1/2}
double off_lagrangian_fraction(const SpectralField& u, const std::vector<LimitCycle>& cycles,
                               double h, int workers = 1);

}  // namespace zs
