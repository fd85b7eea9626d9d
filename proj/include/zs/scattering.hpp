#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zs/dynamics.hpp"
#include "zs/fields.hpp"
#include "zs/normalform.hpp"
#include "zs/psido.hpp"

namespace zs {

// Data vectors use the trivialization f(k) = e^{i theta(gamma k)} a(k), where a is the
// coefficient of alpha(gamma k) (x1loc + i0)^{-1 + i gamma k} e^{i k x2} near the cycle.

struct MicrolocalSolution {
  SpectralField u;
  SpectralField g;  // (P - omega) u
  std::vector<int> cycle_ids;
  double g_high_fraction = 0;  // mass of g above half the band
};

struct AnsatzOptions {
  PlateauWindow window;
};

// g is the band restriction of (P - omega) applied to the ansatz on a grid one mode wider,
// so the truncation edge does not see a missing neighbour
MicrolocalSolution incoming_ansatz(const SymbolDescriptor& s, const TorusGrid& grid, double omega,
                                   const ScatteringDataVector& f,
                                   const std::vector<LimitCycle>& sources,
                                   const AnsatzOptions& opt = {});

struct ExtractOptions {
  std::vector<double> deltas{0.3, 0.2, 0.15};
  double taper_lo = 0.1;  // erfc taper in |k1|/K between these
  double taper_hi = 0.9;
  int nsmooth = 1;
  bool band_model = true;  // fit against the tapered band-limited model instead of the bare power
  double eps = 0.0;  // absorption of the rung the field came from; shifts the fitted singularity
  PlateauWindow window;
};

ScatteringDataVector extract_data(const SpectralField& u, const std::vector<LimitCycle>& cycles,
                                  int Ks, const ExtractOptions& opt = {});

struct PoissonOptions {
  std::vector<double> ladder = dyadic_ladder(0, 14);
  AbsorptionOptions absorption = smooth_defect_absorption();
  AnsatzOptions ansatz;

  // the defect g decays but is not band-limited; allow the same tail as its smoothness check
  static AbsorptionOptions smooth_defect_absorption() {
    AbsorptionOptions o;
    o.edge_mass_limit = 1e-6;
    o.require_monotone = false;
    return o;
  }
};

struct PoissonResult {
  MicrolocalSolution ansatz;
  ResolventSolution correction;
  SpectralField u;                   // ansatz minus the extrapolated resolvent
  std::vector<SpectralField> rungs;  // ansatz minus each admissible iterate
  double residual = 0;               // ||(P - omega) u||_{H^s}
};

PoissonResult poisson(const SymbolDescriptor& s, const OperatorMatrix& m, double omega, const ScatteringDataVector& f,
                      const std::vector<LimitCycle>& sources, const PoissonOptions& opt = {});

// outgoing data of a Poisson solution: each rung extracted with its own absorption shift,
// then the same Richardson step as the field
ScatteringDataVector outgoing_data(const PoissonResult& p, const std::vector<LimitCycle>& sinks, int Ks,
                                   const ExtractOptions& opt, bool shifted = true);

struct PairingResult {
  cplx lhs = 0;  // (i/4pi^2) (<Pu1,u2> - <u1,Pu2>)
  cplx rhs = 0;  // sum over sinks minus sum over sources of lambda <f1,f2> / 4pi^2
  double mismatch = 0;
};

PairingResult boundary_pairing(const OperatorMatrix& m, const SpectralField& u1, const SpectralField& u2,
                               const ScatteringDataVector& out1, const ScatteringDataVector& out2,
                               const ScatteringDataVector& in1, const ScatteringDataVector& in2);

// explicit model on R x S^1 with P = D2 D1^{-1} - lambda x1: u = W (sink part + mirrored source part)
struct CylinderMode {
  int k = 0;
  cplx sink = 0;
  cplx source = 0;
};

struct CylinderPairingOptions {
  double lambda = 1.0;
  PlateauWindow window;
  double xi_max = 80.0;
  int nodes = 32001;
  double delta = 0.5;  // where the data are read off
};

PairingResult model_cylinder_pairing(const std::vector<CylinderMode>& modes,
                                     const CylinderPairingOptions& opt = {});
// B(u1, u) for a Gaussian u1 = exp(-(x1 - c)^2 / (2 w^2)) e^{i k x2}
cplx model_cylinder_pairing_smooth(const std::vector<CylinderMode>& modes, int k, double c, double w,
                                   const CylinderPairingOptions& opt = {});

enum class MatrixKind { Raw, Conjugated };

struct ScatteringMatrixNumeric {
  MatrixKind kind = MatrixKind::Raw;
  Eigen::MatrixXcd S;
  double omega = 0;
  int n = 0;
  int Ks = 0;
  std::vector<int> source_ids, sink_ids;
  std::vector<double> source_lambdas, sink_lambdas;
  std::vector<double> source_gammas, sink_gammas;
  std::vector<double> used_epsilons;
  std::vector<double> deltas;
  int nonmonotone_columns = 0;  // columns whose absorption increments grew along the ladder

  // ||S*S - I||_2 after weighting circles by sqrt(lambda)
  double unitarity_defect() const;
  double max_column_norm() const;
};

struct ColumnFailure : std::runtime_error {
  int column = 0;
  ColumnFailure(const std::string& w, int c) : std::runtime_error(w), column(c) {}
};

struct ScatterOptions {
  int Ks = 8;
  PoissonOptions poisson;
  ExtractOptions extract;
  bool shifted_extraction = true;
  int workers = 1;
};

ScatteringMatrixNumeric scattering_matrix(const SymbolDescriptor& s, const OperatorMatrix& m, double omega,
                                          const std::vector<LimitCycle>& sources,
                                          const std::vector<LimitCycle>& sinks,
                                          const ScatterOptions& opt = {});

ScatteringMatrixNumeric conjugate(const ScatteringMatrixNumeric& S);

// moves the phase origin of one circle by phi (sink circle when sink is true)
ScatteringMatrixNumeric gauge_shift(const ScatteringMatrixNumeric& S, int circle, bool sink, double phi);

ScatteringDataVector apply_matrix(const ScatteringMatrixNumeric& S, const ScatteringDataVector& f);

struct PacketResult {
  int source = 0;
  double y0 = 0, eta0 = 0;
  double ystar = 0, ypred = 0, err = 0;
  int sink = -1, sink_pred = -1;
  int eta_sign = 0, eta_sign_pred = 0;
  bool conclusive = true;
  bool branch_ok = false;
  bool position_ok = false;
};

struct FioOptions {
  int packets = 16;  // per source circle and frequency sign
  double width = 1.5;
  double eta0 = -1;  // default Ks/2
  double min_mass = 0.1;
  int samples = 256;
};

struct FioReport {
  double omega = 0;
  int n = 0, Ks = 0;
  double defect = 0;
  double defect_raw = 0;
  std::vector<PacketResult> packets;
  double position_fraction = 0;
  double branch_fraction = 0;
  int conclusive = 0;
};

FioReport fio_check(const ScatteringMatrixNumeric& S_rel, const ScatteringRelationTable& table,
                    const FioOptions& opt = {});

nlohmann::json to_json(const FioReport& r);
void export_matrix(const ScatteringMatrixNumeric& S, std::ostream& os);

}  // namespace zs
