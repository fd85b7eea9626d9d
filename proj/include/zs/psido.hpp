#pragma once

#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "zs/fields.hpp"
#include "zs/symbols.hpp"

namespace zs {

using SparseC = Eigen::SparseMatrix<cplx>;

struct NumericalError : std::runtime_error {
  double residual = 0;
  NumericalError(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
};

struct IterationLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OperatorMatrix {
  TorusGrid grid;
  SparseC A;
  bool hermitian = false;
  // connected pieces of the sparsity graph, each sorted, ordered by first index
  std::vector<std::vector<int>> components;
  std::vector<int> component_of;

  int dim() const { return grid.modes(); }
};

double hermitian_defect(const SparseC& A);
// fills hermitian flag and components
OperatorMatrix make_operator(const TorusGrid& g, SparseC A);

// Kohn-Nirenberg columns followed by (A + A*)/2
OperatorMatrix assemble(const SymbolDescriptor& s, const TorusGrid& g, int workers = 1);

SpectralField apply(const OperatorMatrix& m, const SpectralField& f);
// same operator without a matrix: symbol multipliers plus x-multiplication on the grid
SpectralField apply_matrix_free(const SymbolDescriptor& s, const SpectralField& f);

// coordinate text: k1' k2' k1 k2 re im
void export_matrix(const OperatorMatrix& m, std::ostream& os);

// Solves (A - shift) u = f one connected piece at a time; pieces are factorized on first use
// and then shared read-only, so concurrent solve calls are safe.
class ShiftedSolver {
 public:
  ShiftedSolver(const OperatorMatrix& m, cplx shift);
  ~ShiftedSolver();
  ShiftedSolver(const ShiftedSolver&) = delete;
  ShiftedSolver& operator=(const ShiftedSolver&) = delete;

  SpectralField solve(const SpectralField& f) const;
  cplx shift() const { return shift_; }

 private:
  struct Piece;
  const Piece& piece(int c) const;

  const OperatorMatrix* m_;
  cplx shift_;
  std::vector<std::unique_ptr<Piece>> pieces_;
};

SpectralField resolvent_solve(const OperatorMatrix& m, double omega, double eps,
                              const SpectralField& f);

struct LevelSpacing {
  double spacing = 0;
  int count = 0;
  double halfwidth = 0;
  std::vector<int> components;
};

// Eigenvalue density near omega on the pieces reached by f; spacing is the largest
// per-piece value 2w/count (0 when no piece has an eigenvalue in the window).
LevelSpacing level_spacing(const OperatorMatrix& m, double omega, const SpectralField& f,
                           double halfwidth = 0.05);

// number of eigenvalues of A below sigma, restricted to one piece
int count_below(const OperatorMatrix& m, int component, double sigma);

struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<bool> admissible;
  std::vector<double> used_epsilons;
  std::vector<double> increments;  // H^s norms between consecutive used rungs
  double sobolev_s = -1;
  LevelSpacing spacing;
  double clearance = 10;
  bool monotone = false;
  std::string message;
};

struct NoConvergence : std::runtime_error {
  ConvergenceReport report;
  NoConvergence(const std::string& what, ConvergenceReport r)
      : std::runtime_error(what), report(std::move(r)) {}
};

struct ResolventSolution {
  double omega = 0;
  std::vector<double> epsilons;  // the rungs actually solved
  std::vector<SpectralField> iterates;
  SpectralField u;
  ConvergenceReport report;
  double off_lagrangian_fraction = -1;  // filled by callers that run the wave-packet diagnostic
};

struct AbsorptionOptions {
  double spacing_halfwidth = 0.05;
  double clearance = 10.0;
  double sobolev_s = -1.0;
  double edge_mass_limit = 1e-12;  // largest data mass fraction allowed on the band edge; < 0 disables
  bool require_monotone = true;    // false: a growing increment is only recorded in the report
  std::vector<SpectralField> eigenbasis;  // projected out of data and iterates
};

std::vector<double> dyadic_ladder(int j0, int j1);

ResolventSolution limiting_absorption(const OperatorMatrix& m, double omega,
                                      const SpectralField& f, const std::vector<double>& ladder,
                                      const AbsorptionOptions& opt = {});

struct EigenPair {
  double value = 0;
  SpectralField vector;
};

// eigenpairs of the truncated matrix inside [a,b], at most count of them, ordered by value
std::vector<EigenPair> eigencheck(const OperatorMatrix& m, double a, double b, int count = 16);

SpectralField project_out(const SpectralField& u0, const SpectralField& f);
SpectralField project_out_basis(const std::vector<SpectralField>& basis, const SpectralField& f);

}  // namespace zs
