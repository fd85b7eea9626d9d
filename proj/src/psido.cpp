#include "zs/psido.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "zs/parallel.hpp"

namespace zs {

namespace {
constexpr double kPi = std::numbers::pi;

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}
}  // namespace

double hermitian_defect(const SparseC& A) {
  SparseC D = A - SparseC(A.adjoint());
  double m = 0;
  for (int c = 0; c < D.outerSize(); ++c)
    for (SparseC::InnerIterator it(D, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

OperatorMatrix make_operator(const TorusGrid& g, SparseC A) {
  if (A.rows() != g.modes() || A.cols() != g.modes()) throw std::invalid_argument("matrix size");
  OperatorMatrix m;
  m.grid = g;
  A.makeCompressed();
  m.A = std::move(A);
  m.hermitian = hermitian_defect(m.A) <= 1e-12;

  const int N = g.modes();
  std::vector<int> parent(N);
  std::iota(parent.begin(), parent.end(), 0);
  for (int c = 0; c < N; ++c)
    for (SparseC::InnerIterator it(m.A, c); it; ++it) {
      int a = find_root(parent, int(it.row())), b = find_root(parent, c);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  m.component_of.assign(N, -1);
  for (int i = 0; i < N; ++i) {
    int r = find_root(parent, i);
    if (m.component_of[r] < 0) {
      m.component_of[r] = int(m.components.size());
      m.components.emplace_back();
    }
    m.component_of[i] = m.component_of[r];
    m.components[m.component_of[i]].push_back(i);
  }
  return m;
}

OperatorMatrix assemble(const SymbolDescriptor& s, const TorusGrid& g, int workers) {
  if (s.family == Family::NormalForm)
    throw std::invalid_argument("normal-form symbols are not quantized on the torus");
  const int N = g.modes();
  const TorusGrid sample(16, 16);
  std::vector<std::vector<Eigen::Triplet<cplx>>> cols(N);
  parallel_for(N, workers, [&](int idx) {
    const int k1 = g.k1_of(idx), k2 = g.k2_of(idx);
    std::vector<cplx> vals(sample.points());
    for (int i = 0; i < sample.n1; ++i)
      for (int j = 0; j < sample.n2; ++j) {
        double v;
        if (s.family == Family::Homogeneous && k1 == 0 && k2 == 0)
          v = -s.beta * std::cos(sample.x1(i));  // xi2/|xi| taken as 0 at the zero mode
        else
          v = evaluate(s, sample.x1(i), sample.x2(j), k1, k2);
        vals[i * sample.n2 + j] = v;
      }
    SpectralField c = analyze(sample, vals);
    for (int m = 0; m < sample.modes(); ++m) {
      cplx v = c.coeffs[m];
      if (std::abs(v) < 1e-13) continue;
      int r1 = k1 + sample.k1_of(m), r2 = k2 + sample.k2_of(m);
      if (!g.in_band(r1, r2)) continue;
      cols[idx].emplace_back(g.index(r1, r2), idx, v);
    }
  });
  std::vector<Eigen::Triplet<cplx>> trip;
  for (auto& c : cols) trip.insert(trip.end(), c.begin(), c.end());
  SparseC A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  SparseC H = 0.5 * (A + SparseC(A.adjoint()));
  H.prune(cplx(0.0), 0.0);
  return make_operator(g, std::move(H));
}

SpectralField apply(const OperatorMatrix& m, const SpectralField& f) {
  if (!(f.grid == m.grid)) throw std::invalid_argument("grid mismatch");
  return SpectralField(m.grid, m.A * f.coeffs);
}

SpectralField apply_matrix_free(const SymbolDescriptor& s, const SpectralField& f) {
  if (s.family == Family::NormalForm)
    throw std::invalid_argument("normal-form symbols are not quantized on the torus");
  const auto& g = f.grid;
  SpectralField diag(g), cu(g);
  for (int idx = 0; idx < g.modes(); ++idx) {
    int k1 = g.k1_of(idx), k2 = g.k2_of(idx);
    double b0;
    if (s.family == Family::Homogeneous)
      b0 = (k1 == 0 && k2 == 0) ? 0.0 : k2 / std::hypot(double(k1), double(k2));
    else
      b0 = k2 / std::sqrt(1.0 + double(k1) * k1 + double(k2) * k2);
    diag.coeffs[idx] = b0 * f.coeffs[idx];
    cu.coeffs[idx] = s.coupling(k1, k2) * f.coeffs[idx];
  }
  // (cos x1 . c(D) u + c(D)(cos x1 . u)) / 2
  auto times_cos = [&](const SpectralField& v) {
    auto vals = synthesize(v);
    for (int i = 0; i < g.n1; ++i) {
      double c = std::cos(g.x1(i));
      for (int j = 0; j < g.n2; ++j) vals[i * g.n2 + j] *= c;
    }
    return analyze(g, vals);
  };
  SpectralField t1 = times_cos(cu);
  SpectralField t2 = times_cos(f);
  for (int idx = 0; idx < g.modes(); ++idx)
    t2.coeffs[idx] *= s.coupling(g.k1_of(idx), g.k2_of(idx));
  SpectralField out(g);
  out.coeffs = diag.coeffs + 0.5 * (t1.coeffs + t2.coeffs);
  return out;
}

void export_matrix(const OperatorMatrix& m, std::ostream& os) {
  const auto& g = m.grid;
  char buf[256];
  for (int c = 0; c < m.A.outerSize(); ++c)
    for (SparseC::InnerIterator it(m.A, c); it; ++it) {
      int r = int(it.row());
      std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g %.17g\n", g.k1_of(r), g.k2_of(r),
                    g.k1_of(c), g.k2_of(c), it.value().real(), it.value().imag());
      os << buf;
    }
}

namespace {
// sub-matrix of A (minus shift) on one piece, in local indices
SparseC piece_matrix(const OperatorMatrix& m, int comp, cplx shift) {
  const auto& idx = m.components[comp];
  const int n = int(idx.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int lc = 0; lc < n; ++lc) {
    int c = idx[lc];
    bool diag = false;
    for (SparseC::InnerIterator it(m.A, c); it; ++it) {
      int lr = int(std::lower_bound(idx.begin(), idx.end(), int(it.row())) - idx.begin());
      cplx v = it.value();
      if (int(it.row()) == c) {
        v -= shift;
        diag = true;
      }
      trip.emplace_back(lr, lc, v);
    }
    if (!diag) trip.emplace_back(lc, lc, -shift);
  }
  SparseC P(n, n);
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

std::vector<int> touched_components(const OperatorMatrix& m, const CVec& v) {
  std::vector<char> hit(m.components.size(), 0);
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) hit[m.component_of[i]] = 1;
  std::vector<int> out;
  for (size_t c = 0; c < hit.size(); ++c)
    if (hit[c]) out.push_back(int(c));
  return out;
}
}  // namespace

struct ShiftedSolver::Piece {
  std::once_flag once;
  Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
  bool ok = false;
};

ShiftedSolver::ShiftedSolver(const OperatorMatrix& m, cplx shift) : m_(&m), shift_(shift) {
  pieces_.resize(m.components.size());
  for (auto& p : pieces_) p = std::make_unique<Piece>();
}

ShiftedSolver::~ShiftedSolver() = default;

const ShiftedSolver::Piece& ShiftedSolver::piece(int c) const {
  Piece& p = *pieces_[c];
  std::call_once(p.once, [&] {
    SparseC P = piece_matrix(*m_, c, shift_);
    p.lu.analyzePattern(P);
    p.lu.factorize(P);
    p.ok = p.lu.info() == Eigen::Success;
  });
  return p;
}

SpectralField ShiftedSolver::solve(const SpectralField& f) const {
  if (!(f.grid == m_->grid)) throw std::invalid_argument("grid mismatch");
  SpectralField u(f.grid);
  for (int c : touched_components(*m_, f.coeffs)) {
    const auto& idx = m_->components[c];
    const Piece& p = piece(c);
    if (!p.ok) throw NumericalError("sparse factorization failed", INFINITY);
    CVec b(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) b[i] = f.coeffs[idx[i]];
    CVec x = p.lu.solve(b);
    for (size_t i = 0; i < idx.size(); ++i) u.coeffs[idx[i]] = x[i];
  }
  CVec r = m_->A * u.coeffs - shift_ * u.coeffs - f.coeffs;
  double fn = f.coeffs.norm();
  if (fn > 0 && r.norm() > 1e-10 * fn)
    throw NumericalError("resolvent residual above tolerance", r.norm() / fn);
  return u;
}

SpectralField resolvent_solve(const OperatorMatrix& m, double omega, double eps,
                              const SpectralField& f) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  ShiftedSolver s(m, cplx(omega, eps));
  return s.solve(f);
}

int count_below(const OperatorMatrix& m, int component, double sigma) {
  SparseC P = piece_matrix(m, component, sigma);
  const int n = int(P.rows());
  if (n <= 64) {
    Eigen::MatrixXcd D = Eigen::MatrixXcd(P);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
    int c = 0;
    for (int i = 0; i < n; ++i) c += es.eigenvalues()[i] < 0;
    return c;
  }
  Eigen::SimplicialLDLT<SparseC, Eigen::Lower> ldlt(P);
  if (ldlt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(P), Eigen::EigenvaluesOnly);
    int c = 0;
    for (int i = 0; i < n; ++i) c += es.eigenvalues()[i] < 0;
    return c;
  }
  auto d = ldlt.vectorD();
  int c = 0;
  for (int i = 0; i < d.size(); ++i) c += d[i].real() < 0;
  return c;
}

LevelSpacing level_spacing(const OperatorMatrix& m, double omega, const SpectralField& f,
                           double halfwidth) {
  if (!m.hermitian) throw std::invalid_argument("level spacing needs a Hermitian matrix");
  LevelSpacing ls;
  ls.halfwidth = halfwidth;
  ls.components = touched_components(m, f.coeffs);
  for (int c : ls.components) {
    int cnt = count_below(m, c, omega + halfwidth) - count_below(m, c, omega - halfwidth);
    ls.count += cnt;
    if (cnt > 0) ls.spacing = std::max(ls.spacing, 2 * halfwidth / cnt);
  }
  return ls;
}

std::vector<double> dyadic_ladder(int j0, int j1) {
  std::vector<double> out;
  for (int j = j0; j <= j1; ++j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

namespace {
double edge_fraction(const SpectralField& f) {
  const auto& g = f.grid;
  double edge = 0, tot = 0;
  for (int i = 0; i < g.modes(); ++i) {
    double v = std::norm(f.coeffs[i]);
    tot += v;
    if (std::abs(g.k1_of(i)) == g.K1() || std::abs(g.k2_of(i)) == g.K2()) edge += v;
  }
  return tot > 0 ? edge / tot : 0.0;
}
}  // namespace

ResolventSolution limiting_absorption(const OperatorMatrix& m, double omega,
                                      const SpectralField& f0, const std::vector<double>& ladder,
                                      const AbsorptionOptions& opt) {
  if (opt.sobolev_s >= -0.5) throw std::invalid_argument("Sobolev index must be below -1/2");
  for (size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] < ladder[i - 1] && ladder[i] > 0))
      throw std::invalid_argument("eps ladder must be positive and decreasing");
  if (opt.edge_mass_limit >= 0 && edge_fraction(f0) > opt.edge_mass_limit)
    throw std::invalid_argument("data has mass on the truncation boundary");

  SpectralField f = opt.eigenbasis.empty() ? f0 : project_out_basis(opt.eigenbasis, f0);

  ResolventSolution sol;
  sol.omega = omega;
  auto& rep = sol.report;
  rep.epsilons = ladder;
  rep.sobolev_s = opt.sobolev_s;
  rep.clearance = opt.clearance;

  if (f.coeffs.isZero(0.0)) {
    sol.u = SpectralField(m.grid);
    rep.admissible.assign(ladder.size(), true);
    rep.monotone = true;
    rep.message = "zero data";
    return sol;
  }

  rep.spacing = level_spacing(m, omega, f, opt.spacing_halfwidth);
  for (double e : ladder) {
    bool ok = e >= opt.clearance * rep.spacing.spacing;
    rep.admissible.push_back(ok);
    if (ok) rep.used_epsilons.push_back(e);
  }
  if (rep.used_epsilons.size() < 2) {
    rep.message = "fewer than two eps rungs clear the level spacing";
    throw NoConvergence(rep.message, rep);
  }

  for (double e : rep.used_epsilons) {
    SpectralField u = resolvent_solve(m, omega, e, f);
    if (!opt.eigenbasis.empty()) u = project_out_basis(opt.eigenbasis, u);
    sol.epsilons.push_back(e);
    sol.iterates.push_back(std::move(u));
  }
  for (size_t i = 1; i < sol.iterates.size(); ++i) {
    SpectralField d(m.grid, sol.iterates[i].coeffs - sol.iterates[i - 1].coeffs);
    rep.increments.push_back(sobolev_norm(d, opt.sobolev_s));
  }
  rep.monotone = true;
  for (size_t i = 1; i < rep.increments.size(); ++i)
    if (!(rep.increments[i] < rep.increments[i - 1])) rep.monotone = false;
  if (!rep.monotone && opt.require_monotone) {
    rep.message = "H^s increments do not decrease along the admissible ladder";
    throw NoConvergence(rep.message, rep);
  }
  // linear Richardson through the two smallest admissible rungs
  size_t n = sol.iterates.size();
  double e1 = sol.epsilons[n - 2], e2 = sol.epsilons[n - 1];
  const CVec& u1 = sol.iterates[n - 2].coeffs;
  const CVec& u2 = sol.iterates[n - 1].coeffs;
  sol.u = SpectralField(m.grid, (e1 * u2 - e2 * u1) / (e1 - e2));
  rep.message = rep.monotone ? "ok" : "increments not decreasing (recorded)";
  return sol;
}

namespace {
SpectralField to_field(const TorusGrid& g, const std::vector<int>& idx, const CVec& v) {
  SpectralField f(g);
  // unit L2 norm and a fixed phase: largest coefficient real positive
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best]) + 1e-12) best = i;
  cplx ph = std::abs(v[best]) > 0 ? std::conj(v[best]) / std::abs(v[best]) : 1.0;
  double nrm = v.norm() * 2 * kPi;
  for (size_t i = 0; i < idx.size(); ++i) f.coeffs[idx[i]] = v[i] * ph / nrm;
  return f;
}
}  // namespace

std::vector<EigenPair> eigencheck(const OperatorMatrix& m, double a, double b, int count) {
  if (!m.hermitian) throw std::invalid_argument("eigencheck needs a Hermitian matrix");
  if (!(a < b)) throw std::invalid_argument("empty window");
  std::vector<EigenPair> out;
  for (size_t c = 0; c < m.components.size(); ++c) {
    int inside = count_below(m, int(c), b) - count_below(m, int(c), a);
    if (inside <= 0) continue;
    const auto& idx = m.components[c];
    const int n = int(idx.size());
    SparseC P = piece_matrix(m, int(c), 0.0);
    if (n <= 600) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(P)};
      for (int i = 0; i < n; ++i) {
        double v = es.eigenvalues()[i];
        if (v >= a && v <= b) out.push_back({v, to_field(m.grid, idx, es.eigenvectors().col(i))});
      }
      continue;
    }
    // shift-invert subspace iteration
    const double sigma = a + 0.3 * (b - a);
    SparseC S = piece_matrix(m, int(c), sigma);
    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu(S);
    if (lu.info() != Eigen::Success) throw NumericalError("shift-invert factorization failed", 0);
    const int p = std::min(n, inside + 4);
    std::mt19937_64 rng(1234567 + c);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd X(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = cplx(nd(rng), nd(rng));
    double scale = 1.0;
    for (int k = 0; k < P.outerSize(); ++k)
      for (SparseC::InnerIterator it(P, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    bool done = false;
    for (int iter = 0; iter < 500 && !done; ++iter) {
      Eigen::MatrixXcd Y = lu.solve(X);
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
      Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
      Eigen::MatrixXcd AQ = P * Q;
      Eigen::MatrixXcd H = Q.adjoint() * AQ;
      H = 0.5 * (H + H.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      X = Q * es.eigenvectors();
      Eigen::MatrixXcd R = AQ * es.eigenvectors() - X * es.eigenvalues().asDiagonal();
      int conv = 0;
      std::vector<int> ins;
      for (int j = 0; j < p; ++j) {
        double v = es.eigenvalues()[j];
        if (v >= a && v <= b) {
          ins.push_back(j);
          conv += R.col(j).norm() <= 1e-10 * scale;
        }
      }
      if (int(ins.size()) >= inside && conv == int(ins.size())) {
        for (int j : ins) out.push_back({es.eigenvalues()[j], to_field(m.grid, idx, X.col(j))});
        done = true;
      }
    }
    if (!done) throw IterationLimit("shift-invert iteration did not converge");
  }
  std::sort(out.begin(), out.end(), [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
  if (int(out.size()) > count) out.resize(count);
  return out;
}

SpectralField project_out(const SpectralField& u0, const SpectralField& f) {
  if (std::abs(l2_norm(u0) - 1.0) > 1e-10) throw std::invalid_argument("u0 must have unit L2 norm");
  cplx c = inner(f, u0);
  return SpectralField(f.grid, f.coeffs - c * u0.coeffs);
}

SpectralField project_out_basis(const std::vector<SpectralField>& basis, const SpectralField& f) {
  SpectralField out = f;
  for (const auto& u0 : basis) out = project_out(u0, out);
  return out;
}

}  // namespace zs
