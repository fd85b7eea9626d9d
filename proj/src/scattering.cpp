#include "zs/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <tuple>
#include <numbers>

#include "zs/parallel.hpp"

namespace zs {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

bool is_line(const LimitCycle& c) {
  for (const auto& p : c.samples)
    if (circular_distance(p.x1, c.x1) > 1e-7) return false;
  return true;
}

// coefficient b of x1loc in the local expansion p ~ a xi2/xi1loc + b x1loc
double transverse_slope(const LimitCycle& c) {
  SymbolGradient g = gradient(c.symbol, c.x1, 0.0, std::cos(c.theta), std::sin(c.theta));
  return c.orientation * g.dx1;
}

double lambda_of(const LimitCycle& c) { return c.lyapunov > 0 ? c.lyapunov : 1.0 / std::abs(c.gamma); }

std::vector<int> ids_of(const std::vector<LimitCycle>& cs) {
  std::vector<int> v;
  for (const auto& c : cs) v.push_back(c.id);
  return v;
}
std::vector<double> lambdas_of(const std::vector<LimitCycle>& cs) {
  std::vector<double> v;
  for (const auto& c : cs) v.push_back(lambda_of(c));
  return v;
}

double taper(double t, double lo, double hi) {
  double mid = 0.5 * (lo + hi), wid = (hi - lo) / 6;
  return 0.5 * std::erfc((t - mid) / wid / std::sqrt(2.0));
}
}  // namespace

MicrolocalSolution incoming_ansatz(const SymbolDescriptor& s, const TorusGrid& g, double omega,
                                   const ScatteringDataVector& f, const std::vector<LimitCycle>& sources,
                                   const AnsatzOptions& opt) {
  if (f.circle_count() != int(sources.size()))
    throw std::invalid_argument("one data circle per source cycle");
  if (f.Ks > g.K2()) throw std::invalid_argument("section band exceeds the grid band");
  const auto& w = opt.window;
  const double reach = w.a + 3 * w.s;
  for (size_t i = 0; i < sources.size(); ++i) {
    if (!is_line(sources[i])) throw GeometryError("source cycle is not a line x1 = const");
    for (size_t j = i + 1; j < sources.size(); ++j)
      if (circular_distance(sources[i].x1, sources[j].x1) < 2 * reach)
        throw GeometryError("ansatz windows of two source cycles overlap");
  }
  MicrolocalSolution out;
  const TorusGrid wide(g.n1 + 2, g.n2 + 2);
  SpectralField uw(wide);
  out.cycle_ids = ids_of(sources);
  auto kernel = [&w](double om) { return cplx(w.hat(om)); };
  for (size_t j = 0; j < sources.size(); ++j) {
    const auto& c = sources[j];
    for (int k = -f.Ks; k <= f.Ks; ++k) {
      cplx fk = f.at(int(j), k);
      if (fk == 0.0) continue;
      double kappa = c.gamma * k;
      cplx a = fk * std::polar(1.0, -alpha(kappa).phase);
      for (int k1 = -wide.K1(); k1 <= wide.K1(); ++k1) {
        cplx h = half_line_transform(kernel, c.orientation * k1, kappa);
        uw.at(k1, k) += a * std::polar(1.0, -k1 * c.x1) * h;
      }
    }
  }
  SpectralField pw = apply_matrix_free(s, uw);
  pw.coeffs -= omega * uw.coeffs;
  out.u = SpectralField(g);
  out.g = SpectralField(g);
  for (int idx = 0; idx < g.modes(); ++idx) {
    int k1 = g.k1_of(idx), k2 = g.k2_of(idx);
    out.u.coeffs[idx] = uw.at(k1, k2);
    out.g.coeffs[idx] = pw.at(k1, k2);
  }
  // transform roundoff would otherwise touch every k2 block of the resolvent
  const double floor = 1e-15 * out.g.coeffs.cwiseAbs().maxCoeff();
  for (auto& v : out.g.coeffs)
    if (std::abs(v) < floor) v = 0.0;
  out.g_high_fraction = high_frequency_fraction(out.g, g.K1() / 2);
  return out;
}

namespace {
// trace at signed distance d of the tapered half-line part of W alpha (y + i shift)^{-1 + i kappa}
struct ModelKey {
  double kappa, shift, wa, ws, lo, hi;
  int K;
  std::vector<double> pos;
  auto tie() const { return std::tie(kappa, shift, wa, ws, lo, hi, K, pos); }
  bool operator<(const ModelKey& o) const { return tie() < o.tie(); }
};

std::vector<cplx> band_model(const ModelKey& key, const PlateauWindow& w) {
  static std::mutex mu;
  static std::map<ModelKey, std::vector<cplx>> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto kernel = [&w](double om) { return cplx(w.hat(om)); };
  std::vector<cplx> out(key.pos.size(), 0.0);
  for (int m = 1; m <= key.K; ++m) {
    cplx h = taper(double(m) / key.K, key.lo, key.hi) * half_line_transform(kernel, m, key.kappa, 90.0, key.shift);
    for (size_t i = 0; i < key.pos.size(); ++i) out[i] += h * std::polar(1.0, m * key.pos[i]);
  }
  std::lock_guard<std::mutex> lk(mu);
  cache.emplace(key, out);
  return out;
}

}  // namespace

ScatteringDataVector extract_data(const SpectralField& u, const std::vector<LimitCycle>& cycles, int Ks,
                                  const ExtractOptions& opt) {
  const TorusGrid& g = u.grid;
  if (Ks > g.K2()) throw std::invalid_argument("section band exceeds the grid band");
  if (opt.deltas.empty()) throw std::invalid_argument("empty delta ladder");
  for (double d : opt.deltas)
    if (!(d > 0) || d > opt.window.a - 3 * opt.window.s)
      throw GeometryError("trace circle leaves the ansatz window");
  ScatteringDataVector out(Ks, ids_of(cycles), lambdas_of(cycles));
  std::vector<double> tw(g.m1());
  for (int k1 = -g.K1(); k1 <= g.K1(); ++k1) tw[k1 + g.K1()] = taper(double(std::abs(k1)) / g.K1(), opt.taper_lo, opt.taper_hi);
  for (size_t j = 0; j < cycles.size(); ++j) {
    const auto& c = cycles[j];
    if (!is_line(c)) throw GeometryError("cycle is not a line x1 = const");
    double shift = opt.eps > 0 ? -opt.eps / transverse_slope(c) : 0.0;
    for (int k = -Ks; k <= Ks; ++k) {
      double kappa = c.gamma * k;
      int side = kappa >= 0 ? 1 : -1;
      std::vector<double> pos;
      std::vector<cplx> cs;
      for (double d : opt.deltas) {
        double dd = side * d;
        double x = c.x1 + c.orientation * dd;
        cplx acc = 0;
        for (int k1 = -g.K1(); k1 <= g.K1(); ++k1) {
          if (c.orientation * k1 <= 0) continue;
          acc += tw[k1 + g.K1()] * u.at(k1, k) * std::polar(1.0, k1 * x);
        }
        pos.push_back(dd);
        cs.push_back(acc);
      }
      cplx a;
      if (opt.band_model) {
        ModelKey key{kappa, std::max(shift, 0.0), opt.window.a, opt.window.s, opt.taper_lo, opt.taper_hi, g.K1(), pos};
        std::vector<cplx> model = band_model(key, opt.window);
        a = fit_model(cs, model, pos, opt.nsmooth);
      } else {
        a = fit_symbol(cs, pos, kappa, shift, opt.nsmooth);
      }
      out.at(int(j), k) = a * std::polar(1.0, alpha(kappa).phase);
    }
  }
  return out;
}

PoissonResult poisson(const SymbolDescriptor& s, const OperatorMatrix& m, double omega,
                      const ScatteringDataVector& f, const std::vector<LimitCycle>& sources,
                      const PoissonOptions& opt) {
  PoissonResult r;
  r.ansatz = incoming_ansatz(s, m.grid, omega, f, sources, opt.ansatz);
  const auto& basis = opt.absorption.eigenbasis;
  if (!basis.empty()) {
    r.ansatz.u = project_out_basis(basis, r.ansatz.u);
    r.ansatz.g = project_out_basis(basis, r.ansatz.g);
  }
  r.correction = limiting_absorption(m, omega, r.ansatz.g, opt.ladder, opt.absorption);
  r.u = SpectralField(m.grid, r.ansatz.u.coeffs - r.correction.u.coeffs);
  for (const auto& it : r.correction.iterates)
    r.rungs.emplace_back(m.grid, r.ansatz.u.coeffs - it.coeffs);
  SpectralField res = apply(m, r.u);
  res.coeffs -= omega * r.u.coeffs;
  r.residual = sobolev_norm(res, opt.absorption.sobolev_s);
  return r;
}

ScatteringDataVector outgoing_data(const PoissonResult& p, const std::vector<LimitCycle>& sinks, int Ks,
                                   const ExtractOptions& opt, bool shifted) {
  const size_t n = p.rungs.size();
  if (n < 2) {
    ExtractOptions o = opt;
    o.eps = 0;
    return extract_data(p.u, sinks, Ks, o);
  }
  const auto& eps = p.correction.epsilons;
  double e1 = eps[n - 2], e2 = eps[n - 1];
  ExtractOptions o1 = opt, o2 = opt;
  o1.eps = shifted ? e1 : 0.0;
  o2.eps = shifted ? e2 : 0.0;
  ScatteringDataVector d1 = extract_data(p.rungs[n - 2], sinks, Ks, o1);
  ScatteringDataVector d2 = extract_data(p.rungs[n - 1], sinks, Ks, o2);
  ScatteringDataVector out = d1;
  out.set_stacked((e1 * d2.stacked() - e2 * d1.stacked()) / (e1 - e2));
  return out;
}

namespace {
cplx weighted_inner(const ScatteringDataVector& a, const ScatteringDataVector& b) {
  if (a.circle_count() != b.circle_count() || a.Ks != b.Ks) throw std::invalid_argument("data shape mismatch");
  cplx acc = 0;
  for (int j = 0; j < a.circle_count(); ++j)
    acc += a.lambdas[j] * a.circles[j].dot(b.circles[j]) / (4 * kPi * kPi);
  return std::conj(acc);  // Eigen dot conjugates the first argument
}

double relative_mismatch(cplx a, cplx b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s > 1e-14 ? std::abs(a - b) / s : std::abs(a - b);
}
}  // namespace

PairingResult boundary_pairing(const OperatorMatrix& m, const SpectralField& u1, const SpectralField& u2,
                               const ScatteringDataVector& out1, const ScatteringDataVector& out2,
                               const ScatteringDataVector& in1, const ScatteringDataVector& in2) {
  PairingResult r;
  cplx B = inner(apply(m, u1), u2) - inner(u1, apply(m, u2));
  r.lhs = cplx(0, 1) * B / (4 * kPi * kPi);
  r.rhs = weighted_inner(out1, out2) - weighted_inner(in1, in2);
  r.mismatch = relative_mismatch(r.lhs, r.rhs);
  return r;
}

namespace {
struct CylinderSpectra {
  std::vector<double> xi;
  std::vector<std::vector<cplx>> u, xu;  // per mode
};

CylinderSpectra cylinder_spectra(const std::vector<CylinderMode>& modes, const CylinderPairingOptions& o) {
  CylinderSpectra s;
  const int n = o.nodes;
  for (int i = 0; i < n; ++i) s.xi.push_back(-o.xi_max + 2 * o.xi_max * i / (n - 1));
  const auto& w = o.window;
  auto kh = [&w](double om) { return cplx(w.hat(om)); };
  auto kx = [&w](double om) { return w.hat_x(om); };
  s.u.assign(modes.size(), std::vector<cplx>(n));
  s.xu.assign(modes.size(), std::vector<cplx>(n));
  parallel_for(int(modes.size()), 1, [&](int q) {
    const auto& md = modes[q];
    double kappa = md.k / o.lambda;
    for (int i = 0; i < n; ++i) {
      double xi = s.xi[i];
      cplx u = 0, xu = 0;
      if (md.sink != 0.0) {
        u += md.sink * half_line_transform(kh, xi, kappa);
        xu += md.sink * half_line_transform(kx, xi, kappa);
      }
      if (md.source != 0.0) {
        // W(x) alpha (-x + i0)^{-1 + i kappa}: reflect
        u += md.source * half_line_transform(kh, -xi, kappa);
        xu -= md.source * half_line_transform(kx, -xi, kappa);
      }
      s.u[q][i] = u;
      s.xu[q][i] = xu;
    }
  });
  return s;
}

double trapezoid_weight(int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; }
}  // namespace

PairingResult model_cylinder_pairing(const std::vector<CylinderMode>& modes, const CylinderPairingOptions& o) {
  auto s = cylinder_spectra(modes, o);
  const int n = o.nodes;
  const double h = 2 * o.xi_max / (n - 1);
  cplx B = 0;
  for (size_t q = 0; q < modes.size(); ++q) {
    cplx acc = 0;
    for (int i = 0; i < n; ++i)
      acc += trapezoid_weight(i, n, h) * (s.xu[q][i] * std::conj(s.u[q][i]) - s.u[q][i] * std::conj(s.xu[q][i]));
    // the D2 D1^{-1} part is a real multiplier and drops out
    B += -o.lambda * 4 * kPi * kPi * acc;
  }
  PairingResult r;
  r.lhs = cplx(0, 1) * B / (4 * kPi * kPi);
  // data read off each hand-built piece on its plateau
  const double win = o.window.value(o.delta);
  for (const auto& md : modes) {
    double kappa = md.k / o.lambda;
    cplx model = alpha(kappa).value * upper_pow(o.delta, cplx(-1.0, kappa)) * win;
    cplx ap = section_to_symbol(md.sink * model, kappa, 1, o.delta).a;
    cplx am = section_to_symbol(md.source * model, kappa, 1, o.delta).a;
    r.rhs += o.lambda * (std::norm(ap) - std::norm(am)) / (4 * kPi * kPi);
  }
  r.mismatch = relative_mismatch(r.lhs, r.rhs);
  return r;
}

cplx model_cylinder_pairing_smooth(const std::vector<CylinderMode>& modes, int k, double c, double w,
                                   const CylinderPairingOptions& o) {
  auto s = cylinder_spectra(modes, o);
  const int n = o.nodes;
  const double h = 2 * o.xi_max / (n - 1);
  cplx B = 0;
  for (size_t q = 0; q < modes.size(); ++q) {
    if (modes[q].k != k) continue;
    cplx acc = 0;
    for (int i = 0; i < n; ++i) {
      double xi = s.xi[i];
      cplx u1 = w / std::sqrt(kTwoPi) * std::exp(-0.5 * w * w * xi * xi) * std::polar(1.0, -xi * c);
      cplx xu1 = u1 * cplx(c, -w * w * xi);
      acc += trapezoid_weight(i, n, h) * (xu1 * std::conj(s.u[q][i]) - u1 * std::conj(s.xu[q][i]));
    }
    B += -o.lambda * 4 * kPi * kPi * acc;
  }
  return B;
}

double ScatteringMatrixNumeric::unitarity_defect() const {
  if (S.size() == 0) return 0.0;
  const int blk = 2 * Ks + 1;
  Eigen::MatrixXcd U = S;
  for (int r = 0; r < U.rows(); ++r) U.row(r) *= std::sqrt(sink_lambdas[r / blk]);
  for (int c = 0; c < U.cols(); ++c) U.col(c) /= std::sqrt(source_lambdas[c / blk]);
  Eigen::MatrixXcd D = U.adjoint() * U - Eigen::MatrixXcd::Identity(U.cols(), U.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double ScatteringMatrixNumeric::max_column_norm() const {
  double m = 0;
  for (int c = 0; c < S.cols(); ++c) m = std::max(m, S.col(c).norm());
  return m;
}

ScatteringMatrixNumeric scattering_matrix(const SymbolDescriptor& s, const OperatorMatrix& m, double omega,
                                          const std::vector<LimitCycle>& sources,
                                          const std::vector<LimitCycle>& sinks, const ScatterOptions& opt) {
  ScatteringMatrixNumeric out;
  out.omega = omega;
  out.n = m.grid.n1;
  out.Ks = opt.Ks;
  out.source_ids = ids_of(sources);
  out.sink_ids = ids_of(sinks);
  out.source_lambdas = lambdas_of(sources);
  out.sink_lambdas = lambdas_of(sinks);
  for (const auto& c : sources) out.source_gammas.push_back(c.gamma);
  for (const auto& c : sinks) out.sink_gammas.push_back(c.gamma);
  out.deltas = opt.extract.deltas;
  if (opt.Ks <= 0) {
    // no section modes requested
    out.Ks = 0;
    out.S = Eigen::MatrixXcd(0, 0);
    return out;
  }
  const int blk = 2 * opt.Ks + 1;
  const int cols = int(sources.size()) * blk;
  out.S = Eigen::MatrixXcd::Zero(int(sinks.size()) * blk, cols);
  std::vector<std::vector<double>> used(cols);
  std::vector<char> mono(cols, 1);
  parallel_for(cols, opt.workers, [&](int col) {
    ScatteringDataVector f(opt.Ks, ids_of(sources), lambdas_of(sources));
    f.at(col / blk, col % blk - opt.Ks) = 1.0;
    try {
      PoissonResult p = poisson(s, m, omega, f, sources, opt.poisson);
      ScatteringDataVector d = outgoing_data(p, sinks, opt.Ks, opt.extract, opt.shifted_extraction);
      out.S.col(col) = d.stacked();
      used[col] = p.correction.epsilons;
      mono[col] = p.correction.report.monotone;
    } catch (const NoConvergence& e) {
      throw NoConvergence("column " + std::to_string(col) + ": " + e.what(), e.report);
    } catch (const AssumptionViolation& e) {
      throw AssumptionViolation("column " + std::to_string(col) + ": " + e.what());
    } catch (const GeometryError& e) {
      throw GeometryError("column " + std::to_string(col) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ColumnFailure("column " + std::to_string(col) + ": " + e.what(), col);
    }
  });
  // all columns share one component pattern per section mode; report the first column's rungs
  out.used_epsilons = used[0];
  for (char c : mono) out.nonmonotone_columns += !c;
  return out;
}

ScatteringMatrixNumeric conjugate(const ScatteringMatrixNumeric& S) {
  ScatteringMatrixNumeric out = S;
  out.kind = MatrixKind::Conjugated;
  if (S.S.size() == 0) return out;
  const int blk = 2 * S.Ks + 1;
  // T^- on the right: column c picks up the phase T^- gives to basis vector c
  ScatteringDataVector e(S.Ks, S.source_ids, S.source_lambdas);
  for (int c = 0; c < S.S.cols(); ++c) {
    e.set_stacked(CVec::Unit(S.S.cols(), c));
    cplx ph = t_multiplier(e, S.source_lambdas, -1, TDirection::Forward).at(c / blk, c % blk - S.Ks);
    ScatteringDataVector col(S.Ks, S.sink_ids, S.sink_lambdas);
    col.set_stacked(S.S.col(c) * ph);
    out.S.col(c) = t_multiplier(col, S.sink_lambdas, +1, TDirection::Adjoint).stacked();
  }
  return out;
}

ScatteringMatrixNumeric gauge_shift(const ScatteringMatrixNumeric& S, int circle, bool sink, double phi) {
  ScatteringMatrixNumeric out = S;
  const int blk = 2 * S.Ks + 1;
  for (int k = -S.Ks; k <= S.Ks; ++k) {
    int idx = circle * blk + k + S.Ks;
    if (sink) out.S.row(idx) *= std::polar(1.0, k * phi);
    else out.S.col(idx) *= std::polar(1.0, -k * phi);
  }
  return out;
}

ScatteringDataVector apply_matrix(const ScatteringMatrixNumeric& S, const ScatteringDataVector& f) {
  ScatteringDataVector out(S.Ks, S.sink_ids, S.sink_lambdas);
  if (S.S.size() == 0) return out;
  out.set_stacked(S.S * f.stacked());
  return out;
}

FioReport fio_check(const ScatteringMatrixNumeric& S, const ScatteringRelationTable& table, const FioOptions& opt) {
  FioReport rep;
  rep.omega = S.omega;
  rep.n = S.n;
  rep.Ks = S.Ks;
  rep.defect = S.unitarity_defect();
  if (S.Ks <= 0 || S.S.size() == 0) return rep;
  const double eta = opt.eta0 > 0 ? opt.eta0 : 0.5 * S.Ks;
  const int N = opt.samples;
  const double tol = kTwoPi / S.Ks;
  int pos_ok = 0, br_ok = 0;
  for (int j = 0; j < int(S.source_ids.size()); ++j)
    for (int sg : {+1, -1})
      for (int p = 0; p < opt.packets; ++p) {
        PacketResult pr;
        pr.source = j;
        pr.y0 = kTwoPi * p / opt.packets;
        pr.eta0 = sg * eta;
        std::vector<cplx> vals(N);
        for (int i = 0; i < N; ++i) {
          double d = std::remainder(kTwoPi * i / N - pr.y0, kTwoPi);
          vals[i] = bump(d / opt.width) * std::polar(1.0, pr.eta0 * d);
        }
        auto spec = dft(vals, false);
        ScatteringDataVector f(S.Ks, S.source_ids, S.source_lambdas);
        double in_mass = 0;
        for (int k = -S.Ks; k <= S.Ks; ++k) {
          f.at(j, k) = spec[(k + N) % N] / double(N);
          in_mass += std::norm(f.at(j, k));
        }
        ScatteringDataVector g = apply_matrix(S, f);
        double total = 0, best = -1;
        for (int i = 0; i < g.circle_count(); ++i) {
          double mass = g.circles[i].squaredNorm();
          total += mass;
          if (mass > best) {
            best = mass;
            pr.sink = i;
          }
        }
        pr.conclusive = total >= opt.min_mass * in_mass;
        // centre of mass on the dominant circle and the sign of its mean frequency
        cplx centre = 0;
        for (int i = 0; i < N; ++i) {
          double z = kTwoPi * i / N;
          cplx v = 0;
          for (int k = -S.Ks; k <= S.Ks; ++k) v += g.at(pr.sink, k) * std::polar(1.0, k * z);
          centre += std::norm(v) * std::polar(1.0, z);
        }
        pr.ystar = std::arg(centre);
        double kbar = 0;
        for (int k = -S.Ks; k <= S.Ks; ++k) kbar += k * std::norm(g.at(pr.sink, k));
        pr.eta_sign = kbar > 0 ? 1 : (kbar < 0 ? -1 : 0);

        int sigma = S.source_gammas[j] * pr.eta0 > 0 ? 1 : -1;
        const RelationRow* row = nullptr;
        for (const auto& r : table.rows)
          if (r.source == j && r.sigma == sigma) row = &r;
        if (row) {
          pr.ypred = std::remainder(row->predict(pr.y0), kTwoPi);
          pr.sink_pred = row->sink;
          pr.eta_sign_pred = row->sigma_out * (S.sink_gammas[row->sink] > 0 ? 1 : -1);
        }
        pr.err = circular_distance(pr.ystar, pr.ypred);
        pr.position_ok = row && pr.conclusive && pr.err <= tol;
        pr.branch_ok = row && pr.sink == pr.sink_pred && pr.eta_sign == pr.eta_sign_pred;
        pos_ok += pr.position_ok;
        if (pr.conclusive) {
          ++rep.conclusive;
          br_ok += pr.branch_ok;
        }
        rep.packets.push_back(pr);
      }
  rep.position_fraction = rep.packets.empty() ? 0.0 : double(pos_ok) / rep.packets.size();
  rep.branch_fraction = rep.conclusive ? double(br_ok) / rep.conclusive : 0.0;
  return rep;
}

nlohmann::json to_json(const FioReport& r) {
  nlohmann::json j;
  j["omega"] = r.omega;
  j["n"] = r.n;
  j["Ks"] = r.Ks;
  j["defect"] = r.defect;
  j["position_fraction"] = r.position_fraction;
  j["branch_fraction"] = r.branch_fraction;
  j["conclusive"] = r.conclusive;
  j["per_packet"] = nlohmann::json::array();
  for (const auto& p : r.packets)
    j["per_packet"].push_back({{"source", p.source},
                               {"y0", p.y0},
                               {"eta0", p.eta0},
                               {"ystar", p.ystar},
                               {"ypred", p.ypred},
                               {"err", p.err},
                               {"sink", p.sink},
                               {"conclusive", p.conclusive},
                               {"branch_ok", p.branch_ok}});
  return j;
}

void export_matrix(const ScatteringMatrixNumeric& S, std::ostream& os) {
  char buf[160];
  for (int c = 0; c < S.S.cols(); ++c)
    for (int r = 0; r < S.S.rows(); ++r) {
      cplx v = S.S(r, c);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", r, c, v.real(), v.imag());
      os << buf;
    }
}

}  // namespace zs
