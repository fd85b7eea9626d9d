#include "zs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zs/dynamics.hpp"
#include "zs/psido.hpp"
#include "zs/scattering.hpp"

namespace zs {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const AssumptionViolation*>(&e) || dynamic_cast<const NonHyperbolic*>(&e) ||
      dynamic_cast<const GeometryError*>(&e))
    return kExitAssumption;
  if (dynamic_cast<const NoConvergence*>(&e) || dynamic_cast<const IterationLimit*>(&e) ||
      dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const StepUnderflow*>(&e) ||
      dynamic_cast<const DriftAbort*>(&e) || dynamic_cast<const BudgetError*>(&e) ||
      dynamic_cast<const ColumnFailure*>(&e))
    return kExitNoConvergence;
  return kExitUsage;
}

void OutputSink::put(const std::string& name, const std::string& bytes) {
  files[name] = bytes;
  if (!dir.empty()) {
    ensure_dir(dir);
    write_text(dir + "/" + name, bytes);
  }
}

namespace {

TorusGrid grid_of(const RunConfig& c) { return TorusGrid(c.n1, c.n2); }

std::vector<double> ladder_of(const RunConfig& c) {
  return c.eps_ladder.empty() ? dyadic_ladder(0, 14) : c.eps_ladder;
}

struct CycleSplit {
  std::vector<LimitCycle> all, sinks, sources;
};

CycleSplit cycles_of(const RunConfig& c) {
  if (c.symbol.family != Family::NormalForm) check_no_fixed_points(principal(c.symbol), c.omega);
  FindOptions fo;
  fo.seeds = c.seeds;
  fo.workers = c.workers;
  CycleSplit s;
  s.all = find_cycles(c.symbol, c.omega, fo);
  for (const auto& cy : s.all) (cy.kind == CycleKind::Sink ? s.sinks : s.sources).push_back(cy);
  if (s.sinks.empty()) throw AssumptionViolation("no limit cycles on Sigma(omega)");
  return s;
}

std::string kind_name(CycleKind k) { return k == CycleKind::Sink ? "sink" : "source"; }

SpectralField rhs_of(const RunConfig& c, const TorusGrid& g) {
  const auto& r = c.rhs;
  std::string kind = r.value("kind", "mode");
  if (kind == "zero") return SpectralField(g);
  if (kind == "mode") {
    int k1 = r.value("k1", 0), k2 = r.value("k2", 1);
    if (!g.in_band(k1, k2)) throw std::invalid_argument("rhs mode outside the band");
    return SpectralField::mode(g, k1, k2);
  }
  if (kind == "atom") {
    WavePacketAtom a;
    a.x01 = r.value("x1", 0.0);
    a.x02 = r.value("x2", 0.0);
    a.theta = r.value("theta", 0.0);
    a.h = r.value("h", 0.125);
    check_in_band(g, a);
    return atom_field(g, a);
  }
  throw std::invalid_argument("unknown rhs kind: " + kind);
}

// smallest dyadic h whose atoms still fit in the band
double finest_scale(const TorusGrid& g) {
  double h = 1.0;
  int K = std::min(g.K1(), g.K2());
  for (int m = 1; m < 20; ++m) {
    double t = std::ldexp(1.0, -m);
    if (1.0 / t + 5.0 / std::sqrt(t) > K) break;
    h = t;
  }
  return h;
}

std::string matrix_text(const ScatteringMatrixNumeric& S) {
  std::ostringstream os;
  export_matrix(S, os);
  return os.str();
}

// eigenvectors at omega that are smooth; a truncation artifact spreads over the whole band
std::vector<SpectralField> embedded_basis(const OperatorMatrix& m, double omega, int count, int& artifacts) {
  std::vector<SpectralField> out;
  artifacts = 0;
  const int cut = std::min(m.grid.K1(), m.grid.K2()) / 2;
  for (auto& e : eigencheck(m, omega - 1e-8, omega + 1e-8, std::max(count, 1))) {
    if (high_frequency_fraction(e.vector, cut) <= 1e-6) out.push_back(e.vector);
    else ++artifacts;
  }
  return out;
}

ScatteringMatrixNumeric scatter_core(const RunConfig& c, const CycleSplit& cy, OutputSink& out) {
  const TorusGrid g = grid_of(c);
  if (c.Ks > g.K2()) throw std::invalid_argument("Ks exceeds the grid band");
  OperatorMatrix m = assemble(c.symbol, g, c.workers);
  ScatterOptions so;
  so.Ks = c.Ks;
  so.workers = c.workers;
  so.poisson.ladder = ladder_of(c);
  if (!c.delta_ladder.empty()) so.extract.deltas = c.delta_ladder;
  int artifacts = 0;
  auto basis = embedded_basis(m, c.omega, c.eig_count, artifacts);
  so.poisson.absorption.eigenbasis = basis;
  out.report["eigen_artifacts"] = artifacts;
  ScatteringMatrixNumeric S = scattering_matrix(c.symbol, m, c.omega, cy.sources, cy.sinks, so);
  out.report["projected_eigenvectors"] = int(basis.size());
  out.report["defect"] = S.unitarity_defect();
  out.report["max_column_norm"] = S.max_column_norm();
  out.report["nonmonotone_columns"] = S.nonmonotone_columns;
  out.report["used_epsilons"] = S.used_epsilons;
  return S;
}

}  // namespace

void run_cycles(const RunConfig& c, OutputSink& out) {
  const std::string h = config_hash(c);
  CycleSplit cy = cycles_of(c);
  CsvTable t;
  t.columns = {"id", "kind", "x1", "theta", "period", "lambda", "lambda_monodromy", "multiplier", "orientation", "gamma"};
  for (const auto& y : cy.all)
    t.add({std::to_string(y.id), kind_name(y.kind), fmt17(y.x1), fmt17(y.theta), fmt17(y.period), fmt17(y.lyapunov),
           fmt17(y.lyapunov_monodromy), fmt17(y.multiplier), std::to_string(y.orientation), fmt17(y.gamma)});
  out.put("cycles.csv", stamped_text(h, t.body()));

  RelationOptions ro;
  ro.workers = c.workers;
  ScatteringRelationTable tab = scattering_relation(cy.sources, cy.sinks, ro);
  CsvTable r;
  r.columns = {"source", "sigma", "sink", "sigma_out", "z", "y", "dydz"};
  for (const auto& row : tab.rows)
    for (size_t i = 0; i < row.z.size(); ++i)
      r.add({std::to_string(row.source), std::to_string(row.sigma), std::to_string(row.sink),
             std::to_string(row.sigma_out), fmt17(row.z[i]), fmt17(row.y[i]), fmt17(row.dydz[i])});
  out.put("relation.csv", stamped_text(h, r.body()));

  out.report["sinks"] = int(cy.sinks.size());
  out.report["sources"] = int(cy.sources.size());
  nlohmann::json lam = nlohmann::json::array();
  for (const auto& y : cy.all) lam.push_back(y.lyapunov);
  out.report["lambdas"] = lam;
}

void run_resolvent(const RunConfig& c, OutputSink& out) {
  const std::string h = config_hash(c);
  const TorusGrid g = grid_of(c);
  OperatorMatrix m = assemble(c.symbol, g, c.workers);
  SpectralField f = rhs_of(c, g);
  const auto ladder = ladder_of(c);

  auto write_report = [&](const ConvergenceReport& rep) {
    CsvTable t;
    t.columns = {"rung", "eps", "admissible", "increment"};
    size_t used = 0;
    for (size_t i = 0; i < rep.epsilons.size(); ++i) {
      bool adm = i < rep.admissible.size() && rep.admissible[i];
      std::string inc = "";
      if (adm) {
        if (used > 0 && used - 1 < rep.increments.size()) inc = fmt17(rep.increments[used - 1]);
        ++used;
      }
      t.add({std::to_string(i), fmt17(rep.epsilons[i]), adm ? "1" : "0", inc});
    }
    out.put("convergence.csv", stamped_text(h, t.body()));
    out.report["spacing"] = rep.spacing.spacing;
    out.report["monotone"] = rep.monotone;
    out.report["increments"] = rep.increments;
    out.report["used_epsilons"] = rep.used_epsilons;
    out.report["message"] = rep.message;
  };

  ResolventSolution sol;
  try {
    sol = limiting_absorption(m, c.omega, f, ladder);
  } catch (const NoConvergence& e) {
    write_report(e.report);
    throw;
  }
  write_report(sol.report);

  double off = -1;
  if (!f.coeffs.isZero(0.0) && c.symbol.family != Family::NormalForm) {
    try {
      CycleSplit cy = cycles_of(c);
      off = off_lagrangian_fraction(sol.u, cy.sinks, finest_scale(g), c.workers);
    } catch (const AssumptionViolation&) {
      // no attractor to measure against; the solve itself stands
    }
  }
  out.report["off_lagrangian_fraction"] = off;
  out.report["l2"] = l2_norm(sol.u);

  // field dump: coefficient bytes followed by a metadata trailer carrying the stamp
  std::ostringstream raw;
  for (int i = 0; i < g.modes(); ++i) {
    double v[2] = {sol.u.coeffs[i].real(), sol.u.coeffs[i].imag()};
    raw.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  std::string note = header_line(h, raw.str()).substr(2);
  out.put("u.zsf", field_dump_bytes(sol.u, note));

  CsvTable s;
  s.columns = {"quantity", "value"};
  s.add({"l2", fmt17(l2_norm(sol.u))});
  s.add({"off_lagrangian_fraction", fmt17(off)});
  s.add({"spacing", fmt17(sol.report.spacing.spacing)});
  s.add({"monotone", sol.report.monotone ? "1" : "0"});
  out.put("summary.csv", stamped_text(h, s.body()));
}

void run_scatter(const RunConfig& c, OutputSink& out) {
  const std::string h = config_hash(c);
  CycleSplit cy = c.Ks > 0 ? cycles_of(c) : CycleSplit{};
  ScatteringMatrixNumeric S;
  if (c.Ks > 0) {
    S = scatter_core(c, cy, out);
  } else {
    S.omega = c.omega;
    S.n = c.n1;
    out.report["defect"] = 0.0;
    out.report["max_column_norm"] = 0.0;
  }
  out.put("S.txt", stamped_text(h, matrix_text(S)));

  CsvTable t;
  t.columns = {"column", "source", "k", "norm"};
  const int blk = 2 * S.Ks + 1;
  for (int col = 0; col < S.S.cols(); ++col)
    t.add({std::to_string(col), std::to_string(S.source_ids[col / blk]), std::to_string(col % blk - S.Ks),
           fmt17(S.S.col(col).norm())});
  out.put("columns.csv", stamped_text(h, t.body()));

  nlohmann::json j;
  j["omega"] = c.omega;
  j["n"] = c.n1;
  j["Ks"] = c.Ks;
  j["defect"] = out.report["defect"];
  j["max_column_norm"] = out.report["max_column_norm"];
  j["gauge"] = "section x2-phase at fixed cycle distance";
  j["deltas"] = S.deltas;
  j["used_epsilons"] = S.used_epsilons;
  j["nonmonotone_columns"] = S.nonmonotone_columns;
  out.put("unitarity.json", stamped_json(h, j));
}

void run_fio(const RunConfig& c, OutputSink& out) {
  const std::string h = config_hash(c);
  if (c.Ks <= 0) throw std::invalid_argument("fio needs Ks > 0");
  CycleSplit cy = cycles_of(c);
  ScatteringMatrixNumeric S = scatter_core(c, cy, out);
  ScatteringMatrixNumeric R = conjugate(S);
  RelationOptions ro;
  ro.workers = c.workers;
  ScatteringRelationTable tab = scattering_relation(cy.sources, cy.sinks, ro);
  FioOptions fo;
  fo.packets = c.packets;
  fo.eta0 = c.eta0;
  FioReport rep = fio_check(R, tab, fo);
  rep.defect_raw = S.unitarity_defect();
  out.put("fio.json", stamped_json(h, to_json(rep)));

  CsvTable t;
  t.columns = {"source", "y0", "eta0", "ystar", "ypred", "err", "sink", "sink_pred", "eta_sign", "eta_sign_pred",
               "conclusive", "position_ok", "branch_ok"};
  for (const auto& p : rep.packets)
    t.add({std::to_string(p.source), fmt17(p.y0), fmt17(p.eta0), fmt17(p.ystar), fmt17(p.ypred), fmt17(p.err),
           std::to_string(p.sink), std::to_string(p.sink_pred), std::to_string(p.eta_sign),
           std::to_string(p.eta_sign_pred), p.conclusive ? "1" : "0", p.position_ok ? "1" : "0",
           p.branch_ok ? "1" : "0"});
  out.put("packets.csv", stamped_text(h, t.body()));
  out.report["defect_rel"] = rep.defect;
  out.report["position_fraction"] = rep.position_fraction;
  out.report["branch_fraction"] = rep.branch_fraction;
  out.report["conclusive"] = rep.conclusive;
}

void run_render(const RunConfig& c, OutputSink& out) {
  if (c.field.empty()) throw std::invalid_argument("render needs a field dump");
  SpectralField f = read_field(c.field);
  const TorusGrid& g = f.grid;
  auto vals = synthesize(f);
  double mx = 0;
  for (const auto& v : vals) mx = std::max(mx, std::abs(v));
  Image im;
  im.width = g.n1;
  im.height = g.n2;
  im.rgb.resize(size_t(3) * g.n1 * g.n2);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      double t = mx > 0 ? std::abs(vals[size_t(i) * g.n2 + j]) / mx : 0.0;
      // black - red - yellow - white
      double r = std::clamp(3 * t, 0.0, 1.0), gg = std::clamp(3 * t - 1, 0.0, 1.0), b = std::clamp(3 * t - 2, 0.0, 1.0);
      size_t p = 3 * (size_t(g.n2 - 1 - j) * g.n1 + i);
      im.rgb[p] = uint8_t(std::lround(255 * r));
      im.rgb[p + 1] = uint8_t(std::lround(255 * gg));
      im.rgb[p + 2] = uint8_t(std::lround(255 * b));
    }
  std::string bytes = ppm_bytes(config_hash(c), im);
  out.put("render.ppm", bytes);
  out.report["pixel_sha1"] = sha1_hex(std::string(im.rgb.begin(), im.rgb.end()));
  out.report["max_abs"] = mx;
}

void run_eigencheck(const RunConfig& c, OutputSink& out) {
  const std::string h = config_hash(c);
  OperatorMatrix m = assemble(c.symbol, grid_of(c), c.workers);
  auto ev = eigencheck(m, c.eig_lo, c.eig_hi, c.eig_count);
  CsvTable t;
  t.columns = {"index", "value", "residual"};
  nlohmann::json vals = nlohmann::json::array();
  for (size_t i = 0; i < ev.size(); ++i) {
    SpectralField r = apply(m, ev[i].vector);
    r.coeffs -= ev[i].value * ev[i].vector.coeffs;
    t.add({std::to_string(i), fmt17(ev[i].value), fmt17(l2_norm(r))});
    vals.push_back(ev[i].value);
  }
  out.put("eigen.csv", stamped_text(h, t.body()));
  out.report["eigenvalues"] = vals;
}

}  // namespace zs
