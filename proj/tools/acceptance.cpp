#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zs/dynamics.hpp"
#include "zs/experiments.hpp"
#include "zs/normalform.hpp"
#include "zs/psido.hpp"
#include "zs/scattering.hpp"

using namespace zs;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome special_functions() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (double x : {0.5, 1.0, 5.0, 20.0})
    for (double s : {1.0, -1.0}) {
      double xx = s * x;
      double ref = std::exp(kPi * xx) * (kPi * xx / std::sinh(kPi * xx)) / (4 * kPi * kPi);
      double m = alpha(xx).magnitude;
      worst = std::max(worst, std::abs(m * m - ref) / ref);
    }
  cplx a0 = alpha(0.0).value;
  double at0 = std::abs(a0 - cplx(0, 1 / (2 * kPi)));
  double stated = 0, stirling = 0;
  for (int i = 0; i <= 495; ++i) {
    double x = 5.0 + i;
    stated = std::max(stated, theta_asymptotic_defect(x, ThetaReference::Stated) * x);
    stirling = std::max(stirling, theta_asymptotic_defect(x, ThetaReference::Stirling) * x);
  }
  double t = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-12 && at0 <= 1e-15 && stated <= 1 && t < 1;
  o.detail = "|alpha|^2 rel err " + fmt("%.2e", worst) + ", alpha(0) err " + fmt("%.1e", at0) +
             ", theta defect*x " + fmt("%.3g", stated) + " (Stirling form " + fmt("%.3g", stirling) + "), " +
             fmt("%.2fs", t);
  return o;
}

Outcome t_unitarity() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> lams{0.7, 2.0, 1.3};
  ScatteringDataVector f(8, {0, 1, 2}, lams);
  for (int j = 0; j < 3; ++j)
    for (int k = -8; k <= 8; ++k) f.at(j, k) = cplx(std::cos(0.3 * k + j), std::sin(1.7 * k - j)) * (1.0 + 0.1 * k * k);
  double mag = 0, id = 0;
  for (int sign : {+1, -1}) {
    auto g = t_multiplier(f, lams, sign, TDirection::Forward);
    auto back = t_multiplier(g, lams, sign, TDirection::Adjoint);
    for (int j = 0; j < 3; ++j)
      for (int k = -8; k <= 8; ++k) {
        mag = std::max(mag, std::abs(std::abs(g.at(j, k)) - std::abs(f.at(j, k))) / std::abs(f.at(j, k)));
        id = std::max(id, std::abs(back.at(j, k) - f.at(j, k)) / std::abs(f.at(j, k)));
      }
  }
  double t = seconds_since(t0);
  Outcome o;
  o.pass = mag <= 1e-15 && id <= 1e-15 && t < 1;
  o.detail = "magnitude defect " + fmt("%.1e", mag) + ", adjoint round trip " + fmt("%.1e", id) + ", " + fmt("%.2fs", t);
  return o;
}

Outcome model_annihilator() {
  auto t0 = std::chrono::steady_clock::now();
  ModelSolutionSpec spec;
  spec.lambda = 1.3;
  spec.side = 1;
  spec.K = 3;
  for (int k = -3; k <= 3; ++k) spec.a.push_back(cplx(1.0 / (1 + k * k), 0.2 * k));
  bool ok = true;
  std::string d;
  for (int order : {2, 4}) {
    std::vector<double> res;
    for (double h : {0.02, 0.01, 0.005}) {
      auto g = CylinderGrid::centred(2.5, h, 16);
      auto v = evaluate_model(spec, g);
      res.push_back(annihilator_residual(spec, g, v, order, 0.2, 2.0).max_abs);
    }
    double p1 = std::log2(res[0] / res[1]), p2 = std::log2(res[1] / res[2]);
    ok = ok && std::abs(p1 - order) <= 0.5 && std::abs(p2 - order) <= 0.5;
    d += "order " + std::to_string(order) + ": " + fmt("%.2f", p1) + ", " + fmt("%.2f", p2) + "; ";
  }
  double t = seconds_since(t0);
  Outcome o;
  o.pass = ok && t < 10;
  o.detail = d + fmt("%.2fs", t);
  return o;
}

Outcome dynamics_check(const std::string& out_dir, OutputSink& csv) {
  auto t0 = std::chrono::steady_clock::now();
  double lam_err = 0;
  for (double lam : {0.7, 1.0, 1.3}) {
    auto cs = find_cycles(SymbolDescriptor::normal_form(lam), 0.0);
    for (const auto& c : cs) lam_err = std::max(lam_err, std::abs(c.lyapunov - lam));
  }
  RunConfig rc;
  rc.out = out_dir;
  csv.dir = out_dir.empty() ? "" : out_dir + "/c4_w1";
  run_cycles(rc, csv);
  auto cs = find_cycles(SymbolDescriptor::homogeneous(2.0), 0.0);
  int sinks = 0, sources = 0;
  double pos = 0;
  for (const auto& c : cs) {
    (c.kind == CycleKind::Sink ? sinks : sources)++;
    pos = std::max(pos, std::min(circular_distance(c.x1, kPi / 2), circular_distance(c.x1, 3 * kPi / 2)));
  }
  auto s = SymbolDescriptor::homogeneous(2.0);
  CospherePoint p{1.2, 0.4, 0.0};
  p.theta = project_to_sigma(s, 0.0, p.x1, p.x2, 0.3);
  auto tr = integrate(s, 0.0, p, 0.0, 100.0);
  double t = seconds_since(t0);
  Outcome o;
  o.pass = lam_err <= 1e-6 && sinks == 2 && sources == 2 && pos <= 1e-6 && tr.max_drift <= 1e-6 && t < 30;
  o.detail = "lambda err " + fmt("%.1e", lam_err) + ", " + std::to_string(sinks) + " sinks + " +
             std::to_string(sources) + " sources, position err " + fmt("%.1e", pos) + ", drift " +
             fmt("%.1e", tr.max_drift) + ", " + fmt("%.1fs", t);
  return o;
}

Outcome section_density() {
  double worst = 0;
  for (double lam : {0.7, 1.0, 1.3}) {
    auto cs = find_cycles(SymbolDescriptor::normal_form(lam), 0.0);
    for (const auto& c : cs) {
      auto sec = build_section(c, 0.1);
      for (double m : sec.mu) worst = std::max(worst, std::abs(m - 1.0 / lam));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-6;
  o.detail = "max |mu - 1/lambda| " + fmt("%.1e", worst);
  return o;
}

Outcome limiting_absorption_probe(const std::string& out_dir, OutputSink& csv) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig rc;
  rc.symbol = SymbolDescriptor::internal_wave(2.0);
  rc.omega = 0.05;
  csv.dir = out_dir.empty() ? "" : out_dir + "/c6_w1";
  Outcome o;
  try {
    run_resolvent(rc, csv);
  } catch (const NoConvergence& e) {
    o.detail = std::string("no convergence: ") + e.what();
    return o;
  }
  double t = seconds_since(t0);
  bool mono = csv.report["monotone"].get<bool>();
  double off = csv.report["off_lagrangian_fraction"].get<double>();
  auto used = csv.report["used_epsilons"].get<std::vector<double>>();
  auto inc = csv.report["increments"].get<std::vector<double>>();
  o.pass = mono && off >= 0 && off <= 0.1 && t < 300;
  std::string incs;
  for (double v : inc) incs += fmt(" %.4g", v);
  o.detail = std::to_string(used.size()) + " admissible rungs (spacing " +
             fmt("%.3g", csv.report["spacing"].get<double>()) + "), increments" + incs + ", off-Lambda fraction " +
             fmt("%.2e", off) + ", " + fmt("%.1fs", t);
  return o;
}

Outcome embedded_eigenvalue() {
  auto s = SymbolDescriptor::tao(2.0, 5);
  auto m = assemble(s, TorusGrid(128, 128));
  auto e5 = SpectralField::mode(m.grid, 5, 0);
  double res = l2_norm(apply(m, e5));
  auto ev = eigencheck(m, -1e-6, 1e-6, 4);
  double overlap = 0;
  for (auto& e : ev) overlap = std::max(overlap, std::abs(inner(e.vector, e5)) / (l2_norm(e.vector) * l2_norm(e5)));
  auto cs = find_cycles(s, 0.0);
  std::vector<LimitCycle> sinks, sources;
  for (auto& c : cs) (c.kind == CycleKind::Sink ? sinks : sources).push_back(c);
  PoissonOptions po;
  for (auto& e : ev) po.absorption.eigenbasis.push_back(e.vector);
  ScatteringDataVector f(8, {sources[0].id, sources[1].id}, {sources[0].lyapunov, sources[1].lyapunov});
  f.at(0, 0) = 1.0;
  f.at(1, 0) = cplx(0.3, -0.4);
  f.at(0, 3) = 0.5;
  auto p = poisson(s, m, 0.0, f, sources, po);
  double orth = std::abs(inner(p.u, e5)) / (l2_norm(p.u) * l2_norm(e5));
  Outcome o;
  o.pass = res <= 1e-13 && std::abs(overlap - 1) <= 1e-10 && orth <= 1e-10;
  o.detail = "kernel residual " + fmt("%.1e", res) + ", eigencheck overlap " + fmt("%.12f", overlap) +
             ", <u, e^{i5x1}> " + fmt("%.1e", orth);
  return o;
}

Outcome boundary_pairing_check() {
  auto t0 = std::chrono::steady_clock::now();
  CylinderPairingOptions po;
  po.lambda = 1.0;
  std::vector<CylinderMode> modes{{0, cplx(0.6, 0.3), cplx(-0.2, 0.5)}, {2, cplx(0.1, -0.7), cplx(0.4, 0.4)}};
  auto r = model_cylinder_pairing(modes, po);
  cplx b = model_cylinder_pairing_smooth(modes, 2, 0.7, 0.4, po);
  Outcome o;
  o.pass = r.mismatch <= 0.02 && std::abs(b) <= 1e-10;
  o.detail = "pairing mismatch " + fmt("%.2e", r.mismatch) + ", smooth |B| " + fmt("%.2e", std::abs(b)) + ", " +
             fmt("%.1fs", seconds_since(t0));
  return o;
}

struct ScatterRuns {
  double d256 = -1, d384 = -1, t256 = 0;
  std::string err;
};

ScatterRuns scatter_runs(const std::string& out_dir, OutputSink& csv) {
  ScatterRuns r;
  try {
    RunConfig rc;
    csv.dir = out_dir.empty() ? "" : out_dir + "/c9_w1";
    auto t0 = std::chrono::steady_clock::now();
    run_scatter(rc, csv);
    r.t256 = seconds_since(t0);
    r.d256 = csv.report["defect"].get<double>();
    rc.n1 = rc.n2 = 384;
    OutputSink s384;
    run_scatter(rc, s384);
    r.d384 = s384.report["defect"].get<double>();
  } catch (const std::exception& e) {
    r.err = e.what();
  }
  return r;
}

Outcome unitarity(const ScatterRuns& r, const OutputSink& csv) {
  Outcome o;
  if (!r.err.empty()) {
    o.detail = "pipeline error: " + r.err;
    return o;
  }
  o.pass = r.d256 <= 0.05 && r.d384 <= r.d256 && r.t256 < 1800;
  o.detail = "defect n=256 " + fmt("%.4f", r.d256) + ", n=384 " + fmt("%.4f", r.d384) + ", rungs used " +
             std::to_string(csv.report["used_epsilons"].size()) + ", columns with growing increments " +
             std::to_string(csv.report["nonmonotone_columns"].get<int>()) + ", " + fmt("%.1fs", r.t256);
  return o;
}

Outcome fio_structure() {
  RunConfig rc;
  OutputSink s;
  Outcome o;
  try {
    run_fio(rc, s);
  } catch (const std::exception& e) {
    o.detail = std::string("pipeline error: ") + e.what();
    return o;
  }
  double pf = s.report["position_fraction"].get<double>();
  double bf = s.report["branch_fraction"].get<double>();
  double inv = std::abs(s.report["defect_rel"].get<double>() - s.report["defect"].get<double>());
  o.pass = pf >= 0.8 && bf >= 0.9 && inv <= 1e-12;
  o.detail = "position " + fmt("%.3f", pf) + ", branch " + fmt("%.3f", bf) + " of " +
             std::to_string(s.report["conclusive"].get<int>()) + " conclusive, |defect(S_rel) - defect(S)| " +
             fmt("%.1e", inv);
  return o;
}

Outcome determinism(const OutputSink& c4, const OutputSink& c6, const OutputSink& c9, const std::string& out_dir) {
  std::vector<std::string> diffs;
  auto compare = [&](const OutputSink& a, const std::function<void(const RunConfig&, OutputSink&)>& run,
                     RunConfig rc, const std::string& tag) {
    rc.workers = 4;
    OutputSink b;
    b.dir = out_dir.empty() ? "" : out_dir + "/" + tag + "_w4";
    try {
      run(rc, b);
    } catch (const std::exception& e) {
      diffs.push_back(tag + " (" + e.what() + ")");
      return;
    }
    for (const auto& [name, bytes] : a.files) {
      if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
      auto it = b.files.find(name);
      if (it == b.files.end() || it->second != bytes) diffs.push_back(tag + "/" + name);
    }
  };
  RunConfig r4;
  compare(c4, run_cycles, r4, "c4");
  RunConfig r6;
  r6.symbol = SymbolDescriptor::internal_wave(2.0);
  r6.omega = 0.05;
  compare(c6, run_resolvent, r6, "c6");
  RunConfig r9;
  compare(c9, run_scatter, r9, "c9");
  size_t files = 0;
  for (const auto* s : {&c4, &c6, &c9})
    for (const auto& [name, bytes] : s->files) files += name.size() >= 4 && name.substr(name.size() - 4) == ".csv";
  Outcome o;
  o.pass = diffs.empty() && files > 0;
  o.detail = std::to_string(files) + " CSV files compared across workers 1 and 4";
  for (const auto& d : diffs) o.detail += "; differs: " + d;
  return o;
}

void report(int n, const char* name, const Outcome& o, int& failures) {
  std::printf("criterion %2d %-28s %s  %s\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return Outcome{false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out;
  app.add_option("--out", out, "directory for the CSV outputs of the determinism runs");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  OutputSink c4, c6, c9;
  report(1, "special functions", guarded(special_functions), failures);
  report(2, "T unitarity", guarded(t_unitarity), failures);
  report(3, "model annihilator", guarded(model_annihilator), failures);
  report(4, "dynamics", guarded([&] { return dynamics_check(out, c4); }), failures);
  report(5, "section density", guarded(section_density), failures);
  report(6, "limiting absorption", guarded([&] { return limiting_absorption_probe(out, c6); }), failures);
  report(7, "embedded eigenvalue", guarded(embedded_eigenvalue), failures);
  report(8, "boundary pairing", guarded(boundary_pairing_check), failures);
  ScatterRuns sr = scatter_runs(out, c9);
  report(9, "unitarity", guarded([&] { return unitarity(sr, c9); }), failures);
  report(10, "FIO structure", guarded(fio_structure), failures);
  report(11, "determinism", guarded([&] { return determinism(c4, c6, c9, out); }), failures);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
