#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zs/experiments.hpp"

using namespace zs;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> family;
  std::optional<double> beta, lambda, cone, alpha, omega, eta0;
  std::optional<int> k, n, n1, n2, Ks, seeds, workers, count, packets;
  std::vector<double> eps, deltas, window;
  std::optional<std::string> out, rhs, field;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration");
  sub->add_option("--family", f.family, "internal-wave | internal-wave-homogeneous | normal-form | tao");
  sub->add_option("--beta", f.beta);
  sub->add_option("--lambda", f.lambda);
  sub->add_option("--cone", f.cone);
  sub->add_option("--alpha", f.alpha);
  sub->add_option("--k", f.k, "tao plateau frequency");
  sub->add_option("--omega", f.omega);
  sub->add_option("--n", f.n, "grid points per period in both directions");
  sub->add_option("--n1", f.n1);
  sub->add_option("--n2", f.n2);
  sub->add_option("--Ks", f.Ks, "section band");
  sub->add_option("--eps", f.eps, "absorption ladder, decreasing");
  sub->add_option("--deltas", f.deltas, "trace distances for extraction");
  sub->add_option("--seeds", f.seeds);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--workers", f.workers);
  sub->add_option("--rhs", f.rhs, "resolvent data as JSON");
  sub->add_option("--window", f.window, "eigencheck window a b")->expected(2);
  sub->add_option("--count", f.count, "eigencheck count");
  sub->add_option("--packets", f.packets);
  sub->add_option("--eta0", f.eta0);
}

RunConfig resolve(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) j = to_json(load_config(f.config));
  auto& sym = j["symbol"];
  if (sym.is_null()) sym = to_json(SymbolDescriptor{});
  if (f.family) {
    std::string fam = *f.family;
    sym = nlohmann::json{{"family", fam}};
  }
  if (f.beta) sym["beta"] = *f.beta;
  if (f.lambda) sym["lambda"] = *f.lambda;
  if (f.cone) sym["cone"] = *f.cone;
  if (f.alpha) sym["alpha"] = *f.alpha;
  if (f.k) sym["k"] = *f.k;
  if (f.omega) j["omega"] = *f.omega;
  if (f.n) j["n1"] = j["n2"] = *f.n;
  if (f.n1) j["n1"] = *f.n1;
  if (f.n2) j["n2"] = *f.n2;
  if (f.Ks) j["Ks"] = *f.Ks;
  if (!f.eps.empty()) j["eps_ladder"] = f.eps;
  if (!f.deltas.empty()) j["delta_ladder"] = f.deltas;
  if (f.seeds) j["seeds"] = *f.seeds;
  if (f.out) j["out"] = *f.out;
  if (f.workers) j["workers"] = *f.workers;
  if (f.rhs) j["rhs"] = nlohmann::json::parse(*f.rhs);
  if (!f.window.empty()) j["eig_window"] = f.window;
  if (f.count) j["eig_count"] = *f.count;
  if (f.packets) j["packets"] = *f.packets;
  if (f.eta0) j["eta0"] = *f.eta0;
  if (f.field) j["field"] = *f.field;
  return config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zscat: scattering experiments for 0th order operators on the torus"};
  app.require_subcommand(1);
  Flags flags;
  using Runner = void (*)(const RunConfig&, OutputSink&);
  std::vector<std::pair<CLI::App*, Runner>> subs;
  subs.emplace_back(app.add_subcommand("cycles", "limit cycles and the scattering relation"), run_cycles);
  subs.emplace_back(app.add_subcommand("resolvent", "limiting absorption solve with convergence report"),
                    run_resolvent);
  subs.emplace_back(app.add_subcommand("scatter", "scattering matrix and unitarity report"), run_scatter);
  subs.emplace_back(app.add_subcommand("fio", "coherent-state transport through the conjugated matrix"), run_fio);
  subs.emplace_back(app.add_subcommand("render", "PPM heatmap of |u| from a field dump"), run_render);
  subs.emplace_back(app.add_subcommand("eigencheck", "eigenvalues of the truncated matrix in a window"),
                    run_eigencheck);
  for (auto& [sub, run] : subs) {
    add_flags(sub, flags);
    if (std::string(sub->get_name()) == "render") sub->add_option("field", flags.field, "field dump")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    RunConfig cfg = resolve(flags);
    OutputSink out;
    out.dir = cfg.out;
    for (auto& [sub, run] : subs)
      if (sub->parsed()) run(cfg, out);
    std::cout << out.report.dump() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "zscat: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
