#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zs/dynamics.hpp"
#include "zs/experiments.hpp"
#include "zs/normalform.hpp"

namespace py = pybind11;
using namespace zs;

namespace {

using Runner = void (*)(const RunConfig&, OutputSink&);

Runner runner(const std::string& name) {
  if (name == "cycles") return run_cycles;
  if (name == "resolvent") return run_resolvent;
  if (name == "scatter") return run_scatter;
  if (name == "fio") return run_fio;
  if (name == "render") return run_render;
  if (name == "eigencheck") return run_eigencheck;
  throw std::invalid_argument("unknown subcommand: " + name);
}

// returns (exit code, report JSON text, {file name: bytes}); out stays in memory unless the config sets it
py::tuple run(const std::string& sub, const std::string& config_json) {
  OutputSink out;
  int code = kExitOk;
  std::string err;
  {
    py::gil_scoped_release nogil;
    try {
      RunConfig c = config_from_json(nlohmann::json::parse(config_json));
      out.dir = c.out;
      runner(sub)(c, out);
    } catch (const std::exception& e) {
      code = exit_code_for(e);
      err = e.what();
    }
  }
  if (!err.empty()) out.report["error"] = err;
  py::dict files;
  for (const auto& [k, v] : out.files) files[py::str(k)] = py::bytes(v);
  return py::make_tuple(code, out.report.dump(), files);
}

}  // namespace

PYBIND11_MODULE(_zscat, m) {
  m.attr("spec_version") = kSpecVersion;
  m.def("run", &run, py::arg("subcommand"), py::arg("config_json"));
  m.def("default_config", [] {
    RunConfig c;
    c.out = "";
    return to_json(c).dump();
  });
  m.def("config_hash", [](const std::string& j) { return config_hash(config_from_json(nlohmann::json::parse(j))); });
  m.def("content_hash", [](const py::bytes& b) { return content_hash(std::string(b)); });
  m.def("alpha", [](double x) { return alpha(x).value; });
  m.def("evaluate", [](const std::string& symbol_json, double x1, double x2, double xi1, double xi2) {
    return evaluate(symbol_from_json(nlohmann::json::parse(symbol_json)), x1, x2, xi1, xi2);
  });
}
