#pragma once

#include <exception>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "zs/runtime.hpp"

namespace zs {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitAssumption = 2, kExitNoConvergence = 3 };

int exit_code_for(const std::exception& e);

// collects named outputs; writes them under dir when dir is set
struct OutputSink {
  std::string dir;
  std::map<std::string, std::string> files;
  nlohmann::json report = nlohmann::json::object();

  void put(const std::string& name, const std::string& bytes);
};

void run_cycles(const RunConfig& c, OutputSink& out);
void run_resolvent(const RunConfig& c, OutputSink& out);
void run_scatter(const RunConfig& c, OutputSink& out);
void run_fio(const RunConfig& c, OutputSink& out);
void run_render(const RunConfig& c, OutputSink& out);
void run_eigencheck(const RunConfig& c, OutputSink& out);

}  // namespace zs
