#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zs/symbols.hpp"

namespace zs {

inline constexpr const char* kSpecVersion = "1.0";

struct RunConfig {
  SymbolDescriptor symbol;
  double omega = 0.0;
  int n1 = 256, n2 = 256;
  int Ks = 8;
  std::vector<double> eps_ladder;    // empty: dyadic 2^0 .. 2^-14
  std::vector<double> delta_ladder;  // empty: extraction default
  int seeds = 8;
  std::string out = "out";
  int workers = 1;

  // resolvent right-hand side: {"kind": "mode", "k1":, "k2":} | {"kind": "zero"} | {"kind": "atom", ...}
  nlohmann::json rhs = {{"kind", "mode"}, {"k1", 0}, {"k2", 1}};
  double eig_lo = -0.05, eig_hi = 0.05;
  int eig_count = 16;
  int packets = 16;
  double eta0 = -1;
  std::string field;  // input dump for render
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// hash of the canonical JSON of everything that can change results; out and workers are left out
std::string config_hash(const RunConfig& c);

std::string sha1_hex(const std::string& bytes);
// git blob id: sha1("blob <size>\0" + bytes)
std::string content_hash(const std::string& bytes);

std::string header_line(const std::string& config, const std::string& body);

std::string fmt17(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
  std::string body() const;
};

// text outputs start with "# zscat spec=<v> config=<hash> content=<hash of the rest>"
std::string stamped_text(const std::string& config, const std::string& body);
void write_text(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const std::string& config, const CsvTable& t);

// JSON with spec_version, config_hash and the content hash of the unstamped dump
std::string stamped_json(const std::string& config, nlohmann::json j);

struct Image {
  int width = 0, height = 0;
  std::vector<uint8_t> rgb;
};
std::string ppm_bytes(const std::string& config, const Image& im);

std::string read_file(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace zs
