#include "zs/runtime.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace zs {

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["symbol"] = to_json(c.symbol);
  j["omega"] = c.omega;
  j["n1"] = c.n1;
  j["n2"] = c.n2;
  j["Ks"] = c.Ks;
  j["eps_ladder"] = c.eps_ladder;
  j["delta_ladder"] = c.delta_ladder;
  j["seeds"] = c.seeds;
  j["out"] = c.out;
  j["workers"] = c.workers;
  j["rhs"] = c.rhs;
  j["eig_window"] = {c.eig_lo, c.eig_hi};
  j["eig_count"] = c.eig_count;
  j["packets"] = c.packets;
  j["eta0"] = c.eta0;
  j["field"] = c.field;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  static const char* known[] = {"symbol", "omega", "n1", "n2", "n", "Ks", "eps_ladder", "delta_ladder", "seeds",
                                "out", "workers", "rhs", "eig_window", "eig_count", "packets", "eta0", "field"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok |= it.key() == k;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }
  RunConfig c;
  if (j.contains("symbol")) c.symbol = symbol_from_json(j["symbol"]);
  if (j.contains("omega")) c.omega = j["omega"].get<double>();
  if (j.contains("n")) c.n1 = c.n2 = j["n"].get<int>();
  if (j.contains("n1")) c.n1 = j["n1"].get<int>();
  if (j.contains("n2")) c.n2 = j["n2"].get<int>();
  if (j.contains("Ks")) c.Ks = j["Ks"].get<int>();
  if (j.contains("eps_ladder")) c.eps_ladder = j["eps_ladder"].get<std::vector<double>>();
  if (j.contains("delta_ladder")) c.delta_ladder = j["delta_ladder"].get<std::vector<double>>();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<int>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("workers")) c.workers = j["workers"].get<int>();
  if (j.contains("rhs")) c.rhs = j["rhs"];
  if (j.contains("eig_window")) {
    auto w = j["eig_window"].get<std::vector<double>>();
    if (w.size() != 2) throw std::invalid_argument("eig_window needs two numbers");
    c.eig_lo = w[0];
    c.eig_hi = w[1];
  }
  if (j.contains("eig_count")) c.eig_count = j["eig_count"].get<int>();
  if (j.contains("packets")) c.packets = j["packets"].get<int>();
  if (j.contains("eta0")) c.eta0 = j["eta0"].get<double>();
  if (j.contains("field")) c.field = j["field"].get<std::string>();
  if (c.n1 < 8 || c.n2 < 8 || c.n1 % 2 || c.n2 % 2) throw std::invalid_argument("grid sizes must be even and >= 8");
  if (c.Ks < 0) throw std::invalid_argument("Ks must be >= 0");
  if (c.workers < 1) throw std::invalid_argument("workers must be >= 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("out");
  j.erase("workers");
  j.erase("field");
  return sha1_hex(j.dump());
}

std::string sha1_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha1(), nullptr))
    throw std::runtime_error("sha1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string content_hash(const std::string& bytes) {
  std::string blob = "blob " + std::to_string(bytes.size());
  blob.push_back('\0');
  return sha1_hex(blob + bytes);
}

std::string header_line(const std::string& config, const std::string& body) {
  return std::string("# zscat spec=") + kSpecVersion + " config=" + config + " content=" + content_hash(body);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::body() const {
  std::ostringstream os;
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

std::string stamped_text(const std::string& config, const std::string& body) {
  return header_line(config, body) + "\n" + body;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_csv(const std::string& path, const std::string& config, const CsvTable& t) {
  write_text(path, stamped_text(config, t.body()));
}

std::string stamped_json(const std::string& config, nlohmann::json j) {
  std::string body = j.dump(2);
  j["spec_version"] = kSpecVersion;
  j["config_hash"] = config;
  j["content_hash"] = content_hash(body);
  return j.dump(2) + "\n";
}

std::string ppm_bytes(const std::string& config, const Image& im) {
  if (im.rgb.size() != size_t(3) * im.width * im.height) throw std::invalid_argument("image size mismatch");
  std::string px(im.rgb.begin(), im.rgb.end());
  std::string out = "P6\n" + header_line(config, px) + "\n" + std::to_string(im.width) + " " +
                    std::to_string(im.height) + "\n255\n";
  return out + px;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create " + path + ": " + ec.message());
}

}  // namespace zs
