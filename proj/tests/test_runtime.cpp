#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zs/experiments.hpp"
#include "zs/dynamics.hpp"
#include "zs/psido.hpp"

using namespace zs;

TEST_CASE("content hash is the git blob id") {
  CHECK(content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST_CASE("doubles print with 17 significant digits and round trip") {
  CHECK(fmt17(0.1) == "0.10000000000000001");
  for (double v : {1.0 / 3, -2.5e-300, 6.02214076e23}) CHECK(std::stod(fmt17(v)) == v);
}

TEST_CASE("config JSON round trip and validation") {
  RunConfig c;
  c.symbol = SymbolDescriptor::tao(1.5, 6);
  c.omega = 0.125;
  c.n1 = 64;
  c.eps_ladder = {0.5, 0.25};
  auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(config_from_json({{"bogus", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"n", 7}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"workers", 0}}), std::invalid_argument);
  CHECK(config_from_json({{"n", 32}}).n2 == 32);
}

TEST_CASE("config hash ignores output placement and worker count") {
  RunConfig a, b;
  b.out = "elsewhere";
  b.workers = 4;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) == "ce09a265d51d51fa4763f1a5d63d9f1fe9eff3e2");
  b.omega = 0.01;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("stamped outputs carry version, config and content hashes") {
  CsvTable t;
  t.columns = {"a", "b"};
  t.add({"1", "2"});
  std::string s = stamped_text("cfg", t.body());
  CHECK(s.rfind("# zscat spec=" + std::string(kSpecVersion) + " config=cfg content=" + content_hash("a,b\n1,2\n"),
                0) == 0);
  auto j = nlohmann::json::parse(stamped_json("cfg", {{"x", 1}}));
  CHECK(j["spec_version"] == kSpecVersion);
  CHECK(j["config_hash"] == "cfg");
  CHECK(j["content_hash"] == content_hash(nlohmann::json{{"x", 1}}.dump(2)));
}

TEST_CASE("PPM layout") {
  Image im;
  im.width = 2;
  im.height = 1;
  im.rgb = {255, 0, 0, 0, 0, 255};
  auto b = ppm_bytes("cfg", im);
  CHECK(b.rfind("P6\n# zscat spec=", 0) == 0);
  CHECK(b.find("\n2 1\n255\n") != std::string::npos);
  CHECK(b.substr(b.size() - 6) == std::string("\xff\0\0\0\0\xff", 6));
  im.rgb.pop_back();
  CHECK_THROWS(ppm_bytes("cfg", im));
}

TEST_CASE("exit codes by failure class") {
  CHECK(exit_code_for(std::invalid_argument("x")) == kExitUsage);
  CHECK(exit_code_for(AssumptionViolation("x")) == kExitAssumption);
  CHECK(exit_code_for(NoConvergence("x", {})) == kExitNoConvergence);
}

TEST_CASE("runners are deterministic across worker counts") {
  RunConfig c;
  c.n1 = c.n2 = 128;
  c.Ks = 2;
  OutputSink a, b;
  run_scatter(c, a);
  c.workers = 4;
  run_scatter(c, b);
  CHECK(a.files == b.files);
  CHECK(a.files.count("S.txt") == 1);
  CHECK(a.report["defect"].get<double>() == doctest::Approx(0.25556332768043105).epsilon(1e-8));
}

TEST_CASE("resolvent runner reports its ladder") {
  RunConfig c;
  c.symbol = SymbolDescriptor::internal_wave(2.0);
  c.omega = 0.05;
  c.n1 = c.n2 = 128;
  OutputSink s;
  run_resolvent(c, s);
  CHECK(s.report["monotone"].get<bool>());
  CHECK(s.report["used_epsilons"].size() == 2);
  CHECK(s.files.count("convergence.csv") == 1);
  CHECK(s.files.count("u.zsf") == 1);
  c.eps_ladder = {1e-3, 1e-4};
  OutputSink f;
  CHECK_THROWS_AS(run_resolvent(c, f), NoConvergence);
  CHECK(f.files.count("convergence.csv") == 1);
}

TEST_CASE("saddle points stop the cycle search") {
  RunConfig c;
  c.omega = -1.0;
  OutputSink s;
  CHECK_THROWS_AS(run_cycles(c, s), AssumptionViolation);
}
