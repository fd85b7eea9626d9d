#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "zs/scattering.hpp"

using namespace zs;

namespace {

struct Setup {
  SymbolDescriptor s = SymbolDescriptor::homogeneous(2.0);
  std::vector<LimitCycle> sinks, sources;
  Setup() {
    for (auto& c : find_cycles(s, 0.0)) (c.kind == CycleKind::Sink ? sinks : sources).push_back(c);
  }
  ScatteringDataVector data(const std::vector<LimitCycle>& cs, int Ks) const {
    std::vector<int> ids;
    std::vector<double> lams;
    for (const auto& c : cs) {
      ids.push_back(c.id);
      lams.push_back(c.lyapunov);
    }
    return ScatteringDataVector(Ks, ids, lams);
  }
};

const Setup& setup() {
  static Setup s;
  return s;
}

ScatteringMatrixNumeric random_matrix(int Ks, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  ScatteringMatrixNumeric S;
  S.Ks = Ks;
  S.source_ids = {2, 3};
  S.sink_ids = {0, 1};
  S.source_lambdas = S.sink_lambdas = {2.0, 2.0};
  S.source_gammas = {-0.5, -0.5};
  S.sink_gammas = {0.5, 0.5};
  int d = 2 * (2 * Ks + 1);
  S.S = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S.S(i, j) = cplx(nd(rng), nd(rng));
  return S;
}

}  // namespace

TEST_CASE("incoming ansatz defect is smooth") {
  const auto& st = setup();
  TorusGrid g(128, 128);
  auto f = st.data(st.sources, 2);
  f.at(0, 1) = 1.0;
  f.at(1, -2) = cplx(0, 0.5);
  auto ms = incoming_ansatz(st.s, g, 0.0, f, st.sources);
  CHECK(l2_norm(ms.u) > 0);
  CHECK(ms.g_high_fraction < 1e-6);
  CHECK(l2_norm(ms.g) < l2_norm(ms.u));
}

TEST_CASE("extraction reads back the incoming data of the ansatz") {
  const auto& st = setup();
  TorusGrid g(256, 256);
  auto f = st.data(st.sources, 2);
  f.at(0, 0) = 1.0;
  f.at(1, 2) = cplx(0.3, -0.4);
  auto ms = incoming_ansatz(st.s, g, 0.0, f, st.sources);
  auto back = extract_data(ms.u, st.sources, 2);
  CHECK((back.stacked() - f.stacked()).norm() / f.l2_norm() < 0.1);
}

TEST_CASE("unitary matrices have zero defect") {
  auto S = random_matrix(2, 1);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(S.S);
  S.S = qr.householderQ() * Eigen::MatrixXcd::Identity(S.S.rows(), S.S.cols());
  CHECK(S.unitarity_defect() < 1e-13);
  CHECK(S.max_column_norm() == doctest::Approx(1.0).epsilon(1e-13));
  S.S *= 1.1;
  CHECK(S.unitarity_defect() == doctest::Approx(0.21).epsilon(1e-10));
}

TEST_CASE("conjugation and gauge shifts keep the defect") {
  auto S = random_matrix(3, 2);
  auto C = conjugate(S);
  CHECK(C.kind == MatrixKind::Conjugated);
  CHECK(std::abs(C.unitarity_defect() - S.unitarity_defect()) < 1e-12 * S.unitarity_defect());
  auto G = gauge_shift(S, 1, true, 0.7);
  CHECK(std::abs(G.unitarity_defect() - S.unitarity_defect()) < 1e-12 * S.unitarity_defect());
  auto H = gauge_shift(G, 1, true, -0.7);
  CHECK((H.S - S.S).norm() < 1e-12 * S.S.norm());
}

TEST_CASE("matrix application follows the stacked layout") {
  const auto& st = setup();
  auto S = random_matrix(1, 3);
  auto f = st.data(st.sources, 1);
  f.at(1, -1) = 1.0;
  auto out = apply_matrix(S, f);
  CHECK((out.stacked() - S.S.col(3)).norm() < 1e-15);
}

TEST_CASE("cylinder model pairing balances the boundary fluxes") {
  CylinderPairingOptions po;
  po.lambda = 1.5;
  po.nodes = 8001;
  std::vector<CylinderMode> modes{{1, cplx(0.5, 0.2), cplx(-0.1, 0.3)}};
  auto r = model_cylinder_pairing(modes, po);
  CHECK(r.mismatch < 1e-4);
  CHECK(std::abs(r.rhs) > 0);
  CHECK(std::abs(model_cylinder_pairing_smooth(modes, 1, 0.6, 0.3, po)) < 1e-6);
}

TEST_CASE("frozen small scattering matrix") {
  const auto& st = setup();
  TorusGrid g(128, 128);
  auto m = assemble(st.s, g);
  ScatterOptions so;
  so.Ks = 2;
  auto S = scattering_matrix(st.s, m, 0.0, st.sources, st.sinks, so);
  CHECK(S.S.rows() == 10);
  CHECK(S.used_epsilons == std::vector<double>{1.0, 0.5});
  CHECK(S.unitarity_defect() == doctest::Approx(0.25556332768043105).epsilon(1e-8));
  so.workers = 3;
  auto S3 = scattering_matrix(st.s, m, 0.0, st.sources, st.sinks, so);
  CHECK(S3.S == S.S);
}
