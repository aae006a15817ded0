#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <netpath/paths.hpp>

#include "support/fixtures.hpp"

using namespace netpath;

namespace {

PathSystem system_for(const EvidenceNetwork& net, const std::string& from,
                      const std::string& to, std::size_t cap = 10000) {
  const auto sys = laplacian_pinv(net);
  const auto flow = evidence_flow(net, hat_row(sys, net, {from}, {to}));
  return build_path_system(net, flow, cap);
}

std::vector<std::string> node_labels(const EvidenceNetwork& net,
                                     const EvidencePath& path) {
  std::vector<std::string> out;
  for (const auto n : path.nodes) out.push_back(net.nodes()[n].label);
  return out;
}

}  // namespace

TEST_CASE("toy T_1:T_3 enumerates the direct path first") {
  const auto net = fixtures::toy_network();
  const auto ps = system_for(net, "T_1", "T_3");
  REQUIRE(ps.paths.size() == 3);
  CHECK(node_labels(net, ps.paths[0]) == std::vector<std::string>{"T_1", "T_3"});
  CHECK(node_labels(net, ps.paths[1]) ==
        std::vector<std::string>{"T_1", "T_2", "T_3"});
  CHECK(node_labels(net, ps.paths[2]) ==
        std::vector<std::string>{"T_1", "T_4", "T_3"});
  CHECK(ps.effects[0] == Catch::Approx(2.0));
  CHECK(ps.effects[1] == Catch::Approx(1.0));
  CHECK(ps.effects[2] == Catch::Approx(3.0));
  CHECK(ps.variances[0] == Catch::Approx(0.09));
  CHECK(ps.variances[1] == Catch::Approx(0.18));
  CHECK(ps.variances[2] == Catch::Approx(0.18));
}

TEST_CASE("toy T_2:T_3 path effects and variances") {
  const auto net = fixtures::toy_network();
  const auto ps = system_for(net, "T_2", "T_3");
  REQUIRE(ps.paths.size() == 3);
  CHECK(ps.effects[0] == Catch::Approx(0.5));
  CHECK(ps.effects[1] == Catch::Approx(1.5));
  CHECK(ps.effects[2] == Catch::Approx(2.5));
  CHECK(ps.variances[0] == Catch::Approx(0.09));
  CHECK(ps.variances[1] == Catch::Approx(0.18));
  CHECK(ps.variances[2] == Catch::Approx(0.27));
}

TEST_CASE("toy T_1:T_3 incidence matrix") {
  const auto net = fixtures::toy_network();
  const auto ps = system_for(net, "T_1", "T_3");
  // Edge order: T_1:T_2, T_1:T_3, T_1:T_4, T_2:T_3, T_3:T_4.
  const Eigen::MatrixXd expected{{0, 1, 0, 0, 0}, {1, 0, 0, 1, 0}, {0, 0, 1, 0, 1}};
  REQUIRE(ps.incidence.rows() == 3);
  CHECK((ps.incidence - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("toy T_2:T_3 covariance matrix entrywise") {
  const auto net = fixtures::toy_network();
  const auto ps = system_for(net, "T_2", "T_3");
  const Eigen::MatrixXd expected{
      {0.09, 0.0, 0.0}, {0.0, 0.18, 0.09}, {0.0, 0.09, 0.27}};
  CHECK((ps.sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("five-node network enumerates five paths in label order") {
  const auto net = fixtures::five_node_network();
  const auto ps = system_for(net, "T_1", "T_3");
  REQUIRE(ps.paths.size() == 5);
  const std::vector<std::vector<std::string>> expected{
      {"T_1", "T_2", "T_3"},
      {"T_1", "T_2", "T_4", "T_3"},
      {"T_1", "T_5", "T_2", "T_3"},
      {"T_1", "T_5", "T_2", "T_4", "T_3"},
      {"T_1", "T_5", "T_4", "T_3"}};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(node_labels(net, ps.paths[k]) == expected[k]);
  }
}

TEST_CASE("five-node shared-edge matrix") {
  const auto net = fixtures::five_node_network();
  const auto ps = system_for(net, "T_1", "T_3");
  const Eigen::MatrixXd expected{{2, 1, 1, 0, 0},
                                 {1, 3, 0, 2, 1},
                                 {1, 0, 3, 2, 1},
                                 {0, 2, 2, 4, 2},
                                 {0, 1, 1, 2, 3}};
  CHECK((ps.adjacency - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adjacency diagonal equals path lengths, sigma diagonal equals variances") {
  const auto net = fixtures::five_node_network();
  const auto ps = system_for(net, "T_2", "T_5");
  for (Eigen::Index k = 0; k < ps.adjacency.rows(); ++k) {
    const auto& path = ps.paths[static_cast<std::size_t>(k)];
    CHECK(ps.adjacency(k, k) == static_cast<double>(path.size()));
    CHECK(ps.sigma(k, k) == Catch::Approx(ps.variances[k]));
  }
}

TEST_CASE("path effect respects traversal direction against edge orientation") {
  // B:C is stored with effect for B vs C; the path A->C->B traverses it
  // against orientation, so the contribution flips sign.
  const auto net = build_network(
      {{{"A"}, {"C"}, 1.0, 0.5}, {{"B"}, {"C"}, 0.75, 0.5}});
  EvidencePath path;
  path.nodes = {0, 2, 1};  // A, C, B
  path.edge_indices = {*net.find_edge(TreatmentId{"A"}, TreatmentId{"C"}),
                       *net.find_edge(TreatmentId{"B"}, TreatmentId{"C"})};
  CHECK(path_effect(net, path) == Catch::Approx(1.0 - 0.75));
  CHECK(path_variance(net, path) == Catch::Approx(1.0));
}

TEST_CASE("path cap triggers PathExplosion") {
  const auto net = fixtures::five_node_network();
  CHECK_THROWS_AS(system_for(net, "T_1", "T_3", 4), PathExplosion);
  CHECK_NOTHROW(system_for(net, "T_1", "T_3", 5));
}

TEST_CASE("two-node network yields the single direct path") {
  const auto net = build_network({{{"A"}, {"B"}, 2.0, 0.3}});
  const auto ps = system_for(net, "A", "B");
  REQUIRE(ps.paths.size() == 1);
  CHECK(ps.paths[0].size() == 1);
  CHECK(ps.effects[0] == Catch::Approx(2.0));
  CHECK(ps.adjacency(0, 0) == 1.0);
  CHECK(ps.sigma(0, 0) == Catch::Approx(0.3));
}
