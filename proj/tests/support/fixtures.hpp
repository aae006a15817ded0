// Shared test networks and a deterministic random-network generator.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <netpath/network.hpp>

namespace fixtures {

using netpath::DirectComparison;
using netpath::EvidenceNetwork;
using netpath::TreatmentId;

/// Four treatments, five comparisons, all variances 0.09. The T_1:T_3
/// comparison has one direct and two two-step paths with effects 2, 1, 3.
inline std::vector<DirectComparison> toy_rows() {
  return {{{"T_1"}, {"T_2"}, 0.5, 0.09},
          {{"T_2"}, {"T_3"}, 0.5, 0.09},
          {{"T_1"}, {"T_3"}, 2.0, 0.09},
          {{"T_1"}, {"T_4"}, 1.5, 0.09},
          {{"T_4"}, {"T_3"}, 1.5, 0.09}};
}

inline EvidenceNetwork toy_network() { return netpath::build_network(toy_rows()); }

/// Five treatments, seven comparisons, unit variances. T_1:T_3 has no direct
/// edge and exactly five paths, one of which is linearly dependent.
inline std::vector<DirectComparison> five_node_rows() {
  return {{{"T_1"}, {"T_2"}, 1.0, 1.0},  {{"T_1"}, {"T_5"}, 0.5, 1.0},
          {{"T_2"}, {"T_3"}, 1.0, 1.0},  {{"T_2"}, {"T_4"}, 2.0, 1.0},
          {{"T_2"}, {"T_5"}, -0.5, 1.0}, {{"T_3"}, {"T_4"}, 1.5, 1.0},
          {{"T_4"}, {"T_5"}, -2.0, 1.0}};
}

inline EvidenceNetwork five_node_network() {
  return netpath::build_network(five_node_rows());
}

/// Connected random network on n nodes: a random spanning tree plus extra
/// edges chosen without replacement. Effects are N(0,1), variances in
/// [0.05, 2]. Deterministic for a given seed.
inline std::vector<DirectComparison> random_rows(std::mt19937& rng, std::size_t n,
                                                 std::size_t extra_edges) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("T_" + std::to_string(i + 1));

  std::normal_distribution<double> effect(0.0, 1.0);
  std::uniform_real_distribution<double> variance(0.05, 2.0);

  std::vector<DirectComparison> rows;
  std::vector<std::pair<std::size_t, std::size_t>> present;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const std::size_t j = pick(rng);
    rows.push_back({{labels[j]}, {labels[i]}, effect(rng), variance(rng)});
    present.emplace_back(j, i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> absent;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::find(present.begin(), present.end(), std::make_pair(i, j)) ==
          present.end())
        absent.emplace_back(i, j);
  std::shuffle(absent.begin(), absent.end(), rng);
  for (std::size_t k = 0; k < extra_edges && k < absent.size(); ++k) {
    const auto [i, j] = absent[k];
    rows.push_back({{labels[i]}, {labels[j]}, effect(rng), variance(rng)});
  }
  return rows;
}

/// Same topology generator, but effects derive from node potentials so every
/// loop sum is exactly zero up to rounding.
inline std::vector<DirectComparison> consistent_random_rows(std::mt19937& rng,
                                                            std::size_t n,
                                                            std::size_t extra_edges) {
  auto rows = random_rows(rng, n, extra_edges);
  std::normal_distribution<double> pot(0.0, 2.0);
  std::vector<double> potential(n);
  for (auto& p : potential) p = pot(rng);
  for (auto& row : rows) {
    const std::size_t i = std::stoul(row.t1.label.substr(2)) - 1;
    const std::size_t j = std::stoul(row.t2.label.substr(2)) - 1;
    row.effect = potential[j] - potential[i];
  }
  return rows;
}

}  // namespace fixtures
