#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netpath/errors.hpp"

namespace netpath {

/// A treatment is identified by its label. Labels are compared
/// lexicographically everywhere (node ordering, edge ordering, traversal
/// order), so the whole pipeline is deterministic for a given label set.
struct TreatmentId {
  std::string label;

  auto operator<=>(const TreatmentId&) const = default;
};

/// One edge of the aggregate network: a pairwise summary effect of t1
/// relative to t2 (additive scale) with its variance. Reversing the pair
/// negates the effect and keeps the variance.
struct DirectComparison {
  TreatmentId t1;
  TreatmentId t2;
  double effect = 0.0;
  double variance = 0.0;
  int n_studies = 1;
};

struct Estimate {
  double effect = 0.0;
  double variance = 0.0;
};

/// Common-effect inverse-variance pooling of several study contrasts for
/// one comparison.
inline Estimate pool_pairwise(std::span<const Estimate> contrasts) {
  if (contrasts.empty()) {
    throw MissingData("pool_pairwise: no contrasts supplied");
  }
  for (const auto& c : contrasts) {
    if (!(c.variance > 0.0)) {
      throw InvalidVariance("pool_pairwise: variance must be > 0, got " +
                            std::to_string(c.variance));
    }
  }
  // A lone contrast passes through untouched; round-tripping through the
  // weights would perturb the last bit.
  if (contrasts.size() == 1) {
    return contrasts.front();
  }
  double wsum = 0.0;
  double wesum = 0.0;
  for (const auto& c : contrasts) {
    const double w = 1.0 / c.variance;
    wsum += w;
    wesum += w * c.effect;
  }
  return Estimate{wesum / wsum, 1.0 / wsum};
}

/// The aggregate evidence network. Nodes are sorted by label; edges are
/// stored with the lexicographically smaller label first and sorted by
/// (t1, t2). Every downstream matrix indexes edges in this fixed order.
class EvidenceNetwork {
 public:
  const std::vector<TreatmentId>& nodes() const { return nodes_; }
  const std::vector<DirectComparison>& edges() const { return edges_; }

  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_edges() const { return edges_.size(); }

  /// Observed effect vector, in edge order.
  const Eigen::VectorXd& theta() const { return theta_; }
  /// Diagonal of the edge variance matrix V, in edge order.
  const Eigen::VectorXd& variances() const { return variances_; }

  double weight(std::size_t edge) const { return 1.0 / variances_[static_cast<Eigen::Index>(edge)]; }

  std::optional<std::size_t> node_index(const TreatmentId& t) const {
    auto it = node_index_.find(t.label);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_node(const TreatmentId& t) const {
    auto idx = node_index(t);
    if (!idx) {
      throw UnknownTreatment("unknown treatment '" + t.label + "'");
    }
    return *idx;
  }

  /// Index of the edge joining the unordered pair {a, b}, if observed.
  std::optional<std::size_t> find_edge(std::size_t a, std::size_t b) const {
    auto it = edge_index_.find(std::minmax(a, b));
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_edge(const TreatmentId& a, const TreatmentId& b) const {
    const auto ia = node_index(a);
    const auto ib = node_index(b);
    if (!ia || !ib) return std::nullopt;
    return find_edge(*ia, *ib);
  }

  friend EvidenceNetwork build_network(std::vector<DirectComparison> comparisons);

 private:
  std::vector<TreatmentId> nodes_;
  std::vector<DirectComparison> edges_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd variances_;
  std::map<std::string, std::size_t> node_index_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index_;
};

/// Builds the canonical network from raw comparisons: orients each row to
/// the lexicographic direction, pools duplicate rows for the same pair,
/// and verifies connectivity.
inline EvidenceNetwork build_network(std::vector<DirectComparison> comparisons) {
  if (comparisons.empty()) {
    throw MissingData("build_network: no comparisons supplied");
  }

  struct Pooled {
    std::vector<Estimate> contrasts;
    int n_studies = 0;
  };
  std::map<std::pair<std::string, std::string>, Pooled> by_pair;
  for (auto& c : comparisons) {
    if (c.t1.label.empty() || c.t2.label.empty()) {
      throw InvalidComparison("build_network: empty treatment label");
    }
    if (c.t1 == c.t2) {
      throw InvalidComparison("build_network: self comparison '" + c.t1.label +
                              "' vs itself");
    }
    if (!(c.variance > 0.0)) {
      throw InvalidVariance("build_network: comparison " + c.t1.label + " vs " +
                            c.t2.label + " has non-positive variance");
    }
    double effect = c.effect;
    auto key = std::make_pair(c.t1.label, c.t2.label);
    if (key.second < key.first) {
      std::swap(key.first, key.second);
      effect = -effect;
    }
    auto& slot = by_pair[key];
    slot.contrasts.push_back(Estimate{effect, c.variance});
    slot.n_studies += std::max(c.n_studies, 1);
  }

  EvidenceNetwork net;
  std::set<std::string> labels;
  for (const auto& [key, _] : by_pair) {
    labels.insert(key.first);
    labels.insert(key.second);
  }
  for (const auto& l : labels) {
    net.node_index_.emplace(l, net.nodes_.size());
    net.nodes_.push_back(TreatmentId{l});
  }

  net.theta_.resize(static_cast<Eigen::Index>(by_pair.size()));
  net.variances_.resize(static_cast<Eigen::Index>(by_pair.size()));
  for (const auto& [key, pooled] : by_pair) {
    const Estimate est = pool_pairwise(pooled.contrasts);
    const std::size_t e = net.edges_.size();
    net.edges_.push_back(DirectComparison{TreatmentId{key.first}, TreatmentId{key.second},
                                          est.effect, est.variance, pooled.n_studies});
    net.theta_[static_cast<Eigen::Index>(e)] = est.effect;
    net.variances_[static_cast<Eigen::Index>(e)] = est.variance;
    const std::size_t a = net.node_index_.at(key.first);
    const std::size_t b = net.node_index_.at(key.second);
    net.edge_index_.emplace(std::minmax(a, b), e);
  }

  // Connectivity check; the error spells out the components.
  const std::size_t n = net.nodes_.size();
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  const auto root = [&](std::size_t v) {
    while (comp[v] != v) {
      comp[v] = comp[comp[v]];
      v = comp[v];
    }
    return v;
  };
  for (const auto& [pair, _] : net.edge_index_) {
    comp[root(pair.first)] = root(pair.second);
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    groups[root(i)].push_back(net.nodes_[i].label);
  }
  if (groups.size() > 1) {
    std::string msg = "network is disconnected; components:";
    for (const auto& [_, members] : groups) {
      msg += " {";
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) msg += ",";
        msg += members[i];
      }
      msg += "}";
    }
    throw DisconnectedNetwork(msg);
  }
  return net;
}

}  // namespace netpath
