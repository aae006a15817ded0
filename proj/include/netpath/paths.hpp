#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netpath/errors.hpp"
#include "netpath/flow.hpp"
#include "netpath/network.hpp"

namespace netpath {

/// One source-to-sink path of the evidence-flow graph. nodes holds the
/// visited node indices in order; edge_indices[k] is the network edge
/// between nodes[k] and nodes[k+1].
struct EvidencePath {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edge_indices;

  std::size_t size() const { return edge_indices.size(); }
};

/// Everything the inconsistency statistics need about the enumerated
/// paths: the binary path-by-edge incidence matrix C, the shared-edge
/// count matrix A = C C', the covariance Sigma = C V C' (V the diagonal
/// of edge variances), and each path's total effect and variance.
struct PathSystem {
  std::vector<EvidencePath> paths;
  Eigen::MatrixXd incidence;  // P x E, entries 0/1
  Eigen::MatrixXd adjacency;  // P x P, shared edge counts
  Eigen::MatrixXd sigma;      // P x P, path covariances
  Eigen::VectorXd effects;    // P
  Eigen::VectorXd variances;  // P
};

/// Enumerates every source-to-sink path by depth-first search, expanding
/// neighbours in ascending node-index order (node order is label order,
/// so the listing is deterministic across runs and platforms). The
/// direct comparison, when it carries flow, is listed first; the
/// indirect paths keep depth-first order. Throws PathExplosion once more
/// than `cap` paths exist.
inline std::vector<EvidencePath> enumerate_paths(const EvidenceFlow& flow,
                                                 std::size_t cap = 10000) {
  std::vector<EvidencePath> paths;
  std::vector<std::size_t> node_stack{flow.source};
  std::vector<std::size_t> edge_stack;
  // frame[d]: index of the next arc to try out of node_stack[d].
  std::vector<std::size_t> frame{0};

  while (!frame.empty()) {
    const std::size_t v = node_stack.back();
    if (v == flow.sink) {
      if (paths.size() >= cap) {
        throw PathExplosion("enumerate_paths: more than " + std::to_string(cap) +
                            " paths; raise the cap to enumerate them all");
      }
      paths.push_back(EvidencePath{node_stack, edge_stack});
      frame.pop_back();
      node_stack.pop_back();
      if (!edge_stack.empty()) edge_stack.pop_back();
      continue;
    }
    const auto& arcs = flow.out[v];
    if (frame.back() < arcs.size()) {
      const FlowArc& arc = arcs[frame.back()++];
      node_stack.push_back(arc.to);
      edge_stack.push_back(arc.edge_index);
      frame.push_back(0);
    } else {
      frame.pop_back();
      node_stack.pop_back();
      if (!edge_stack.empty()) edge_stack.pop_back();
    }
  }
  const auto direct = std::find_if(paths.begin(), paths.end(),
                                   [](const EvidencePath& p) { return p.size() == 1; });
  if (direct != paths.end()) {
    std::rotate(paths.begin(), direct, std::next(direct));
  }
  return paths;
}

/// Total effect along a path: edge effects added with the sign of
/// traversal relative to each edge's stored orientation.
inline double path_effect(const EvidenceNetwork& net, const EvidencePath& path) {
  double total = 0.0;
  for (std::size_t k = 0; k < path.edge_indices.size(); ++k) {
    const auto& edge = net.edges()[path.edge_indices[k]];
    const std::size_t from = path.nodes[k];
    const bool forward = net.require_node(edge.t1) == from;
    total += forward ? edge.effect : -edge.effect;
  }
  return total;
}

/// Total variance along a path: variances add regardless of direction.
inline double path_variance(const EvidenceNetwork& net, const EvidencePath& path) {
  double total = 0.0;
  for (const std::size_t e : path.edge_indices) {
    total += net.edges()[e].variance;
  }
  return total;
}

/// Assembles the path matrices for one comparison's flow graph.
inline PathSystem build_path_system(const EvidenceNetwork& net, const EvidenceFlow& flow,
                                    std::size_t cap = 10000) {
  PathSystem sys;
  sys.paths = enumerate_paths(flow, cap);
  const auto p = static_cast<Eigen::Index>(sys.paths.size());
  const auto e = static_cast<Eigen::Index>(net.n_edges());

  sys.incidence = Eigen::MatrixXd::Zero(p, e);
  sys.effects.resize(p);
  sys.variances.resize(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const EvidencePath& path = sys.paths[static_cast<std::size_t>(r)];
    for (const std::size_t idx : path.edge_indices) {
      sys.incidence(r, static_cast<Eigen::Index>(idx)) = 1.0;
    }
    sys.effects[r] = path_effect(net, path);
    sys.variances[r] = path_variance(net, path);
  }

  sys.adjacency = sys.incidence * sys.incidence.transpose();
  sys.sigma = sys.incidence * net.variances().asDiagonal() * sys.incidence.transpose();
  return sys;
}

}  // namespace netpath
