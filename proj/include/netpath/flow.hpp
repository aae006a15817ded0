#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "netpath/errors.hpp"
#include "netpath/laplacian.hpp"
#include "netpath/network.hpp"

namespace netpath {

/// One directed arc of the evidence-flow graph. from/to are node indices
/// into the network's node list; flow > 0 always; edge_index points back
/// at the undirected network edge the arc came from.
struct FlowArc {
  std::size_t from = 0;
  std::size_t to = 0;
  double flow = 0.0;
  std::size_t edge_index = 0;
};

/// Per-comparison directed acyclic evidence-flow graph. Arc lists are
/// indexed by source node; each inner list is sorted by target node index
/// so that traversals visit neighbours in label order.
struct EvidenceFlow {
  std::size_t source = 0;
  std::size_t sink = 0;
  std::vector<std::vector<FlowArc>> out;  // out[v]: arcs leaving v
  std::size_t n_arcs = 0;
};

namespace detail {

/// Net flow out of each node; must be +1 at the source, -1 at the sink
/// and 0 elsewhere, or the coefficients do not describe a unit flow.
inline void check_conservation(const EvidenceFlow& flow, std::size_t n_nodes) {
  std::vector<double> net(n_nodes, 0.0);
  for (const auto& arcs : flow.out) {
    for (const auto& arc : arcs) {
      net[arc.from] += arc.flow;
      net[arc.to] -= arc.flow;
    }
  }
  constexpr double tol = 1e-8;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    double expected = 0.0;
    if (v == flow.source) expected = 1.0;
    if (v == flow.sink) expected = -1.0;
    if (std::abs(net[v] - expected) > tol) {
      throw NumericalFailure("evidence_flow: flow conservation violated at node " +
                             std::to_string(v));
    }
  }
}

/// Kahn's algorithm; a leftover node means a directed cycle, which a
/// current flow can never contain unless the numerics went wrong.
inline void check_acyclic(const EvidenceFlow& flow, std::size_t n_nodes) {
  std::vector<std::size_t> indeg(n_nodes, 0);
  for (const auto& arcs : flow.out) {
    for (const auto& arc : arcs) ++indeg[arc.to];
  }
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    if (indeg[v] == 0) ready.push(v);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop();
    ++seen;
    for (const auto& arc : flow.out[v]) {
      if (--indeg[arc.to] == 0) ready.push(arc.to);
    }
  }
  if (seen != n_nodes) {
    throw NumericalFailure("evidence_flow: directed cycle detected");
  }
}

}  // namespace detail

/// Builds the directed evidence-flow graph for a hat row. Each edge with
/// a nonzero coefficient becomes one arc oriented along the direction of
/// flow; coefficients with |c| <= tol * max|c| are treated as zero so
/// that round-off does not manufacture spurious arcs. tol is relative;
/// it must be positive.
inline EvidenceFlow evidence_flow(const EvidenceNetwork& net, const HatRow& row,
                                  double tol = 1e-10) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw InvalidTolerance("evidence_flow: tolerance must be positive and finite");
  }
  EvidenceFlow flow;
  flow.source = net.require_node(row.source);
  flow.sink = net.require_node(row.sink);
  flow.out.assign(net.n_nodes(), {});

  const double scale = row.coefficients.size() > 0 ? row.coefficients.cwiseAbs().maxCoeff() : 0.0;
  const double cut = tol * scale;
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const double c = row.coefficients[static_cast<Eigen::Index>(e)];
    if (std::abs(c) <= cut) continue;
    const auto& edge = net.edges()[e];
    const std::size_t a = net.require_node(edge.t1);
    const std::size_t b = net.require_node(edge.t2);
    FlowArc arc;
    arc.edge_index = e;
    if (c > 0) {
      arc.from = a;
      arc.to = b;
      arc.flow = c;
    } else {
      arc.from = b;
      arc.to = a;
      arc.flow = -c;
    }
    flow.out[arc.from].push_back(arc);
    ++flow.n_arcs;
  }
  for (auto& arcs : flow.out) {
    std::sort(arcs.begin(), arcs.end(),
              [](const FlowArc& x, const FlowArc& y) { return x.to < y.to; });
  }

  detail::check_conservation(flow, net.n_nodes());
  detail::check_acyclic(flow, net.n_nodes());
  return flow;
}

}  // namespace netpath
