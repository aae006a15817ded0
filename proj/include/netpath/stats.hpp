#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netpath/distributions.hpp"
#include "netpath/errors.hpp"
#include "netpath/flow.hpp"
#include "netpath/laplacian.hpp"
#include "netpath/network.hpp"
#include "netpath/paths.hpp"
#include "netpath/reduce.hpp"

namespace netpath {

enum class QStatus { ok, single_path, no_paths };

inline const char* to_string(QStatus s) {
  switch (s) {
    case QStatus::ok: return "ok";
    case QStatus::single_path: return "single_path";
    case QStatus::no_paths: return "no_paths";
  }
  return "unknown";
}

/// Summary of the path-inconsistency test for one comparison. p_value is
/// NaN when undefined (dof = 0).
struct InconsistencyReport {
  TreatmentId source;
  TreatmentId sink;
  double q = 0.0;
  std::size_t dof = 0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_paths = 0;        // P, every enumerated path
  std::size_t n_independent = 0;  // P', after dependency removal
  std::vector<EvidencePath> kept_paths;
  std::vector<RemovedRow> removed;
  QStatus status = QStatus::ok;
  /// Set when the reduced covariance factorization reports a condition
  /// estimate above 1e12; the statistic is still returned.
  bool sigma_ill_conditioned = false;
};

/// Pairwise disagreement between independent paths, scaled so the most
/// conflicting pair scores 1. All-equal effects make the scale 0/0; that
/// case is flagged degenerate and the matrix is all zeros.
struct NetpathMatrix {
  Eigen::MatrixXd m;
  std::vector<std::string> labels;  // "pi_1" .. "pi_P'"
  bool degenerate = false;
};

struct ZTestResult {
  double omega = 0.0;  // absolute difference under test
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct AnalysisOptions {
  double flow_tol = 1e-10;
  double ref_tol = 1e-9;
  std::size_t path_cap = 10000;
};

/// Full output of the per-comparison pipeline, including the
/// intermediate objects that the verbose report prints.
struct PathAnalysis {
  Estimate nma{0.0, 0.0};
  HatRow hat;
  EvidenceFlow flow;
  PathSystem all_paths;
  Reduction reduction;
  PathSystem independent;
  InconsistencyReport report;
  NetpathMatrix netpath;
};

namespace detail {

inline std::vector<std::string> path_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) labels.push_back("pi_" + std::to_string(k));
  return labels;
}

}  // namespace detail

/// Scaled pairwise disagreement matrix: m_pq = |effect_p - effect_q|
/// divided by the largest such difference over all pairs.
inline NetpathMatrix netpath_matrix(const Eigen::VectorXd& effects) {
  const auto p = effects.size();
  if (p < 2) {
    throw InsufficientPaths("netpath_matrix: at least two paths required, got " +
                            std::to_string(p));
  }
  NetpathMatrix out;
  out.labels = detail::path_labels(static_cast<std::size_t>(p));
  out.m = Eigen::MatrixXd::Zero(p, p);
  double scale = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      scale = std::max(scale, std::abs(effects[a] - effects[b]));
    }
  }
  if (scale == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      if (a != b) out.m(a, b) = std::abs(effects[a] - effects[b]) / scale;
    }
  }
  return out;
}

/// Path-inconsistency pipeline for one comparison, reusing an already
/// factorized Laplacian so a whole-network sweep pays for the
/// pseudo-inverse once.
inline PathAnalysis q_path(const EvidenceNetwork& net, const LaplacianSystem& sys,
                           const TreatmentId& i, const TreatmentId& j,
                           const AnalysisOptions& opt = {}) {
  PathAnalysis an;
  an.hat = hat_row(sys, net, i, j);
  const auto si = static_cast<Eigen::Index>(net.require_node(i));
  const auto sj = static_cast<Eigen::Index>(net.require_node(j));
  an.nma.effect = an.hat.coefficients.dot(net.theta());
  an.nma.variance = sys.pinv(si, si) - sys.pinv(si, sj) - sys.pinv(sj, si) + sys.pinv(sj, sj);

  an.flow = evidence_flow(net, an.hat, opt.flow_tol);
  an.all_paths = build_path_system(net, an.flow, opt.path_cap);
  an.reduction = ref_reduce(an.all_paths.adjacency, opt.ref_tol);
  an.independent = independent_subsystem(an.all_paths, an.reduction, net);

  InconsistencyReport& rep = an.report;
  rep.source = i;
  rep.sink = j;
  rep.n_paths = an.all_paths.paths.size();
  rep.n_independent = an.independent.paths.size();
  rep.kept_paths = an.independent.paths;
  rep.removed = an.reduction.removed;

  if (rep.n_paths == 0) {
    rep.status = QStatus::no_paths;
    an.netpath.degenerate = true;
    return an;
  }
  if (rep.n_independent == 1) {
    rep.status = QStatus::single_path;
    an.netpath.m = Eigen::MatrixXd::Zero(1, 1);
    an.netpath.labels = detail::path_labels(1);
    an.netpath.degenerate = true;
    return an;
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(an.independent.sigma);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalFailure("q_path: covariance factorization failed for " + i.label + ":" +
                           j.label);
  }
  rep.sigma_ill_conditioned = ldlt.rcond() < 1e-12;
  const Eigen::VectorXd d = an.independent.effects.array() - an.nma.effect;
  const double q = d.dot(ldlt.solve(d));
  if (!std::isfinite(q)) {
    throw NumericalFailure("q_path: statistic is not finite for " + i.label + ":" + j.label);
  }
  rep.q = std::max(q, 0.0);
  rep.dof = rep.n_independent - 1;
  rep.p_value = chi2_sf(rep.q, static_cast<double>(rep.dof));
  rep.status = QStatus::ok;

  an.netpath = netpath_matrix(an.independent.effects);
  return an;
}

inline PathAnalysis q_path(const EvidenceNetwork& net, const TreatmentId& i,
                           const TreatmentId& j, const AnalysisOptions& opt = {}) {
  return q_path(net, laplacian_pinv(net), i, j, opt);
}

/// Reference evaluation of the quadratic form over the FULL, possibly
/// rank-deficient path covariance, using the Moore-Penrose
/// pseudo-inverse. Equals the reduced-system statistic; kept as an
/// independent cross-check.
inline double q_path_pinv(const PathSystem& system, double nma_effect) {
  const Eigen::VectorXd d = system.effects.array() - nma_effect;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(system.sigma);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("q_path_pinv: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() * 1e-12 : 0.0;
  const Eigen::VectorXd y = es.eigenvectors().transpose() * d;
  double q = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev[k]) > cutoff) q += y[k] * y[k] / ev[k];
  }
  return std::max(q, 0.0);
}

/// Splits the evidence on a directly compared pair: the direct estimate
/// against the network estimate recomputed with that edge removed. The
/// subnetwork is restricted to the connected component containing i.
inline ZTestResult side_split(const EvidenceNetwork& net, const TreatmentId& i,
                              const TreatmentId& j) {
  net.require_node(i);
  net.require_node(j);
  const auto edge_idx = net.find_edge(i, j);
  if (!edge_idx) {
    throw NoDirectEvidence("side_split: no direct comparison " + i.label + ":" + j.label);
  }
  const DirectComparison& direct_edge = net.edges()[*edge_idx];
  const double direct_effect = direct_edge.t1 == i ? direct_edge.effect : -direct_edge.effect;

  std::vector<DirectComparison> rest;
  rest.reserve(net.n_edges() > 0 ? net.n_edges() - 1 : 0);
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    if (e != *edge_idx) rest.push_back(net.edges()[e]);
  }
  if (rest.empty()) {
    throw NoIndirectEvidence("side_split: removing " + i.label + ":" + j.label +
                             " leaves no evidence");
  }

  // Union-find over the remaining labels; keep i's component.
  std::map<std::string, std::string> parent;
  const std::function<std::string(std::string)> find = [&](std::string x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& c : rest) {
    parent.emplace(c.t1.label, c.t1.label);
    parent.emplace(c.t2.label, c.t2.label);
  }
  for (const auto& c : rest) {
    parent[find(c.t1.label)] = find(c.t2.label);
  }
  if (!parent.count(i.label) || !parent.count(j.label) ||
      find(i.label) != find(j.label)) {
    throw NoIndirectEvidence("side_split: removing " + i.label + ":" + j.label +
                             " disconnects the comparison");
  }
  const std::string root = find(i.label);
  std::vector<DirectComparison> component;
  for (const auto& c : rest) {
    if (find(c.t1.label) == root) component.push_back(c);
  }

  const EvidenceNetwork subnet = build_network(std::move(component));
  const Estimate indirect = nma_estimate(laplacian_pinv(subnet), subnet, i, j);

  ZTestResult out;
  out.omega = std::abs(direct_effect - indirect.effect);
  out.se = std::sqrt(direct_edge.variance + indirect.variance);
  out.z = out.omega / out.se;
  out.p_value = normal_sf_two_sided(out.z);
  return out;
}

/// Z-test on the signed sum of effects around a closed loop of observed
/// comparisons. The loop is given as the visited treatments in order;
/// the closing edge back to the first treatment is implied.
inline ZTestResult loop_test(const EvidenceNetwork& net, const std::vector<TreatmentId>& loop) {
  if (loop.size() < 3) {
    throw InvalidLoop("loop_test: a loop must visit at least three treatments");
  }
  {
    std::vector<std::string> labels;
    labels.reserve(loop.size());
    for (const auto& t : loop) labels.push_back(t.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw InvalidLoop("loop_test: loop revisits a treatment");
    }
  }
  double sum = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const TreatmentId& a = loop[k];
    const TreatmentId& b = loop[(k + 1) % loop.size()];
    const auto idx = net.find_edge(a, b);
    if (!idx) {
      throw InvalidLoop("loop_test: no direct comparison " + a.label + ":" + b.label);
    }
    const DirectComparison& edge = net.edges()[*idx];
    sum += edge.t1 == a ? edge.effect : -edge.effect;
    var += edge.variance;
  }
  ZTestResult out;
  out.omega = std::abs(sum);
  out.se = std::sqrt(var);
  out.z = out.omega / out.se;
  out.p_value = normal_sf_two_sided(out.z);
  return out;
}

/// Lists the simple cycles through the direct edge (i, j), at most
/// max_len treatments each, as treatment sequences starting at i and
/// ending at j. Neighbours are explored in label order, so the listing
/// is deterministic.
inline std::vector<std::vector<TreatmentId>> enumerate_loops(const EvidenceNetwork& net,
                                                             const TreatmentId& i,
                                                             const TreatmentId& j,
                                                             std::size_t max_len = 16) {
  const std::size_t src = net.require_node(i);
  const std::size_t dst = net.require_node(j);
  const auto direct = net.find_edge(src, dst);
  if (!direct) {
    throw NoDirectEvidence("enumerate_loops: no direct comparison " + i.label + ":" + j.label);
  }
  if (max_len < 3) {
    throw InvalidLoop("enumerate_loops: max_len must be at least 3");
  }

  // Undirected adjacency with the direct edge masked out.
  std::vector<std::vector<std::size_t>> adj(net.n_nodes());
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    if (e == *direct) continue;
    const std::size_t a = net.require_node(net.edges()[e].t1);
    const std::size_t b = net.require_node(net.edges()[e].t2);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  std::vector<std::vector<TreatmentId>> loops;
  std::vector<std::size_t> path{src};
  std::vector<bool> visited(net.n_nodes(), false);
  visited[src] = true;

  const std::function<void()> dfs = [&] {
    const std::size_t v = path.back();
    if (v == dst) {
      std::vector<TreatmentId> loop;
      loop.reserve(path.size());
      for (const std::size_t n : path) loop.push_back(net.nodes()[n]);
      loops.push_back(std::move(loop));
      return;
    }
    if (path.size() >= max_len) return;
    for (const std::size_t w : adj[v]) {
      if (visited[w]) continue;
      visited[w] = true;
      path.push_back(w);
      dfs();
      path.pop_back();
      visited[w] = false;
    }
  };
  dfs();
  return loops;
}

}  // namespace netpath
