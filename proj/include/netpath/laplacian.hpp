#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "netpath/errors.hpp"
#include "netpath/network.hpp"

namespace netpath {

/// Weighted graph Laplacian of the network (weights 1/variance) together
/// with its Moore-Penrose pseudo-inverse. The pseudo-inverse is the whole
/// machinery behind network estimates: effects are node-potential
/// differences, variances are resistance distances, and hat-row entries
/// are edge currents.
struct LaplacianSystem {
  Eigen::MatrixXd laplacian;
  Eigen::MatrixXd pinv;
  /// Reciprocal condition estimate of (L + J/N); cond = 1/rcond.
  double rcond = 1.0;
  bool ill_conditioned = false;
};

/// The hat-matrix row for one comparison, restricted to the E observed
/// edges. coefficients[e] is the signed flow the comparison sends through
/// edge e (positive along the stored edge orientation).
struct HatRow {
  TreatmentId source;
  TreatmentId sink;
  Eigen::VectorXd coefficients;
};

namespace detail {

inline Eigen::MatrixXd weighted_laplacian(const EvidenceNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.n_nodes());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const auto& edge = net.edges()[e];
    const auto i = static_cast<Eigen::Index>(net.require_node(edge.t1));
    const auto j = static_cast<Eigen::Index>(net.require_node(edge.t2));
    const double w = net.weight(e);
    lap(i, i) += w;
    lap(j, j) += w;
    lap(i, j) -= w;
    lap(j, i) -= w;
  }
  return lap;
}

inline double penrose_residual(const Eigen::MatrixXd& l, const Eigen::MatrixXd& lp) {
  const double ln = l.norm();
  const double lpn = lp.norm();
  const double r1 = (l * lp * l - l).norm() / (ln > 0 ? ln : 1.0);
  const double r2 = (lp * l * lp - lp).norm() / (lpn > 0 ? lpn : 1.0);
  return std::max(r1, r2);
}

/// Pseudo-inverse through the spectral decomposition; used as a fallback
/// when the rank-completion solve is not accurate enough.
inline Eigen::MatrixXd pinv_by_eigendecomposition(const Eigen::MatrixXd& l) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("laplacian_pinv: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-12;
  Eigen::VectorXd inv = ev;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    inv[i] = std::abs(ev[i]) > cutoff ? 1.0 / ev[i] : 0.0;
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Computes L and its pseudo-inverse via the rank-completion identity
/// Lplus = (L + J/N)^{-1} - J/N, where J is the all-ones matrix. On a
/// connected network L + J/N is symmetric positive definite.
inline LaplacianSystem laplacian_pinv(const EvidenceNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.n_nodes());
  LaplacianSystem sys;
  sys.laplacian = detail::weighted_laplacian(net);

  const Eigen::MatrixXd jn = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd shifted = sys.laplacian + jn;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
  bool solved = false;
  if (ldlt.info() == Eigen::Success) {
    sys.rcond = ldlt.rcond();
    sys.ill_conditioned = sys.rcond < 1e-12;
    sys.pinv = ldlt.solve(Eigen::MatrixXd::Identity(n, n)) - jn;
    solved = detail::penrose_residual(sys.laplacian, sys.pinv) <= 1e-8;
  }
  if (!solved) {
    sys.pinv = detail::pinv_by_eigendecomposition(sys.laplacian);
    if (detail::penrose_residual(sys.laplacian, sys.pinv) > 1e-8) {
      throw NumericalFailure(
          "laplacian_pinv: pseudo-inverse residual exceeds tolerance; the "
          "network is disconnected or catastrophically conditioned");
    }
  }
  return sys;
}

/// Row of the hat matrix for the comparison (i, j): the coefficient on
/// edge (k, l) is w_kl * (e_i - e_j)' Lplus (e_k - e_l). Electrically,
/// the current through (k, l) when a unit current enters at i and leaves
/// at j.
inline HatRow hat_row(const LaplacianSystem& sys, const EvidenceNetwork& net,
                      const TreatmentId& i, const TreatmentId& j) {
  if (i == j) {
    throw InvalidComparison("hat_row: source and sink must differ ('" + i.label + "')");
  }
  const auto si = static_cast<Eigen::Index>(net.require_node(i));
  const auto sj = static_cast<Eigen::Index>(net.require_node(j));

  // Node potentials for a unit current injection.
  const Eigen::VectorXd phi = sys.pinv.col(si) - sys.pinv.col(sj);

  HatRow row;
  row.source = i;
  row.sink = j;
  row.coefficients.resize(static_cast<Eigen::Index>(net.n_edges()));
  for (std::size_t e = 0; e < net.n_edges(); ++e) {
    const auto& edge = net.edges()[e];
    const auto a = static_cast<Eigen::Index>(net.require_node(edge.t1));
    const auto b = static_cast<Eigen::Index>(net.require_node(edge.t2));
    row.coefficients[static_cast<Eigen::Index>(e)] = net.weight(e) * (phi[a] - phi[b]);
  }
  return row;
}

/// Network estimate and its variance for the comparison (i, j). The
/// effect is the hat row applied to the observed effects; the variance is
/// the resistance distance between i and j.
inline Estimate nma_estimate(const LaplacianSystem& sys, const EvidenceNetwork& net,
                             const TreatmentId& i, const TreatmentId& j) {
  const HatRow row = hat_row(sys, net, i, j);
  const auto si = static_cast<Eigen::Index>(net.require_node(i));
  const auto sj = static_cast<Eigen::Index>(net.require_node(j));
  const double variance =
      sys.pinv(si, si) - sys.pinv(si, sj) - sys.pinv(sj, si) + sys.pinv(sj, sj);
  return Estimate{row.coefficients.dot(net.theta()), variance};
}

}  // namespace netpath
