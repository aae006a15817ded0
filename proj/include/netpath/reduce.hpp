#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "netpath/errors.hpp"
#include "netpath/paths.hpp"

namespace netpath {

/// A dependent row dropped by the reduction. step is the 1-based pivot
/// step after which the row first became numerically zero; 0 means the
/// row was zero before elimination started.
struct RemovedRow {
  std::size_t index = 0;
  std::size_t step = 0;
};

/// Outcome of the row reduction: which original row indices stay, which
/// were dropped as linear combinations of the others, and the rank.
struct Reduction {
  std::vector<std::size_t> kept;  // ascending original row indices
  std::vector<RemovedRow> removed;
  std::size_t rank = 0;
};

/// Row echelon form of the path-adjacency matrix by Gaussian elimination
/// with partial pivoting. Ties in the pivot scan go to the earliest row,
/// so among interchangeable dependent paths the latest-enumerated one is
/// the one whose row reduces to zero and gets dropped. A row whose
/// entries all fall below tol * max|input entry| counts as zero. tol is
/// relative and must be positive.
inline Reduction ref_reduce(const Eigen::MatrixXd& m, double tol = 1e-9) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw InvalidTolerance("ref_reduce: tolerance must be positive and finite");
  }
  Eigen::MatrixXd a = m;
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  std::vector<std::size_t> origin(static_cast<std::size_t>(rows));
  std::iota(origin.begin(), origin.end(), 0);

  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double zero_tol = tol * scale;
  const auto row_is_zero = [&](Eigen::Index r) {
    return cols == 0 || a.row(r).cwiseAbs().maxCoeff() <= zero_tol;
  };

  // vanish_step[original index]: pivot step at which the row died.
  constexpr std::size_t alive = static_cast<std::size_t>(-1);
  std::vector<std::size_t> vanish_step(static_cast<std::size_t>(rows), alive);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (row_is_zero(r)) vanish_step[origin[static_cast<std::size_t>(r)]] = 0;
  }

  Eigen::Index pivot_row = 0;
  std::size_t step = 0;
  for (Eigen::Index col = 0; col < cols && pivot_row < rows; ++col) {
    Eigen::Index best = pivot_row;
    double best_abs = std::abs(a(pivot_row, col));
    for (Eigen::Index r = pivot_row + 1; r < rows; ++r) {
      const double v = std::abs(a(r, col));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs <= zero_tol) continue;
    if (best != pivot_row) {
      a.row(best).swap(a.row(pivot_row));
      std::swap(origin[static_cast<std::size_t>(best)],
                origin[static_cast<std::size_t>(pivot_row)]);
    }
    ++step;
    for (Eigen::Index r = pivot_row + 1; r < rows; ++r) {
      const double factor = a(r, col) / a(pivot_row, col);
      if (factor != 0.0) {
        a.row(r) -= factor * a.row(pivot_row);
        a(r, col) = 0.0;
        const std::size_t orig = origin[static_cast<std::size_t>(r)];
        if (vanish_step[orig] == alive && row_is_zero(r)) {
          vanish_step[orig] = step;
        }
      }
    }
    ++pivot_row;
  }

  Reduction red;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t orig = origin[static_cast<std::size_t>(r)];
    if (row_is_zero(r)) {
      // Dependency can surface without an explicit subtraction when the
      // input already held duplicates; fall back to step 0 marking.
      red.removed.push_back(RemovedRow{orig, vanish_step[orig] == alive ? 0 : vanish_step[orig]});
    } else {
      red.kept.push_back(orig);
    }
  }
  std::sort(red.kept.begin(), red.kept.end());
  std::sort(red.removed.begin(), red.removed.end(),
            [](const RemovedRow& x, const RemovedRow& y) { return x.index < y.index; });
  red.rank = red.kept.size();
  return red;
}

/// Restricts a path system to the kept rows of a reduction, preserving
/// enumeration order. The sliced matrices are rebuilt from the incidence
/// rows, which equals deleting the removed rows and columns of A and
/// Sigma.
inline PathSystem independent_subsystem(const PathSystem& sys, const Reduction& red,
                                        const EvidenceNetwork& net) {
  PathSystem out;
  const auto p = static_cast<Eigen::Index>(red.kept.size());
  out.paths.reserve(red.kept.size());
  out.incidence.resize(p, sys.incidence.cols());
  out.effects.resize(p);
  out.variances.resize(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto src = static_cast<Eigen::Index>(red.kept[static_cast<std::size_t>(r)]);
    out.paths.push_back(sys.paths[static_cast<std::size_t>(src)]);
    out.incidence.row(r) = sys.incidence.row(src);
    out.effects[r] = sys.effects[src];
    out.variances[r] = sys.variances[src];
  }
  out.adjacency = out.incidence * out.incidence.transpose();
  out.sigma = out.incidence * net.variances().asDiagonal() * out.incidence.transpose();
  return out;
}

}  // namespace netpath
