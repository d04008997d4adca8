#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

#include "qthermo/generator.hpp"

namespace qthermo {

/// Unique stationary distribution of a strongly connected generator.
///
/// Solves [W^T; 1^T] pi = [0; 1] in the least-squares sense with a
/// rank-revealing QR after checking that W^T has exactly one null direction.
/// The residual |pi W|_inf is checked against `tolerance` scaled by the
/// largest exit rate, since rates are only meaningful up to a time unit.
inline Distribution stationary(const Generator& g, double tolerance = tol::kStructural) {
  if (!g.strongly_connected()) {
    throw Error(ErrorCode::kNotIrreducible, "support graph is not strongly connected");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  const Matrix wt = g.matrix().transpose();

  Eigen::ColPivHouseholderQR<Matrix> rank_probe(wt);
  rank_probe.setThreshold(1e-13);
  if (rank_probe.rank() != n - 1) {
    throw Error(ErrorCode::kSolveFailure,
                "generator has rank " + std::to_string(rank_probe.rank()) + ", expected " +
                    std::to_string(n - 1));
  }

  Matrix a(n + 1, n);
  a.topRows(n) = wt;
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b[n] = 1.0;

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  Vector pi = qr.solve(b);
  // One refinement step recovers the digits lost to the appended row.
  pi += qr.solve(b - a * pi);

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0)) {
      throw Error(ErrorCode::kSolveFailure, "non-positive stationary entry " + std::to_string(i));
    }
  }
  pi /= pi.sum();

  const double scale = std::max(1.0, g.max_exit_rate());
  const double residual = (wt * pi).cwiseAbs().maxCoeff();
  if (residual > tolerance * scale) {
    throw Error(ErrorCode::kSolveFailure,
                "stationarity residual " + std::to_string(residual) + " exceeds tolerance");
  }
  return Distribution(std::move(pi));
}

struct DetailedBalanceReport {
  bool balanced = true;
  /// max over ordered pairs of |pi_i w_ij - pi_j w_ji|
  double worst_violation = 0.0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
};

inline DetailedBalanceReport detailed_balance_check(const Generator& g, const Distribution& pi,
                                                    double tolerance) {
  if (pi.size() != g.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "pi has the wrong length");
  }
  DetailedBalanceReport report;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double gap = std::abs(pi[i] * g.rate(i, j) - pi[j] * g.rate(j, i));
      if (gap > report.worst_violation) {
        report.worst_violation = gap;
        report.worst_i = i;
        report.worst_j = j;
      }
    }
  }
  report.balanced = report.worst_violation <= tolerance;
  return report;
}

/// Smallest |Re(lambda)| over the nonzero eigenvalues of W, i.e. the slowest
/// relaxation rate towards stationarity.
inline double spectral_gap(const Generator& g) {
  Eigen::EigenSolver<Matrix> solver(g.matrix(), /*computeEigenvectors=*/false);
  const double floor = 1e-10 * std::max(1.0, g.max_exit_rate());
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double re = std::abs(solver.eigenvalues()[k].real());
    if (re > floor) gap = std::min(gap, re);
  }
  return gap;
}

}  // namespace qthermo
