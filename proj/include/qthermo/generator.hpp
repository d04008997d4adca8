#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qthermo/error.hpp"

namespace qthermo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
/// Structural checks (row sums, stationarity residual).
inline constexpr double kStructural = 1e-12;
/// Dynamic checks (normalization drift along trajectories).
inline constexpr double kDynamic = 1e-9;
/// Probability vectors must sum to one within this band.
inline constexpr double kSimplex = 1e-10;
}  // namespace tol

/// A probability vector on n states.
class Distribution {
 public:
  Distribution() = default;

  /// Validates nonnegativity, finiteness and normalization.
  explicit Distribution(Vector p) : p_(std::move(p)) {
    if (p_.size() == 0) {
      throw Error(ErrorCode::kInvalidDistribution, "empty probability vector");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (!std::isfinite(p_[i])) {
        throw Error(ErrorCode::kNonFinite, "probability entry " + std::to_string(i));
      }
      if (p_[i] < 0.0) {
        throw Error(ErrorCode::kInvalidDistribution,
                    "negative probability at state " + std::to_string(i));
      }
      sum += p_[i];
    }
    if (std::abs(sum - 1.0) > tol::kSimplex) {
      throw Error(ErrorCode::kInvalidDistribution,
                  "probabilities sum to " + std::to_string(sum));
    }
  }

  Distribution(std::initializer_list<double> values)
      : Distribution(from(std::vector<double>(values))) {}

  static Distribution from(std::span<const double> values) {
    Vector p(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) p[static_cast<Eigen::Index>(i)] = values[i];
    return Distribution(std::move(p));
  }

  static Distribution uniform(std::size_t n) {
    return Distribution(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
  }

  /// Clamps entries in [-tolerance, 0) to zero and rescales onto the simplex.
  static Distribution renormalized(Vector p, double tolerance = tol::kStructural) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] < 0.0 && p[i] >= -tolerance) p[i] = 0.0;
    }
    const double sum = p.sum();
    if (sum > 0.0) p /= sum;
    return Distribution(std::move(p));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }
  double operator[](std::size_t i) const { return p_[static_cast<Eigen::Index>(i)]; }
  const Vector& values() const noexcept { return p_; }

  bool strictly_positive() const noexcept { return (p_.array() > 0.0).all(); }

  std::vector<double> to_vector() const { return {p_.data(), p_.data() + p_.size()}; }

 private:
  Vector p_;
};

/// Transition-rate structure of a master equation. Off-diagonal entry (i, j)
/// is the rate w_ij of jumping i -> j; the diagonal holds -sum_j w_ij.
class Generator {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(w_.rows()); }

  /// Off-diagonal rate w_ij (i != j), or the diagonal of the generator.
  double rate(std::size_t i, std::size_t j) const {
    return w_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  bool has_edge(std::size_t i, std::size_t j) const { return i != j && rate(i, j) > 0.0; }

  /// Internal generator W with zero row sums; dp/dt = p W.
  const Matrix& matrix() const noexcept { return w_; }

  bool microscopically_reversible() const noexcept { return reversible_; }
  bool strongly_connected() const noexcept { return strongly_connected_; }

  /// Largest total exit rate, max_i |w_ii|.
  double max_exit_rate() const { return (-w_.diagonal()).maxCoeff(); }

  /// Smallest strictly positive off-diagonal rate (0 if there is none).
  double min_positive_rate() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (has_edge(i, j)) best = std::min(best, rate(i, j));
    return std::isfinite(best) ? best : 0.0;
  }

  /// Off-diagonal rates with a zero diagonal, the form accepted on input.
  Matrix rates() const {
    Matrix r = w_;
    r.diagonal().setZero();
    return r;
  }

 private:
  friend Generator validate_generator(const Matrix& raw_rates);

  Matrix w_;
  bool reversible_ = false;
  bool strongly_connected_ = false;
};

namespace detail {

inline std::vector<bool> reachable(const Matrix& w, bool transpose) {
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || seen[j]) continue;
      const double r = transpose ? w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))
                                 : w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (r > 0.0) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Input gate for the master equation: checks the raw rates, fills the
/// diagonal and records reversibility and strong connectivity.
inline Generator validate_generator(const Matrix& raw_rates) {
  const Eigen::Index n = raw_rates.rows();
  if (raw_rates.cols() != n) {
    throw Error(ErrorCode::kTooSmall, "rate matrix must be square");
  }
  if (n < 2) throw Error(ErrorCode::kTooSmall, "need at least 2 states");

  Generator g;
  g.w_ = raw_rates;
  for (Eigen::Index i = 0; i < n; ++i) {
    double exit = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = raw_rates(i, j);
      if (!std::isfinite(r)) {
        throw Error(ErrorCode::kNonFinite,
                    "rate (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (r < 0.0) {
        throw Error(ErrorCode::kNegativeRate,
                    "rate (" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(r));
      }
      exit += r;
    }
    g.w_(i, i) = -exit;
  }

  g.reversible_ = true;
  for (Eigen::Index i = 0; i < n && g.reversible_; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((raw_rates(i, j) > 0.0) != (raw_rates(j, i) > 0.0)) {
        g.reversible_ = false;
        break;
      }

  const auto fwd = detail::reachable(g.w_, false);
  const auto bwd = detail::reachable(g.w_, true);
  g.strongly_connected_ = std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
                          std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
  return g;
}

/// Right-hand side of the master equation, dp/dt = p W.
inline Vector master_rhs(const Generator& g, const Vector& p) {
  return g.matrix().transpose() * p;
}

}  // namespace qthermo
