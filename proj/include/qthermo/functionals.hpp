#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qthermo/generator.hpp"

namespace qthermo {

/// Entropic index q > 0. Within 1e-9 of 1 every formula switches to its
/// logarithmic (Gibbs) limit instead of evaluating 0/0.
class QParam {
 public:
  static constexpr double kLimitBand = 1e-9;

  explicit QParam(double q) : q_(q) {
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::kDomainError, "entropic index must be a finite q > 0, got " + std::to_string(q));
    }
    is_limit_ = std::abs(q - 1.0) < kLimitBand;
  }

  double value() const noexcept { return q_; }
  /// r = q - 1
  double r() const noexcept { return q_ - 1.0; }
  bool is_limit() const noexcept { return is_limit_; }

 private:
  double q_;
  bool is_limit_;
};

namespace detail {

/// Working precision of every term evaluation and accumulation; results are
/// rounded to double only once, so independently evaluated ledger entries
/// agree to a few ulps of their own magnitude.
using Real = long double;

/// x^r with 0^r := 0 for r > 0; zero raised to a non-positive power is an error.
inline Real pow_r(Real x, double r, const char* what) {
  if (x == 0.0L) {
    if (r > 0.0) return 0.0L;
    if (r == 0.0) return 1.0L;
    throw Error(ErrorCode::kDomainError, std::string(what) + ": zero raised to a negative power");
  }
  return std::pow(x, static_cast<Real>(r));
}

/// (x^r - 1)/r evaluated as expm1(r ln x)/r, or ln x when r is the limit.
inline Real deformed_log(Real x, const QParam& q, const char* what) {
  if (x == 0.0L) {
    if (!q.is_limit() && q.r() > 0.0) return -1.0L / static_cast<Real>(q.r());
    throw Error(ErrorCode::kDomainError, std::string(what) + ": logarithm of zero");
  }
  if (x < 0.0L || !std::isfinite(x)) {
    throw Error(ErrorCode::kDomainError,
                std::string(what) + ": argument " + std::to_string(static_cast<double>(x)));
  }
  const Real lx = std::log(x);
  const auto r = static_cast<Real>(q.r());
  return q.is_limit() ? lx : std::expm1(r * lx) / r;
}

/// (a^r - b^r)/r, or ln a - ln b in the limit.
inline Real deformed_log_difference(Real a, Real b, const QParam& q, const char* what) {
  return deformed_log(a, q, what) - deformed_log(b, q, what);
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorCode::kDomainError, std::string(what) + ": length mismatch");
}

}  // namespace detail

/// q-deformed logarithm (x^{q-1} - 1)/(q - 1).
inline double q_log(double x, const QParam& q) {
  if (!(x > 0.0)) throw Error(ErrorCode::kDomainError, "q_log needs x > 0");
  return static_cast<double>(detail::deformed_log(x, q, "q_log"));
}

/// Tsallis entropy (1 - sum p_i^q)/(q - 1); Gibbs entropy in the limit.
/// Impossible events (p_i = 0) contribute nothing for every q > 0.
inline double tsallis_entropy(const Distribution& p, const QParam& q) {
  detail::Real s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s -= p[i] * detail::deformed_log(p[i], q, "tsallis_entropy");
  }
  return static_cast<double>(s);
}

/// Generalized relative entropy H_q(p||g) = (sum p_i (p_i/g_i)^{q-1} - 1)/(q - 1);
/// Kullback-Leibler divergence in the limit.
inline double relative_entropy(const Distribution& p, const Distribution& g, const QParam& q) {
  detail::require_same_size(p.size(), g.size(), "relative_entropy");
  detail::Real h = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i] == 0.0) {
      if (p[i] > 0.0) {
        throw Error(ErrorCode::kSupportError, "p_" + std::to_string(i) + " > 0 where g vanishes");
      }
      if (q.r() < 0.0 && !q.is_limit()) {
        throw Error(ErrorCode::kSupportError, "q < 1 needs a strictly positive reference");
      }
      continue;
    }
    if (p[i] > 0.0) {
      h += p[i] * detail::deformed_log(static_cast<detail::Real>(p[i]) / g[i], q, "relative_entropy");
    }
  }
  return static_cast<double>(h);
}

/// Statistical energies eps_i = q_log(1/pi_i): Boltzmann's law read backwards.
struct EnergyLevels {
  /// Kept at working precision; operator[] rounds to double.
  std::vector<long double> eps;

  std::size_t size() const noexcept { return eps.size(); }
  double operator[](std::size_t i) const { return static_cast<double>(eps[i]); }
};

inline EnergyLevels energy_levels(const Distribution& pi, const QParam& q) {
  EnergyLevels levels;
  levels.eps.reserve(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (!(pi[i] > 0.0)) {
      throw Error(ErrorCode::kDomainError, "energy of a state with pi_" + std::to_string(i) + " = 0");
    }
    levels.eps.push_back(detail::deformed_log(1.0L / pi[i], q, "energy_levels"));
  }
  return levels;
}

/// U_q = sum p_i^q eps_i (escort-type p^q weighting); sum p_i eps_i in the limit.
inline double internal_energy(const Distribution& p, const EnergyLevels& eps, const QParam& q) {
  detail::require_same_size(p.size(), eps.size(), "internal_energy");
  const auto power = static_cast<detail::Real>(q.is_limit() ? 1.0 : q.value());
  detail::Real u = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) u += std::pow(static_cast<detail::Real>(p[i]), power) * eps.eps[i];
  }
  return static_cast<double>(u);
}

/// Residual of F = U - S for a given state; zero up to round-off.
inline double free_energy_identity_residual(const Distribution& p, const Distribution& pi, const QParam& q) {
  const double f = relative_entropy(p, pi, q);
  const double u = internal_energy(p, energy_levels(pi, q), q);
  const double s = tsallis_entropy(p, q);
  return std::abs(f - (u - s));
}

/// Free energy F_q = H_q(p||pi). The U - S route is evaluated alongside and
/// must agree within 1e-10 (relative to the size of U once U exceeds 1).
inline double free_energy(const Distribution& p, const Distribution& pi, const QParam& q) {
  const double f = relative_entropy(p, pi, q);
  const double u = internal_energy(p, energy_levels(pi, q), q);
  const double s = tsallis_entropy(p, q);
  const double residual = std::abs(f - (u - s));
  if (residual > 1e-10 * std::max(1.0, std::abs(u))) {
    throw Error(ErrorCode::kSolveFailure,
                "F = U - S disagrees with H(p||pi) by " + std::to_string(residual));
  }
  return f;
}

/// Pair of random variables A, B given by P(A = i) and P(B = j | A = i).
struct JointDistribution {
  Distribution pA;
  Matrix cond;

  JointDistribution(Distribution marginal, Matrix conditional)
      : pA(std::move(marginal)), cond(std::move(conditional)) {
    if (static_cast<std::size_t>(cond.rows()) != pA.size()) {
      throw Error(ErrorCode::kInvalidDistribution, "conditional table has the wrong row count");
    }
    for (Eigen::Index i = 0; i < cond.rows(); ++i) {
      if ((cond.row(i).array() < 0.0).any() || std::abs(cond.row(i).sum() - 1.0) > tol::kSimplex) {
        throw Error(ErrorCode::kInvalidDistribution,
                    "conditional row " + std::to_string(i) + " is not a distribution");
      }
    }
  }

  Distribution row(std::size_t i) const {
    return Distribution(Vector(cond.row(static_cast<Eigen::Index>(i)).transpose()));
  }

  Distribution joint() const {
    Vector flat(cond.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < cond.rows(); ++i)
      for (Eigen::Index j = 0; j < cond.cols(); ++j) flat[k++] = pA[static_cast<std::size_t>(i)] * cond(i, j);
    return Distribution(std::move(flat));
  }
};

struct ConditionalEntropyGap {
  /// S(A) + sum_i p_i S(B|A=i) - S(AB); nonnegative for q > 1.
  double gap = 0.0;
  /// |S(AB) - (S(A) + sum_i p_i^q S(B|A=i))|, zero for every q.
  double chain_residual = 0.0;
};

inline ConditionalEntropyGap conditional_entropy_gap(const JointDistribution& jd, const QParam& q) {
  const double s_joint = tsallis_entropy(jd.joint(), q);
  const double s_a = tsallis_entropy(jd.pA, q);
  const double power = q.is_limit() ? 1.0 : q.value();
  detail::Real linear = 0.0L;
  detail::Real escort = 0.0L;
  for (std::size_t i = 0; i < jd.pA.size(); ++i) {
    const double pi = jd.pA[i];
    if (pi == 0.0) continue;
    const double s_cond = tsallis_entropy(jd.row(i), q);
    linear += pi * s_cond;
    escort += std::pow(static_cast<detail::Real>(pi), static_cast<detail::Real>(power)) * s_cond;
  }
  return {static_cast<double>(s_a + linear - s_joint), static_cast<double>(std::abs(s_joint - (s_a + escort)))};
}

}  // namespace qthermo
