#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qthermo/functionals.hpp"
#include "qthermo/stationary.hpp"

// Flux-based rates of the generalized thermodynamic ledger. All sums run over
// ordered pairs (i, j) joined by an edge in at least one direction; pairs with
// w_ij = w_ji = 0 carry no flux and contribute nothing.
//
// Rates are treated as dimensionless numbers: the (pi_i w_ij)^{q-1} and
// w_ij^{q-1} terms in the housekeeping heat and the heat dissipation rate
// change under a rescaling of time when q != 1.

namespace qthermo {

/// Onsager flux phi_ij = p_i w_ij - p_j w_ji and force
/// Phi_ij = ((p_i/pi_i)^{q-1} - (p_j/pi_j)^{q-1})/(q-1); both antisymmetric.
struct FluxForceField {
  Matrix phi;
  Matrix force;
};

namespace detail {

inline void require_compatible(const Distribution& p, const Generator& g, const char* what) {
  require_same_size(p.size(), g.size(), what);
}

inline void require_reversible(const Generator& g, const char* what) {
  if (!g.microscopically_reversible()) {
    throw Error(ErrorCode::kNotReversible,
                std::string(what) + " needs w_ij > 0 exactly when w_ji > 0");
  }
}

inline bool coupled(const Generator& g, std::size_t i, std::size_t j) {
  return g.rate(i, j) > 0.0 || g.rate(j, i) > 0.0;
}

inline Real flux(const Distribution& p, const Generator& g, std::size_t i, std::size_t j) {
  return static_cast<Real>(p[i]) * g.rate(i, j) - static_cast<Real>(p[j]) * g.rate(j, i);
}

/// Sum over ordered coupled pairs of phi_ij * term(i, j), scaled by q/2.
template <typename Term>
double flux_weighted_sum(const Distribution& p, const Generator& g, const QParam& q, Term&& term) {
  Real total = 0.0L;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (i == j || !coupled(g, i, j)) continue;
      const Real phi = flux(p, g, i, j);
      if (phi == 0.0L) continue;
      total += phi * term(i, j);
    }
  }
  return static_cast<double>(0.5L * q.value() * total);
}

/// x^{q-1} * (y^{q-1} - 1)/(q-1), or ln y in the limit.
inline Real weighted_deformed_log(Real x, Real y, const QParam& q, const char* what) {
  if (q.is_limit()) return deformed_log(y, q, what);
  return pow_r(x, q.r(), what) * deformed_log(y, q, what);
}

}  // namespace detail

inline FluxForceField flux_force(const Distribution& p, const Distribution& pi, const Generator& g,
                                 const QParam& q) {
  detail::require_compatible(p, g, "flux_force");
  detail::require_compatible(pi, g, "flux_force");
  const auto n = static_cast<Eigen::Index>(g.size());
  FluxForceField field{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  std::vector<detail::Real> level(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(pi[i] > 0.0)) throw Error(ErrorCode::kDomainError, "flux_force needs pi > 0");
    level[i] = detail::deformed_log(static_cast<detail::Real>(p[i]) / pi[i], q, "flux_force");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      const auto phi = static_cast<double>(detail::flux(p, g, a, b));
      const auto force = static_cast<double>(level[a] - level[b]);
      field.phi(i, j) = phi;
      field.phi(j, i) = -phi;
      field.force(i, j) = force;
      field.force(j, i) = -force;
    }
  }
  return field;
}

/// Force rewritten under detailed balance,
///   Phi_ij = 2/((pi_j w_ji)^{q-1} + (pi_i w_ij)^{q-1})
///            * ((p_i w_ij)^{q-1} - (p_j w_ji)^{q-1})/(q-1).
/// The prefactor depends on pi_i and pi_j individually, not only on their
/// ratio, so the force is not locally determined by the rates alone.
struct DetailedBalanceForce {
  Matrix force;      // zero on pairs without an edge
  Matrix prefactor;  // 2/((pi_j w_ji)^{q-1} + (pi_i w_ij)^{q-1}), zero off-edge
};

inline DetailedBalanceForce force_db_form(const Distribution& p, const Distribution& pi, const Generator& g,
                                          const QParam& q) {
  detail::require_compatible(p, g, "force_db_form");
  detail::require_reversible(g, "force_db_form");
  if (!detailed_balance_check(g, pi, tol::kDynamic).balanced) {
    throw Error(ErrorCode::kNotDetailedBalanced, "pi_i w_ij != pi_j w_ji on some edge");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  DetailedBalanceForce out{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!g.has_edge(i, j)) continue;
      const detail::Real fwd = static_cast<detail::Real>(pi[i]) * g.rate(i, j);
      const detail::Real bwd = static_cast<detail::Real>(pi[j]) * g.rate(j, i);
      const auto r = static_cast<detail::Real>(q.r());
      const detail::Real prefactor = q.is_limit() ? 1.0L : 2.0L / (std::pow(bwd, r) + std::pow(fwd, r));
      const auto ei = static_cast<Eigen::Index>(i);
      const auto ej = static_cast<Eigen::Index>(j);
      out.prefactor(ei, ej) = static_cast<double>(prefactor);
      out.force(ei, ej) = static_cast<double>(
          prefactor * detail::deformed_log_difference(static_cast<detail::Real>(p[i]) * g.rate(i, j),
                                                      static_cast<detail::Real>(p[j]) * g.rate(j, i), q,
                                                      "force_db_form"));
    }
  }
  return out;
}

/// f_d = (q/2) sum phi_ij Phi_ij = -dF_q/dt.
inline double free_energy_dissipation(const Distribution& p, const Distribution& pi, const Generator& g,
                                      const QParam& q) {
  detail::require_compatible(p, g, "free_energy_dissipation");
  detail::require_compatible(pi, g, "free_energy_dissipation");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(pi[i] > 0.0)) throw Error(ErrorCode::kDomainError, "free_energy_dissipation needs pi > 0");
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    return detail::deformed_log_difference(static_cast<detail::Real>(p[i]) / pi[i],
                                           static_cast<detail::Real>(p[j]) / pi[j], q, "free_energy_dissipation");
  });
}

/// dS_q/dt = (q/2) sum phi_ij (p_i^{q-1} - p_j^{q-1})/(q-1).
inline double entropy_rate(const Distribution& p, const Generator& g, const QParam& q) {
  detail::require_compatible(p, g, "entropy_rate");
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    return detail::deformed_log_difference(p[i], p[j], q, "entropy_rate");
  });
}

/// Q_ex = (q/2) sum phi_ij (p_i^{q-1} eps_i - p_j^{q-1} eps_j), with the
/// algebraic sign as it enters dS_q/dt = f_d - Q_ex.
inline double excess_heat(const Distribution& p, const Distribution& pi, const Generator& g, const QParam& q) {
  detail::require_compatible(p, g, "excess_heat");
  const EnergyLevels eps = energy_levels(pi, q);
  const double r = q.is_limit() ? 0.0 : q.r();
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    return detail::pow_r(p[i], r, "excess_heat") * eps.eps[i] - detail::pow_r(p[j], r, "excess_heat") * eps.eps[j];
  });
}

/// One ordered-pair contribution to a flux-weighted sum.
struct EdgeTerm {
  std::size_t from = 0;
  std::size_t to = 0;
  double value = 0.0;
};

/// The individual summands of excess_heat over ordered coupled pairs.
inline std::vector<EdgeTerm> excess_heat_terms(const Distribution& p, const Distribution& pi,
                                               const Generator& g, const QParam& q) {
  detail::require_compatible(p, g, "excess_heat_terms");
  const EnergyLevels eps = energy_levels(pi, q);
  const double r = q.is_limit() ? 0.0 : q.r();
  std::vector<EdgeTerm> terms;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (i == j || !detail::coupled(g, i, j)) continue;
      const detail::Real weight = detail::pow_r(p[i], r, "excess_heat") * eps.eps[i] -
                                  detail::pow_r(p[j], r, "excess_heat") * eps.eps[j];
      terms.push_back({i, j, static_cast<double>(0.5L * q.value() * detail::flux(p, g, i, j) * weight)});
    }
  }
  return terms;
}

/// e_p = (q/2) sum phi_ij ((p_i w_ij)^{q-1} - (p_j w_ji)^{q-1})/(q-1).
inline double entropy_production(const Distribution& p, const Generator& g, const QParam& q) {
  detail::require_compatible(p, g, "entropy_production");
  detail::require_reversible(g, "entropy_production");
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    return detail::deformed_log_difference(static_cast<detail::Real>(p[i]) * g.rate(i, j),
                                           static_cast<detail::Real>(p[j]) * g.rate(j, i), q, "entropy_production");
  });
}

/// Housekeeping heat
///   Q_hk = q/(2(q-1)) sum phi_ij [ (p_i/pi_i)^{q-1} ((pi_i w_ij)^{q-1} - 1)
///                                 - (p_j/pi_j)^{q-1} ((pi_j w_ji)^{q-1} - 1) ],
/// evaluated termwise and never clamped: it can be negative for q != 1.
inline double housekeeping_heat(const Distribution& p, const Distribution& pi, const Generator& g,
                                const QParam& q) {
  detail::require_compatible(p, g, "housekeeping_heat");
  detail::require_compatible(pi, g, "housekeeping_heat");
  detail::require_reversible(g, "housekeeping_heat");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(pi[i] > 0.0)) throw Error(ErrorCode::kDomainError, "housekeeping_heat needs pi > 0");
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    using detail::Real;
    return detail::weighted_deformed_log(static_cast<Real>(p[i]) / pi[i], static_cast<Real>(pi[i]) * g.rate(i, j), q,
                                         "housekeeping_heat") -
           detail::weighted_deformed_log(static_cast<Real>(p[j]) / pi[j], static_cast<Real>(pi[j]) * g.rate(j, i), q,
                                         "housekeeping_heat");
  });
}

/// Heat dissipation rate
///   h_d = q/(2(q-1)) sum phi_ij [ p_i^{q-1} (w_ij^{q-1} - 1) - p_j^{q-1} (w_ji^{q-1} - 1) ].
/// The flux factor and the pair sum are required for h_d = e_p - dS_q/dt,
/// which in turn gives Q_ex = h_d - Q_hk.
inline double heat_dissipation(const Distribution& p, const Generator& g, const QParam& q) {
  detail::require_compatible(p, g, "heat_dissipation");
  detail::require_reversible(g, "heat_dissipation");
  return detail::flux_weighted_sum(p, g, q, [&](std::size_t i, std::size_t j) {
    return detail::weighted_deformed_log(p[i], g.rate(i, j), q, "heat_dissipation") -
           detail::weighted_deformed_log(p[j], g.rate(j, i), q, "heat_dissipation");
  });
}

/// One time point of the generalized thermodynamic ledger.
struct ThermoSample {
  double S = 0.0;
  double U = 0.0;
  double F = 0.0;
  double f_d = 0.0;
  double e_p = 0.0;
  double Q_ex = 0.0;
  double Q_hk = 0.0;
  double h_d = 0.0;
  double dS_dt = 0.0;
};

/// Algebraic identity residuals of a sample.
struct SampleResiduals {
  double free_energy = 0.0;        // |F - (U - S)|
  double entropy_production = 0.0; // |e_p - (f_d + Q_hk)|
  double heat_split = 0.0;         // |Q_ex - (h_d - Q_hk)|
  double heat_split_printed = 0.0; // |Q_ex - (Q_hk - h_d)|, the sign-flipped variant
  double entropy_balance = 0.0;    // |dS_dt - (f_d - Q_ex)|
};

inline SampleResiduals residuals(const ThermoSample& s) {
  return {std::abs(s.F - (s.U - s.S)), std::abs(s.e_p - (s.f_d + s.Q_hk)),
          std::abs(s.Q_ex - (s.h_d - s.Q_hk)), std::abs(s.Q_ex - (s.Q_hk - s.h_d)),
          std::abs(s.dS_dt - (s.f_d - s.Q_ex))};
}

/// Evaluates every ledger quantity independently from (p, pi, w, q).
inline ThermoSample thermo_sample(const Distribution& p, const Distribution& pi, const Generator& g,
                                  const QParam& q) {
  ThermoSample s;
  s.S = tsallis_entropy(p, q);
  s.U = internal_energy(p, energy_levels(pi, q), q);
  s.F = relative_entropy(p, pi, q);
  s.f_d = free_energy_dissipation(p, pi, g, q);
  s.e_p = entropy_production(p, g, q);
  s.Q_ex = excess_heat(p, pi, g, q);
  s.Q_hk = housekeeping_heat(p, pi, g, q);
  s.h_d = heat_dissipation(p, g, q);
  s.dS_dt = entropy_rate(p, g, q);
  return s;
}

}  // namespace qthermo
