#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "qthermo/evolve.hpp"
#include "qthermo/finite_difference.hpp"
#include "qthermo/fluxes.hpp"
#include "qthermo/stationary.hpp"

namespace qthermo {

/// Time-resolved ledger along one solution of the master equation.
struct LedgerSeries {
  QParam q{1.0};
  Distribution pi;
  Trajectory trajectory;
  std::vector<ThermoSample> samples;
  /// Excess-heat summands at the final time.
  std::vector<EdgeTerm> circulation;

  std::size_t size() const noexcept { return samples.size(); }
  const std::vector<double>& times() const noexcept { return trajectory.times; }
};

inline LedgerSeries run_ledger(const Generator& g, const Distribution& p0, const QParam& q, double t_end,
                               double dt_out, const EvolveOptions& options = {}) {
  if (!g.microscopically_reversible()) {
    throw Error(ErrorCode::kNotReversible, "the ledger needs w_ij > 0 exactly when w_ji > 0");
  }
  LedgerSeries series;
  series.q = q;
  series.pi = stationary(g);
  series.trajectory = evolve(g, p0, t_end, dt_out, options);
  series.samples.reserve(series.trajectory.size());
  for (const auto& p : series.trajectory.states) {
    series.samples.push_back(thermo_sample(p, series.pi, g, q));
  }
  series.circulation = excess_heat_terms(series.trajectory.states.back(), series.pi, g, q);
  return series;
}

/// Output spacing for which five-point differences of F and S resolve the
/// dynamics started at p: `fraction` of the fastest relative rate,
/// max(max exit rate, max_i |dp_i/dt| / p_i).
inline double finite_difference_step(const Generator& g, const Distribution& p, double fraction = 1e-3) {
  double fastest = g.max_exit_rate();
  const Vector dp = master_rhs(g, p.values());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) fastest = std::max(fastest, std::abs(dp[static_cast<Eigen::Index>(i)]) / p[i]);
  }
  return fraction / std::max(fastest, 1e-300);
}

/// Per-row residuals of the two differential identities, dF/dt = -f_d and
/// dS/dt = dS_dt, with derivatives taken by finite differences of F and S.
struct DifferentialResiduals {
  std::vector<double> dF;
  std::vector<double> dS;
  /// Step-halving error estimates of the finite-difference derivatives.
  std::vector<double> dF_error;
  std::vector<double> dS_error;
};

inline DifferentialResiduals differential_residuals(const LedgerSeries& series) {
  const std::size_t n = series.size();
  if (n < 5) {
    throw Error(ErrorCode::kGridTooCoarse, "finite differences need at least 5 samples");
  }
  std::vector<double> f(n);
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = series.samples[k].F;
    s[k] = series.samples[k].S;
  }
  const auto df = fd::five_point_derivative(series.times(), f);
  const auto ds = fd::five_point_derivative(series.times(), s);
  DifferentialResiduals out;
  out.dF.resize(n);
  out.dS.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.dF[k] = std::abs(df.derivative[k] + series.samples[k].f_d);
    out.dS[k] = std::abs(ds.derivative[k] - series.samples[k].dS_dt);
  }
  out.dF_error = df.error_estimate;
  out.dS_error = ds.error_estimate;
  return out;
}

/// Excess-heat circulation at the stationary state.
struct TellegenResult {
  std::vector<EdgeTerm> summands;
  double total = 0.0;
  double max_abs_summand = 0.0;
  /// |total| <= 1e-10
  bool total_vanishes = false;
  /// some |summand| > 1e-10: heat circulates although the total is zero
  bool circulating = false;
};

inline TellegenResult tellegen_check(const Generator& g, const QParam& q) {
  const Distribution pi = stationary(g);
  TellegenResult out;
  out.summands = excess_heat_terms(pi, pi, g, q);
  for (const auto& term : out.summands) {
    out.total += term.value;
    out.max_abs_summand = std::max(out.max_abs_summand, std::abs(term.value));
  }
  out.total_vanishes = std::abs(out.total) <= 1e-10;
  out.circulating = out.max_abs_summand > 1e-10;
  return out;
}

struct HTheoremResult {
  std::vector<double> times;
  std::vector<double> values;
  /// Largest H(t_{k+1}) - H(t_k), 0 if H never increases.
  double max_uptick = 0.0;
  bool monotone = true;
};

/// Evolves two initial distributions under the same generator and tracks
/// H_q(p(t) || g(t)), which must not increase.
inline HTheoremResult h_theorem_pair(const Generator& g, const Distribution& p0, const Distribution& g0,
                                     const QParam& q, double t_end, double dt_out,
                                     const EvolveOptions& options = {}, double slack = 1e-9) {
  if (q.r() < 0.0 && !q.is_limit() && (!p0.strictly_positive() || !g0.strictly_positive())) {
    throw Error(ErrorCode::kDomainError, "q < 1 needs strictly positive initial distributions");
  }
  const Trajectory a = evolve(g, p0, t_end, dt_out, options);
  const Trajectory b = evolve(g, g0, t_end, dt_out, options);
  HTheoremResult out;
  out.times = a.times;
  out.values.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    // Mass where g vanishes (q >= 1): the divergence is +inf, which the flow
    // leaves immediately because both solutions become interior.
    double h = std::numeric_limits<double>::infinity();
    try {
      h = relative_entropy(a.states[k], b.states[k], q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSupportError) throw;
    }
    out.values.push_back(h);
    if (k > 0 && std::isfinite(h)) out.max_uptick = std::max(out.max_uptick, h - out.values[k - 1]);
    if (k > 0 && !std::isfinite(h) && std::isfinite(out.values[k - 1])) out.max_uptick = h;
  }
  out.monotone = out.max_uptick <= slack;
  return out;
}

struct IdentityCheck {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  /// Non-gating checks are reported but do not affect AuditReport::pass.
  bool gating = true;
};

struct InequalityObservation {
  std::string name;
  /// Worst observed value of the quantity claimed nonnegative (or the largest
  /// uptick for monotonicity claims).
  double worst = 0.0;
  bool holds = true;
  std::size_t violations = 0;
};

struct AuditReport {
  std::vector<IdentityCheck> identities;
  std::vector<InequalityObservation> inequalities;
  ThermoSample initial;
  ThermoSample final;
  bool detailed_balance = false;
  /// f_d and Q_ex at the last sample are both <= 1e-6.
  bool steady_state_reached = false;
  TellegenResult tellegen;
  bool pass = true;

  std::vector<std::string> failed_identities() const {
    std::vector<std::string> names;
    for (const auto& c : identities)
      if (c.gating && !c.pass) names.push_back(c.name);
    return names;
  }
};

namespace audit_tol {
inline constexpr double kAlgebraic = 1e-10;
inline constexpr double kForce = 1e-9;
inline constexpr double kInequality = -1e-12;
inline constexpr double kMonotone = 1e-9;
inline constexpr double kSteadyState = 1e-6;
}  // namespace audit_tol

/// Checks every balance identity of a ledger series. Analytic derivatives are
/// compared with five-point finite differences of F and S (guidance: keep
/// dt_out <= 0.01 / max exit rate); algebraic identities at 1e-10.
inline AuditReport check_identities(const LedgerSeries& series, const Generator& g, double fd_tol = 1e-5) {
  const auto diff = differential_residuals(series);
  const double worst_error = std::max(*std::max_element(diff.dF_error.begin(), diff.dF_error.end()),
                                      *std::max_element(diff.dS_error.begin(), diff.dS_error.end()));
  if (worst_error > fd_tol) {
    throw Error(ErrorCode::kGridTooCoarse, "step-halving error estimate " + std::to_string(worst_error) +
                                               " exceeds fd_tol " + std::to_string(fd_tol));
  }

  AuditReport report;
  report.initial = series.samples.front();
  report.final = series.samples.back();

  auto add = [&report](std::string name, double residual, double tolerance, bool gating = true) {
    report.identities.push_back({std::move(name), residual, tolerance, residual <= tolerance, gating});
  };
  auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };

  SampleResiduals worst;
  for (const auto& s : series.samples) {
    const auto r = residuals(s);
    worst.free_energy = std::max(worst.free_energy, r.free_energy);
    worst.entropy_production = std::max(worst.entropy_production, r.entropy_production);
    worst.heat_split = std::max(worst.heat_split, r.heat_split);
    worst.heat_split_printed = std::max(worst.heat_split_printed, r.heat_split_printed);
    worst.entropy_balance = std::max(worst.entropy_balance, r.entropy_balance);
  }
  add("dF/dt=-f_d", max_of(diff.dF), fd_tol);
  add("dS/dt=f_d-Q_ex", max_of(diff.dS), fd_tol);
  add("F=U-S", worst.free_energy, audit_tol::kAlgebraic);
  add("e_p=f_d+Q_hk", worst.entropy_production, audit_tol::kAlgebraic);
  add("Q_ex=h_d-Q_hk", worst.heat_split, audit_tol::kAlgebraic);
  add("dS_dt=f_d-Q_ex", worst.entropy_balance, audit_tol::kAlgebraic);
  // Sign-flipped heat split; it only holds where Q_ex = 0.
  add("Q_ex=Q_hk-h_d", worst.heat_split_printed, audit_tol::kAlgebraic, /*gating=*/false);

  report.detailed_balance = detailed_balance_check(g, series.pi, tol::kDynamic).balanced;
  if (report.detailed_balance) {
    double worst_force = 0.0;
    for (const auto& p : series.trajectory.states) {
      const auto direct = flux_force(p, series.pi, g, series.q);
      const auto db = force_db_form(p, series.pi, g, series.q);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
          if (g.has_edge(i, j)) {
            const auto ei = static_cast<Eigen::Index>(i);
            const auto ej = static_cast<Eigen::Index>(j);
            worst_force = std::max(worst_force, std::abs(direct.force(ei, ej) - db.force(ei, ej)));
          }
    }
    add("Phi=Phi_db", worst_force, audit_tol::kForce);
  }

  auto observe_min = [&report, &series](std::string name, auto field) {
    InequalityObservation obs{std::move(name), std::numeric_limits<double>::infinity(), true, 0};
    for (const auto& s : series.samples) {
      const double v = field(s);
      obs.worst = std::min(obs.worst, v);
      if (v < audit_tol::kInequality) ++obs.violations;
    }
    obs.holds = obs.violations == 0;
    report.inequalities.push_back(std::move(obs));
  };
  observe_min("f_d>=0", [](const ThermoSample& s) { return s.f_d; });
  observe_min("e_p>=0", [](const ThermoSample& s) { return s.e_p; });
  observe_min("H_q>=0", [](const ThermoSample& s) { return s.F; });
  observe_min("Q_hk>=0", [](const ThermoSample& s) { return s.Q_hk; });
  {
    InequalityObservation mono{"F_nonincreasing", 0.0, true, 0};
    for (std::size_t k = 1; k < series.size(); ++k) {
      const double up = series.samples[k].F - series.samples[k - 1].F;
      mono.worst = std::max(mono.worst, up);
      if (up > audit_tol::kMonotone) ++mono.violations;
    }
    mono.holds = mono.violations == 0;
    report.inequalities.push_back(std::move(mono));
  }
  if (report.detailed_balance) {
    // Q_hk should vanish for a closed system; report the largest |Q_hk|.
    InequalityObservation closed{"Q_hk=0_under_db", 0.0, true, 0};
    for (const auto& s : series.samples) {
      closed.worst = std::max(closed.worst, std::abs(s.Q_hk));
      if (std::abs(s.Q_hk) > 1e-9) ++closed.violations;
    }
    closed.holds = closed.violations == 0;
    report.inequalities.push_back(std::move(closed));
  }

  report.steady_state_reached =
      std::abs(report.final.f_d) <= audit_tol::kSteadyState && std::abs(report.final.Q_ex) <= audit_tol::kSteadyState;
  report.tellegen = tellegen_check(g, series.q);

  report.pass = report.failed_identities().empty();
  return report;
}

}  // namespace qthermo
