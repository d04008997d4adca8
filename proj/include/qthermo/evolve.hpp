#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "qthermo/generator.hpp"

namespace qthermo {

/// Solution of the master equation on an output grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<Distribution> states;

  std::size_t size() const noexcept { return times.size(); }
};

enum class EvolveMethod {
  /// Adaptive embedded 4/5 Runge-Kutta (Dormand-Prince).
  kRungeKutta45,
  /// Truncated uniformization, exact up to round-off.
  kUniformization,
};

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::kRungeKutta45;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
};

/// Output grid 0, dt, 2 dt, ..., closed with t_end when it is not a multiple.
inline std::vector<double> output_grid(double t_end, double dt_out) {
  if (!(t_end > 0.0) || !(dt_out > 0.0) || !std::isfinite(t_end) || !std::isfinite(dt_out)) {
    throw Error(ErrorCode::kDomainError, "t_end and dt_out must be positive");
  }
  const auto steps = static_cast<std::size_t>(std::floor(t_end / dt_out + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * dt_out);
  if (t_end - grid.back() > 1e-12 * t_end) grid.push_back(t_end);
  return grid;
}

/// p(t + dt) = p(t) exp(dt W) by uniformization: with Lambda >= max exit rate
/// and P = I + W / Lambda, exp(dt W) = sum_k Poisson(k; Lambda dt) P^k.
/// Long steps are split so that Lambda * dt <= 1 per sub-step.
inline Vector propagate(const Generator& g, const Vector& p, double dt) {
  const double lambda = g.max_exit_rate();
  if (lambda == 0.0 || dt == 0.0) return p;
  const Matrix jump_t = (Matrix::Identity(g.matrix().rows(), g.matrix().cols()) + g.matrix() / lambda).transpose();
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(lambda * dt)));
  const double x = lambda * dt / static_cast<double>(pieces);
  Vector state = p;
  for (std::size_t s = 0; s < pieces; ++s) {
    double weight = std::exp(-x);
    Vector term = state;
    Vector next = weight * term;
    for (int k = 1; k < 200 && weight > 1e-18; ++k) {
      term = jump_t * term;
      weight *= x / k;
      next += weight * term;
    }
    state = next;
  }
  return state;
}

namespace detail {

inline Distribution accept_sample(Vector p, double t) {
  const double drift = std::abs(p.sum() - 1.0);
  if (drift >= tol::kDynamic) {
    throw Error(ErrorCode::kIntegrationFailure,
                "normalization drift " + std::to_string(drift) + " at t = " + std::to_string(t));
  }
  if (p.minCoeff() < -tol::kStructural) {
    throw Error(ErrorCode::kIntegrationFailure,
                "negative probability " + std::to_string(p.minCoeff()) + " at t = " + std::to_string(t));
  }
  return Distribution::renormalized(std::move(p));
}

}  // namespace detail

/// Solves dp/dt = p W from p0 and samples it on output_grid(t_end, dt_out).
inline Trajectory evolve(const Generator& g, const Distribution& p0, double t_end, double dt_out,
                         const EvolveOptions& options = {}) {
  if (p0.size() != g.size()) throw Error(ErrorCode::kInvalidDistribution, "p0 has the wrong length");
  Trajectory traj;
  traj.times = output_grid(t_end, dt_out);
  traj.states.reserve(traj.times.size());
  traj.states.push_back(p0);

  if (options.method == EvolveMethod::kUniformization) {
    Vector p = p0.values();
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
      p = propagate(g, p, traj.times[k] - traj.times[k - 1]);
      traj.states.push_back(detail::accept_sample(p, traj.times[k]));
      p = traj.states.back().values();
    }
    return traj;
  }

  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Matrix wt = g.matrix().transpose();
  const auto n = static_cast<Eigen::Index>(g.size());
  auto rhs = [&wt, n](const State& x, State& dxdt, double /*t*/) {
    Eigen::Map<Vector>(dxdt.data(), n) = wt * Eigen::Map<const Vector>(x.data(), n);
  };
  State x = p0.to_vector();
  std::vector<Vector> raw;
  raw.reserve(traj.times.size());
  auto observer = [&raw, n](const State& s, double /*t*/) {
    raw.emplace_back(Eigen::Map<const Vector>(s.data(), n));
  };
  const double h0 = std::min(dt_out, 0.1 / std::max(1.0, g.max_exit_rate()));
  try {
    odeint::integrate_times(
        odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>()), rhs, x,
        traj.times.begin(), traj.times.end(), h0, observer, odeint::max_step_checker(100000));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIntegrationFailure, e.what());
  }
  for (std::size_t k = 1; k < raw.size(); ++k) {
    traj.states.push_back(detail::accept_sample(std::move(raw[k]), traj.times[k]));
  }
  return traj;
}

}  // namespace qthermo
