#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qthermo/ensemble.hpp"
#include "qthermo/fluxes.hpp"
#include "qthermo/stationary.hpp"

namespace qthermo {

/// Inequality claims that the randomized search can try to falsify.
enum class Claim {
  kFdNonneg,         // f_d >= 0
  kEpNonneg,         // e_p >= 0
  kQhkNonneg,        // Q_hk >= 0
  kQhkZeroUnderDb,   // Q_hk = 0 whenever detailed balance holds
  kHqNonneg,         // H_q(p || g) >= 0
};

inline constexpr std::string_view claim_name(Claim c) noexcept {
  switch (c) {
    case Claim::kFdNonneg: return "fd_nonneg";
    case Claim::kEpNonneg: return "ep_nonneg";
    case Claim::kQhkNonneg: return "qhk_nonneg";
    case Claim::kQhkZeroUnderDb: return "qhk_zero_under_db";
    case Claim::kHqNonneg: return "hq_nonneg";
  }
  return "unknown";
}

/// Accepts both snake_case and kebab-case names.
inline std::optional<Claim> parse_claim(std::string_view text) {
  std::string key(text);
  std::replace(key.begin(), key.end(), '-', '_');
  for (Claim c : {Claim::kFdNonneg, Claim::kEpNonneg, Claim::kQhkNonneg, Claim::kQhkZeroUnderDb, Claim::kHqNonneg}) {
    if (key == claim_name(c)) return c;
  }
  return std::nullopt;
}

struct SearchOptions {
  Claim claim = Claim::kFdNonneg;
  std::size_t trials = 1000;
  std::size_t n_min = 2;
  std::size_t n_max = 6;
  std::vector<double> q_set{0.5, 1.0, 1.5, 2.0, 3.0};
  std::uint64_t seed = 0;
  double rate_min = 0.05;
  double rate_max = 20.0;
  /// A value below -threshold (or |value| above it, for the equality claim)
  /// counts as a violation; this separates genuine failures from round-off.
  double threshold = 1e-9;
};

/// One recorded violation; replay() recomputes `observed` bit-for-bit.
struct SearchFinding {
  Claim claim = Claim::kFdNonneg;
  std::size_t trial = 0;
  bool detailed_balance = false;
  Matrix rates;
  Distribution p;
  /// Second distribution of the relative-entropy claim.
  std::optional<Distribution> reference;
  double q = 1.0;
  double observed = 0.0;
  double margin = 0.0;
};

/// The quantity a claim is about, evaluated on one instance.
inline double evaluate_claim(Claim claim, const Generator& g, const Distribution& p,
                             const std::optional<Distribution>& reference, const QParam& q) {
  switch (claim) {
    case Claim::kFdNonneg: return free_energy_dissipation(p, stationary(g), g, q);
    case Claim::kEpNonneg: return entropy_production(p, g, q);
    case Claim::kQhkNonneg:
    case Claim::kQhkZeroUnderDb: return housekeeping_heat(p, stationary(g), g, q);
    case Claim::kHqNonneg:
      if (!reference) throw Error(ErrorCode::kDomainError, "hq_nonneg needs a reference distribution");
      return relative_entropy(p, *reference, q);
  }
  return 0.0;
}

/// Amount by which `value` violates the claim (<= 0 means it holds).
inline double violation_margin(Claim claim, double value) {
  return claim == Claim::kQhkZeroUnderDb ? std::abs(value) : -value;
}

inline double replay(const SearchFinding& f) {
  return evaluate_claim(f.claim, validate_generator(f.rates), f.p, f.reference, QParam(f.q));
}

namespace detail {

struct Instance {
  bool detailed_balance = false;
  Generator g;
  Distribution p;
  std::optional<Distribution> reference;
  double q = 1.0;
};

/// Trial k draws from its own stream, so results do not depend on evaluation order.
inline Instance draw_instance(const SearchOptions& options, std::size_t trial) {
  Ensemble rng(options.seed, trial);
  Instance inst;
  const std::size_t n = rng.integer(options.n_min, options.n_max);
  inst.q = options.q_set[rng.integer(0, options.q_set.size() - 1)];
  inst.detailed_balance = options.claim == Claim::kQhkZeroUnderDb ? true : rng.coin();
  inst.g = rng.generator({n, inst.detailed_balance, options.rate_min, options.rate_max});
  inst.p = rng.dirichlet(n);
  if (options.claim == Claim::kHqNonneg) inst.reference = rng.dirichlet(n);
  return inst;
}

}  // namespace detail

/// Randomized counterexample search. Returns the violations found, sorted by
/// trial index; an empty list means the claim held on every trial.
inline std::vector<SearchFinding> claim_search(const SearchOptions& options) {
  if (options.trials < 1) throw Error(ErrorCode::kDomainError, "trials must be >= 1");
  if (options.n_min < 2 || options.n_max < options.n_min) {
    throw Error(ErrorCode::kDomainError, "need 2 <= n_min <= n_max");
  }
  if (options.q_set.empty()) throw Error(ErrorCode::kDomainError, "empty q set");
  for (double q : options.q_set) QParam{q};

  std::vector<SearchFinding> findings;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const auto inst = detail::draw_instance(options, trial);
    const double value = evaluate_claim(options.claim, inst.g, inst.p, inst.reference, QParam(inst.q));
    const double margin = violation_margin(options.claim, value);
    if (margin > options.threshold) {
      findings.push_back({options.claim, trial, inst.detailed_balance, inst.g.rates(), inst.p, inst.reference,
                          inst.q, value, margin});
    }
  }
  return findings;
}

}  // namespace qthermo
