#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

#include "qthermo/generator.hpp"

namespace qthermo {

/// Seeded random model ensemble. Draws use the raw 64-bit engine output so
/// streams are identical across standard library implementations.
class Ensemble {
 public:
  explicit Ensemble(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi].
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  bool coin() { return (engine_() >> 63) != 0; }

  double log_uniform(double lo, double hi) {
    return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
  }

  /// Flat Dirichlet draw: normalized unit exponentials. Strictly positive.
  Distribution dirichlet(std::size_t n) {
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = -std::log(uniform_open());
    return Distribution(x / x.sum());
  }

  struct ModelOptions {
    std::size_t states = 3;
    /// Build rates satisfying pi_i w_ij = pi_j w_ji for some pi.
    bool detailed_balance = false;
    double rate_min = 0.05;
    double rate_max = 20.0;
  };

  /// Complete-graph rates. Without detailed balance every directed rate is
  /// log-uniform in [rate_min, rate_max], which generically gives a
  /// nonequilibrium steady state. With detailed balance w_ij (i < j) is
  /// log-uniform and w_ji = w_ij exp(E_j - E_i) for energies E uniform in
  /// [0, 1], so reverse rates may leave the range by at most a factor e.
  Matrix rates(const ModelOptions& options) {
    const auto n = static_cast<Eigen::Index>(options.states);
    Matrix w = Matrix::Zero(n, n);
    if (!options.detailed_balance) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          if (i != j) w(i, j) = log_uniform(options.rate_min, options.rate_max);
      return w;
    }
    Vector energy(n);
    for (Eigen::Index i = 0; i < n; ++i) energy[i] = uniform();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        w(i, j) = log_uniform(options.rate_min, options.rate_max);
        w(j, i) = w(i, j) * std::exp(energy[j] - energy[i]);
      }
    return w;
  }

  Generator generator(const ModelOptions& options) { return validate_generator(rates(options)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qthermo
