#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qthermo::fd {

/// First-derivative weights at `x0` for arbitrary distinct nodes
/// (Fornberg's recursion, truncated to derivative order 1).
inline std::vector<double> first_derivative_weights(double x0, std::span<const double> nodes) {
  const std::size_t m = nodes.size();
  // c[j][d]: weight of node j for derivative d in {0, 1}.
  std::vector<std::array<double, 2>> c(m, {0.0, 0.0});
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  for (std::size_t i = 1; i < m; ++i) {
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) w[j] = c[j][1];
  return w;
}

/// Derivative of `values` at index k from the nodes k + offset * stride,
/// offset in [lo, lo + count).
inline double derivative_on_stencil(std::span<const double> times, std::span<const double> values, std::size_t k,
                                    std::ptrdiff_t lo, std::size_t count, std::size_t stride) {
  std::vector<double> nodes;
  std::vector<double> f;
  nodes.reserve(count);
  f.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto idx = static_cast<std::ptrdiff_t>(k) + (lo + static_cast<std::ptrdiff_t>(s)) * static_cast<std::ptrdiff_t>(stride);
    nodes.push_back(times[static_cast<std::size_t>(idx)]);
    f.push_back(values[static_cast<std::size_t>(idx)]);
  }
  const auto w = first_derivative_weights(times[k], nodes);
  double d = 0.0;
  for (std::size_t s = 0; s < count; ++s) d += w[s] * f[s];
  return d;
}

struct DerivativeEstimate {
  /// Fourth-order five-point derivative at every grid point (centred in the
  /// interior, shifted at the two ends).
  std::vector<double> derivative;
  /// Step-halving error estimate |D_h - D_2h| / 15 where both five-point
  /// centred stencils fit, 0 elsewhere.
  std::vector<double> error_estimate;
};

/// Needs at least five samples.
inline DerivativeEstimate five_point_derivative(std::span<const double> times, std::span<const double> values) {
  const std::size_t n = times.size();
  DerivativeEstimate out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::ptrdiff_t lo = -static_cast<std::ptrdiff_t>(std::min<std::size_t>(k, 2)) -
                              static_cast<std::ptrdiff_t>(k + 2 >= n ? (k + 2 - (n - 1)) : 0);
    out.derivative[k] = derivative_on_stencil(times, values, k, lo, 5, 1);
    if (k >= 4 && k + 4 < n) {
      const double coarse = derivative_on_stencil(times, values, k, -2, 5, 2);
      out.error_estimate[k] = std::abs(out.derivative[k] - coarse) / 15.0;
    }
  }
  return out;
}

}  // namespace qthermo::fd
