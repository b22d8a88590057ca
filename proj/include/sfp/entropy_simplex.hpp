#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sfp/errors.hpp"

namespace sfp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

/// exp(x) for x <= 0 (or -inf), within a few ulp of std::exp. Branch-free so
/// loops over it vectorize; the Gibbs solves spend most of their time here.
inline double exp_nonpositive(double x) noexcept {
  constexpr double log2e = 1.4426950408889634;
  constexpr double ln2_hi = 6.93147180369123816490e-01;  // low bits zero, so n * ln2_hi is exact
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52: adding it rounds to an integer
  x = x < -746.0 ? -746.0 : x;
  const double t = x * log2e + shifter;
  const double n = t - shifter;
  const double r = (x - n * ln2_hi) - n * ln2_lo;  // |r| <= ln2 / 2
  // Taylor series to degree 13; truncation error is below 1e-17 on this range
  double p = 1.0 / 6227020800.0;
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  // 2^n in two halves so results down to the subnormal range stay exact
  const std::int64_t ni = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(shifter);
  const std::int64_t n1 = ni >> 1, n2 = ni - n1;
  const double s1 = std::bit_cast<double>(static_cast<std::uint64_t>(n1 + 1023) << 52);
  const double s2 = std::bit_cast<double>(static_cast<std::uint64_t>(n2 + 1023) << 52);
  return p * s1 * s2;
}

/// Sum with four interleaved accumulators (keeps the adds pipelined).
inline double sum(std::span<const double> v) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= v.size(); i += 4) {
    s0 += v[i];
    s1 += v[i + 1];
    s2 += v[i + 2];
    s3 += v[i + 3];
  }
  for (; i < v.size(); ++i) s0 += v[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// Writes argmin over the simplex of  <a, theta> + gamma * sum theta ln theta
/// into `out`. The minimizer is the Gibbs distribution theta_i ~ exp(-a_i / gamma),
/// evaluated after shifting by the smallest cost so that exp never overflows.
/// Entries with a_i = +inf come out exactly 0.
inline void solve_entropic_linear_min(std::span<const double> costs, double gamma,
                                      std::span<double> out) {
  if (!(gamma > 0.0)) throw DomainError("entropic solver: gamma must be positive");
  if (out.size() != costs.size()) throw DomainError("entropic solver: size mismatch");
  const std::size_t m = costs.size();
  const double* a = costs.data();
  double* o = out.data();
  double lowest = kInf;
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] != a[i]) throw DomainError("entropic solver: NaN cost");
    lowest = a[i] < lowest ? a[i] : lowest;
  }
  if (!(lowest < kInf)) throw DomainError("entropic solver: every cost is infinite");
  if (!(lowest > -kInf)) throw DomainError("entropic solver: cost of -inf");
  const double inv_gamma = 1.0 / gamma;
  for (std::size_t i = 0; i < m; ++i) o[i] = detail::exp_nonpositive((lowest - a[i]) * inv_gamma);
  const double inv_total = 1.0 / detail::sum(out);
  for (std::size_t i = 0; i < m; ++i) o[i] *= inv_total;
}

inline std::vector<double> solve_entropic_linear_min(std::span<const double> costs, double gamma) {
  std::vector<double> out(costs.size());
  solve_entropic_linear_min(costs, gamma, out);
  return out;
}

/// x ln x with the 0 ln 0 = 0 convention.
inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Shannon entropy -sum u ln u (natural log).
inline double entropy(std::span<const double> u) noexcept {
  double h = 0.0;
  for (double v : u) h -= xlogx(v);
  return h;
}

/// <a, theta> + gamma * sum theta ln theta, treating 0 * inf as 0.
inline double entropic_objective(std::span<const double> costs, std::span<const double> theta,
                                 double gamma) {
  double value = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (theta[i] > 0.0) value += costs[i] * theta[i];
    value += gamma * xlogx(theta[i]);
  }
  return value;
}

}  // namespace sfp
