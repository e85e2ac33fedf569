#pragma once

// Independent reference computations. They share no code with the library.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tse/analysis.hpp"

namespace tse::testing {

namespace mp = boost::multiprecision;

// Exact upper tails under Binomial(n, 1/2): out[k] = P(X >= k) for k = 0..n,
// from integer binomial coefficients summed exactly and divided by 2^n once.
inline std::vector<double> exact_upper_tails(std::uint64_t n) {
  std::vector<mp::cpp_int> row(n + 1);
  row[0] = 1;
  for (std::uint64_t i = 1; i <= n; ++i) row[i] = row[i - 1] * (n - i + 1) / i;
  std::vector<double> out(n + 2, 0.0);
  mp::cpp_int suffix = 0;
  for (std::uint64_t k = n + 1; k-- > 0;) {
    suffix += row[k];
    mp::cpp_bin_float_100 v(suffix);
    v = mp::ldexp(v, -static_cast<int>(n));
    out[k] = v.convert_to<double>();
  }
  out.pop_back();
  return out;
}

// Exact P(X <= k) = P(X >= n - k) by symmetry of p = 1/2.
inline double exact_lower_tail(const std::vector<double>& upper, std::uint64_t k) {
  const std::uint64_t n = upper.size() - 1;
  return upper[n - k];
}

// Relative agreement, with an absolute floor for values below the double range.
inline bool close_rel(double got, double want, double tol) {
  if (want == 0) return got == 0 || std::abs(got) < 1e-300;
  return std::abs(got - want) <= tol * std::abs(want);
}

// Wilson bounds as the roots of (p_hat - p)^2 = z^2 p (1 - p) / n.
inline Interval wilson_roots(std::uint64_t k, std::uint64_t n, long double z) {
  const long double N = n, ph = static_cast<long double>(k) / N, z2 = z * z;
  const long double a = 1 + z2 / N;
  const long double b = -(2 * ph + z2 / N);
  const long double c = ph * ph;
  const long double disc = std::sqrt(b * b - 4 * a * c);
  long double lo = (-b - disc) / (2 * a);
  long double hi = (-b + disc) / (2 * a);
  if (lo < 0) lo = 0;
  if (hi > 1) hi = 1;
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

// Least squares from the 2x2 normal equations, solved by Cramer's rule.
inline double normal_equations_slope(const std::vector<Point>& pts) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    n += 1;
    sx += p.x;
    sy += p.y;
    sxx += static_cast<long double>(p.x) * p.x;
    sxy += static_cast<long double>(p.x) * p.y;
  }
  return static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

}  // namespace tse::testing
