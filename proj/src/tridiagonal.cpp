#include "cistab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cistab/errors.hpp"

namespace cistab::tridiag {

std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
  // LDL^T pivots of (T - x I); the number of negative pivots is the count.
  constexpr double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    if (std::abs(q) < tiny) q = -tiny;
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> smallest_eigenvalues(std::span<const double> diag,
                                         std::span<const double> off, std::size_t count) {
  const std::size_t n = diag.size();
  if (n == 0 || off.size() + 1 != n || count == 0 || count > n) {
    throw Error(ErrorKind::ConvergenceFailure, "malformed tridiagonal eigenproblem");
  }
  // Gershgorin interval.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    if (!std::isfinite(diag[i]) || !std::isfinite(r)) {
      throw Error(ErrorKind::ConvergenceFailure, "non-finite matrix entry");
    }
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  lo -= 1e-12 * scale + std::numeric_limits<double>::min();
  hi += 1e-12 * scale + std::numeric_limits<double>::min();

  std::vector<double> values(count);
  double floor = lo;
  for (std::size_t k = 0; k < count; ++k) {
    // Find the (k+1)-th eigenvalue: smallest x with sturm_count(x) > k.
    double a = floor;
    double b = hi;
    int iterations = 0;
    while (true) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(diag, off, mid) > k) {
        b = mid;
      } else {
        a = mid;
      }
      if (++iterations > 2200) {
        throw Error(ErrorKind::ConvergenceFailure, "Sturm bisection did not contract");
      }
    }
    values[k] = 0.5 * (a + b);
    floor = a;
  }
  return values;
}

void solve(std::span<const double> lower, std::span<const double> diag,
           std::span<const double> upper, std::span<double> rhs, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  double denom = diag[0];
  scratch[0] = upper.empty() ? 0.0 : upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i - 1] * scratch[i - 1];
    scratch[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
    rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace cistab::tridiag

namespace cistab::tridiag {

Factorization::Factorization(std::span<const double> lower, std::span<const double> diag,
                             std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), c_prime_(diag.size()), inv_denom_(diag.size()) {
  const std::size_t n = diag.size();
  double denom = diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) denom = diag[i] - lower[i - 1] * c_prime_[i - 1];
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw Error(ErrorKind::ConvergenceFailure, "singular tridiagonal system");
    }
    inv_denom_[i] = 1.0 / denom;
    c_prime_[i] = (i + 1 < n) ? upper[i] * inv_denom_[i] : 0.0;
  }
}

void Factorization::solve(std::span<double> rhs) const {
  const std::size_t n = inv_denom_.size();
  rhs[0] *= inv_denom_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i - 1] * rhs[i - 1]) * inv_denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_prime_[i] * rhs[i + 1];
}

}  // namespace cistab::tridiag
