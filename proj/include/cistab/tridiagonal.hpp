#pragma once

#include <span>
#include <vector>

namespace cistab::tridiag {

/// Smallest `count` eigenvalues (ascending) of the symmetric tridiagonal
/// matrix with main diagonal `diag` and off-diagonal `off`
/// (off.size() == diag.size() - 1). Bisection on the Sturm count, so every
/// eigenvalue is located independently of the others.
///
/// Throws Error(ConvergenceFailure) when the input is not finite or a
/// bracket fails to contract.
std::vector<double> smallest_eigenvalues(std::span<const double> diag,
                                         std::span<const double> off, std::size_t count);

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x);

/// Solves the general tridiagonal system in place (Thomas algorithm, no
/// pivoting; callers supply diagonally dominant systems).
/// lower[i] couples row i+1 to column i, upper[i] couples row i to column i+1.
void solve(std::span<const double> lower, std::span<const double> diag,
           std::span<const double> upper, std::span<double> rhs, std::vector<double>& scratch);

}  // namespace cistab::tridiag

namespace cistab::tridiag {

/// LU factors of a fixed tridiagonal matrix, reused across many right-hand
/// sides (one per time step).
class Factorization {
 public:
  Factorization() = default;
  Factorization(std::span<const double> lower, std::span<const double> diag,
                std::span<const double> upper);

  void solve(std::span<double> rhs) const;
  std::size_t size() const noexcept { return inv_denom_.size(); }

 private:
  std::vector<double> lower_;
  std::vector<double> c_prime_;
  std::vector<double> inv_denom_;
};

}  // namespace cistab::tridiag
