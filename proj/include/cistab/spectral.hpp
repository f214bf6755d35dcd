#pragma once

#include <vector>

#include "cistab/model.hpp"

namespace cistab {

// Linearised deterministic problem on (0,1). With b = beta + lambda the
// shifted solution exp(-beta t) u solves the heat equation with dynamical
// boundary conditions u_t -/+ u_x + b u = 0, whose separated solutions are
// exp(-mu^2 t) phi(x) with
//   phi(x) = cos(mu x) + ((b - mu^2)/mu) sin(mu x).

enum class ModeBranch { TanBranch, CosZeroBranch };

struct SpectralMode {
  int index = 0;
  double mu = 0.0;
  double growth_rate = 0.0;  // beta - mu^2 (only -mu^2 until a beta is attached)
  double coeff_cos = 1.0;
  double coeff_sin = 0.0;
  ModeBranch branch = ModeBranch::TanBranch;

  double eigenfunction(double x) const;
  double eigenfunction_derivative(double x) const;
};

/// Determinant of the boundary system, free of tangent poles:
///   (mu^4 - (2b+1) mu^2 + b^2) sin mu - (2 mu^3 - 2 b mu) cos mu.
double characteristic_residual(double mu, double b);

/// First `n_roots` positive roots of characteristic_residual, ascending.
/// Sign scan with step 1e-3 on the residual divided by mu (so the trivial
/// zero at the origin is removed) followed by bisection; cos(mu) = 0 roots are
/// added when b places one there. The scan window doubles up to a cap and then
/// throws RootCountShortfall. Residuals are checked against `tol` (relative to
/// the scale of the two terms).
std::vector<SpectralMode> mu_roots(double b, int n_roots, double tol = 1e-10);

/// mu_roots with growth rates beta - mu^2 filled in.
std::vector<SpectralMode> spectral_modes(const ModelParams& p, int n_roots, double tol = 1e-10);

/// (2/3) b - b^2 / 27.
double mu1_squared_asymptotic(double b);

struct InstabilityReport {
  bool unstable = false;
  double mu1_squared = 0.0;
  double margin = 0.0;  // beta - mu1^2
};

/// Unstable iff beta > mu_1^2(beta + lambda).
InstabilityReport instability_predicate(const ModelParams& p);

/// Boundary-condition residuals of a mode in the shifted problem, scaled by
/// the size of the terms involved.
double left_boundary_residual(const SpectralMode& m, double b);
double right_boundary_residual(const SpectralMode& m, double b);

/// Mode sampled on the simulator grid of [0,1].
HState sample_mode(const SpectralMode& m, int n_nodes);

/// Default truncation of the eigenfunction series.
inline constexpr int kDefaultSeriesModes = 64;

/// Truncated eigenfunction expansion of the linearised solution,
///   u(x,t) = sum_n <U0, Phi_n>_H / |Phi_n|_H^2  exp((beta - mu_n^2) t) phi_n(x),
/// with H inner products taken by trapezoid on the grid of U0 plus the two
/// boundary point masses.
class SeriesSolution {
 public:
  SeriesSolution(const HState& u0, std::vector<SpectralMode> modes, const ModelParams& p);

  double operator()(double x, double t) const;
  HState sample(int n_nodes, double t) const;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<SpectralMode> modes_;
  std::vector<double> coeffs_;
  double beta_;
};

double series_solution(const HState& u0, const std::vector<SpectralMode>& modes,
                       const ModelParams& p, double x, double t);

}  // namespace cistab
