#pragma once

#include <optional>
#include <vector>

#include "cistab/model.hpp"

namespace cistab {

// Poincare-Trace constants: the best C with
//   C |u|^2_D <= |grad u|^2_D + theta |u|^2_{boundary}   for all u in H^1(D).

/// Explicit (sub-optimal) constant, valid in any dimension:
///   theta (d/R - theta)  for theta < d/(2R),   d^2/(4R^2) otherwise.
double explicit_constant(double theta, const DomainGeometry& g);

/// Pole-free Robin characteristic function on (0, L), divided by mu so that the
/// trivial zero at mu = 0 is removed:
///   ((mu^2 - theta^2) sin(mu L) - 2 theta mu cos(mu L)) / mu.
double robin_characteristic(double mu, double theta, double length);

/// First Robin eigenvalue mu_1^2 of -u'' on (0, L) with -u'(0) + theta u(0) = 0
/// and u'(L) + theta u(L) = 0, found by a sign scan of robin_characteristic on
/// (0, pi/L] followed by bisection. `tol` bounds the error in the eigenvalue.
/// theta = 0 returns 0 (constant eigenfunction).
double optimal_constant_1d(double theta, double length, double tol = 1e-13);

/// Smallest `n_modes` eigenvalues of the second-order finite-difference Robin
/// Laplacian on `n_nodes` nodes. Ghost-node elimination folds the Robin
/// conditions into the end rows; halving those rows gives a symmetric pencil
/// K u = kappa M u with M = diag(1/2, 1, ..., 1, 1/2).
std::vector<double> robin_spectrum_fd(double theta, double length, int n_nodes, int n_modes = 1);

/// First Dirichlet eigenvalue pi^2 / L^2, an upper bound for every Robin one.
double dirichlet_bound(double length);

/// Positive first Robin eigenfunction cos(mu x) + (theta/mu) sin(mu x) sampled
/// on `n_nodes` nodes of [0, L].
HState robin_eigenfunction(double theta, double length, int n_nodes);

enum class TraceMethod { ExplicitOnly, Transcendental, FiniteDifference };

const char* to_string(TraceMethod m) noexcept;

struct TraceConstantReport {
  double theta = 0.0;
  double explicit_value = 0.0;
  std::optional<double> optimal_value;
  double dirichlet_bound = 0.0;
  TraceMethod method = TraceMethod::ExplicitOnly;

  /// explicit <= optimal <= Dirichlet (up to `slack`); true when no optimal
  /// value is present and explicit <= Dirichlet.
  bool sandwich_holds(double slack = 1e-9) const;
};

/// Optimal values are only produced in one dimension; for d >= 2 the method
/// falls back to ExplicitOnly.
TraceConstantReport trace_constant_report(double theta, const DomainGeometry& g,
                                          TraceMethod method, int fd_nodes = 2000);

}  // namespace cistab
