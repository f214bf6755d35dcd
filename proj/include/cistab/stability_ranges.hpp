#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cistab/model.hpp"

namespace cistab {

/// Which trace constant feeds the range formulas: the explicit C_theta (any
/// dimension) or the optimal one-dimensional Robin eigenvalue.
enum class ConstantSource { ExplicitC, Optimal1D };

const char* to_string(ConstantSource s) noexcept;
ConstantSource constant_source_from_string(const std::string& name);

/// C_theta from the chosen source. Optimal1D requires a one-dimensional domain.
double trace_constant(double theta, const DomainGeometry& g, ConstantSource source);

/// Branch of the range theorems that produced an interval.
enum class RangeCase {
  BoundaryWide,      // boundary noise, A > 2B:            [max{0,B}, Z2)
  BoundaryNarrow,    // boundary noise, 2B >= A > B:       (Z1, Z2)
  BoundaryPersistence,  // boundary noise at theta = lambda: [0, (3+2 sqrt 2)(C - beta))
  InteriorWide,      // interior noise, B > -2A:           [max{0,-A}, T2)
  InteriorNarrow,    // interior noise, -2A >= B > -A:     (T1, T2)
  InteriorPersistence,  // interior noise at theta_hat:    [0, 8(lambda - theta_hat))
  InteriorSmallTheta,   // interior noise, theta -> 0, beta < lambda
  InteriorFeasibleTheta,  // interior noise, theta from the explicit d > R feasibility set
};

const char* to_string(RangeCase c) noexcept;

/// Admissible range for alpha^2/2 together with the branch that produced it.
struct IntensityInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = false;
  RangeCase theorem_case = RangeCase::BoundaryWide;
  double theta_used = 0.0;

  bool contains(double half_alpha_sq) const {
    return half_alpha_sq < upper && (lower_closed ? half_alpha_sq >= lower : half_alpha_sq > lower);
  }
};

/// A and B of the scalar quadratic; the sign convention of B depends on the
/// placement (theta - lambda for boundary noise, lambda - theta for interior).
struct RangeInputs {
  double a = 0.0;
  double b = 0.0;
  ConstantSource constant_source = ConstantSource::ExplicitC;
};

RangeInputs boundary_inputs(const ModelParams& p, double theta, double c);
RangeInputs interior_inputs(const ModelParams& p, double theta, double c);

/// Z_{1,2} = 3A - B -/+ 2 sqrt(2A(A - B)). Throws NegativeDiscriminant when
/// A(A - B) < 0.
std::pair<double, double> boundary_endpoints(double a, double b);
/// T_{1,2} = A + 3B -/+ 2 sqrt(2B(A + B)). Throws NegativeDiscriminant when
/// B(A + B) < 0.
std::pair<double, double> interior_endpoints(double a, double b);

std::optional<IntensityInterval> boundary_noise_range(const ModelParams& p, double theta, double c);
std::optional<IntensityInterval> interior_noise_range(const ModelParams& p, double theta, double c);

enum class Verdict { Stable, Unstable, Inconclusive };

const char* to_string(Verdict v) noexcept;

struct DeterministicVerdict {
  Verdict verdict = Verdict::Inconclusive;
  double threshold_constant = 0.0;
  std::optional<double> decay_rate;  // 2 delta
};

/// Number of epsilon samples used for the decay rate.
inline constexpr int kDecayEpsilonGrid = 1000;

/// delta = max over eps in (0, lambda) of min{eps, C_{lambda - eps} - beta}.
double decay_delta(const ModelParams& p, const DomainGeometry& g, ConstantSource source,
                   int n_eps = kDecayEpsilonGrid);

DeterministicVerdict deterministic_verdict(const ModelParams& p, const DomainGeometry& g,
                                           ConstantSource source);

/// Open theta-interval, optionally closed at the upper end.
struct ThetaInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_closed = false;

  double width() const { return upper - lower; }
};

/// Result carrying either a value or the human-readable hypothesis that failed.
template <typename T>
struct Checked {
  std::optional<T> value;
  std::string failed_hypothesis;

  explicit operator bool() const { return value.has_value(); }
};

/// Theta with C_theta - beta > theta - lambda > 0 using the explicit constant:
///   (lambda, d/2R] intersected with ((d/R-1-sqrt Psi)/2, (d/R-1+sqrt Psi)/2),
///   Psi = (1 - d/R)^2 - 4(beta - lambda).
Checked<ThetaInterval> theta_feasible_interval_boundary(const ModelParams& p,
                                                        const DomainGeometry& g);

/// Theta with lambda - theta > beta - C_theta >= 0 (explicit constant), for
/// the regime max{lambda, C_lambda} < beta <= (d/R - 1)^2/4 + lambda, d > R.
Checked<ThetaInterval> theta_feasible_interval_interior(const ModelParams& p,
                                                        const DomainGeometry& g);

/// Unique theta_hat < lambda with theta_hat + C_theta_hat = beta + lambda.
/// Throws HypothesisFailed when beta >= C_lambda.
double theta_hat_persistence_interior(const ModelParams& p, const DomainGeometry& g);

/// Boundary persistence range [0, (3 + 2 sqrt 2)(C_lambda - beta)).
Checked<IntensityInterval> boundary_persistence_range(const ModelParams& p,
                                                      const DomainGeometry& g,
                                                      ConstantSource source = ConstantSource::ExplicitC);

/// Interior persistence range [0, 8(lambda - theta_hat)).
Checked<IntensityInterval> interior_persistence_range(const ModelParams& p,
                                                      const DomainGeometry& g);

/// Interior stabilisation with theta -> 0 (C_0 = 0): requires beta < lambda.
Checked<IntensityInterval> interior_small_theta_range(const ModelParams& p);

/// Set of theta > 0 where the hypotheses of the general range theorem hold for
/// the chosen placement and constant. The defining function is concave in
/// theta for both constant sources, so the set is a single interval; its ends
/// are located by bisection.
Checked<ThetaInterval> feasible_theta_interval(const ModelParams& p, const DomainGeometry& g,
                                               NoisePlacement placement, ConstantSource source);

struct ThetaSweepResult {
  ThetaInterval feasible;
  std::vector<IntensityInterval> per_theta;  // sorted by theta
  std::vector<IntensityInterval> merged;     // union, sorted by lower endpoint
  double envelope_lower = 0.0;
  double envelope_upper = 0.0;
  bool connected = false;
};

/// Sweeps n_theta midpoints of a uniform partition of the feasible theta
/// interval, merges the per-theta intervals and reports the envelope.
/// Throws EmptyFeasibleSet when no theta satisfies the hypotheses.
ThetaSweepResult optimize_range_over_theta(const ModelParams& p, const DomainGeometry& g,
                                           NoisePlacement placement, ConstantSource source,
                                           int n_theta);

/// Union of intervals (merging overlapping or touching pieces).
std::vector<IntensityInterval> merge_intervals(std::vector<IntensityInterval> pieces);

enum class QuadraticConvention { Boundary, Interior };

/// Brute-force check of the scalar positivity condition behind the ranges,
///   boundary: 2A Z^2 + (2A - 2B - alpha^2) Z + alpha^2 - 2B > 0,
///   interior: (2A + alpha^2) Z^2 + (2(A + B) - alpha^2) Z + 2B > 0,
/// on n_z log-spaced samples of (0, z_max]. Independent of the closed forms.
bool quadratic_positivity_oracle(double a, double b, double alpha_sq,
                                 QuadraticConvention convention, double z_max = 1e3,
                                 int n_z = 10000);

}  // namespace cistab
