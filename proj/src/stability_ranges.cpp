#include "cistab/stability_ranges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cistab/trace_constants.hpp"

namespace cistab {

const char* to_string(ConstantSource s) noexcept {
  return s == ConstantSource::ExplicitC ? "explicit" : "optimal_1d";
}

ConstantSource constant_source_from_string(const std::string& name) {
  if (name == "explicit") return ConstantSource::ExplicitC;
  if (name == "optimal_1d" || name == "optimal") return ConstantSource::Optimal1D;
  throw Error(ErrorKind::UsageError, "unknown constant source '" + name + "'");
}

const char* to_string(RangeCase c) noexcept {
  switch (c) {
    case RangeCase::BoundaryWide: return "boundary:A>2B";
    case RangeCase::BoundaryNarrow: return "boundary:2B>=A>B";
    case RangeCase::BoundaryPersistence: return "boundary:persistence";
    case RangeCase::InteriorWide: return "interior:B>-2A";
    case RangeCase::InteriorNarrow: return "interior:-2A>=B>-A";
    case RangeCase::InteriorPersistence: return "interior:persistence";
    case RangeCase::InteriorSmallTheta: return "interior:small_theta";
    case RangeCase::InteriorFeasibleTheta: return "interior:feasible_theta";
  }
  return "unknown";
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

double trace_constant(double theta, const DomainGeometry& g, ConstantSource source) {
  if (source == ConstantSource::ExplicitC) return explicit_constant(theta, g);
  if (g.dimension != 1) {
    throw Error(ErrorKind::UsageError, "the optimal trace constant is only available for d = 1");
  }
  return optimal_constant_1d(theta, g.interval_length());
}

RangeInputs boundary_inputs(const ModelParams& p, double theta, double c) {
  return {c - p.beta, theta - p.lambda, ConstantSource::ExplicitC};
}

RangeInputs interior_inputs(const ModelParams& p, double theta, double c) {
  return {c - p.beta, p.lambda - theta, ConstantSource::ExplicitC};
}

std::pair<double, double> boundary_endpoints(double a, double b) {
  const double disc = 2.0 * a * (a - b);
  if (disc < 0.0) {
    throw Error(ErrorKind::NegativeDiscriminant, "2A(A - B) < 0; the range needs A > B");
  }
  const double root = 2.0 * std::sqrt(disc);
  return {3.0 * a - b - root, 3.0 * a - b + root};
}

std::pair<double, double> interior_endpoints(double a, double b) {
  const double disc = 2.0 * b * (a + b);
  if (disc < 0.0) {
    throw Error(ErrorKind::NegativeDiscriminant, "2B(A + B) < 0; the range needs B > -A");
  }
  const double root = 2.0 * std::sqrt(disc);
  return {a + 3.0 * b - root, a + 3.0 * b + root};
}

std::optional<IntensityInterval> boundary_noise_range(const ModelParams& p, double theta,
                                                      double c) {
  const auto [a, b, source] = boundary_inputs(p, theta, c);
  // Either A > B > 0, or A > 0 with B <= 0.
  if (!(a > 0.0) || !(a > b)) return std::nullopt;
  const auto [z1, z2] = boundary_endpoints(a, b);
  IntensityInterval out;
  out.theta_used = theta;
  out.upper = z2;
  if (a > 2.0 * b) {
    out.lower = std::max(0.0, b);
    out.lower_closed = true;
    out.theorem_case = RangeCase::BoundaryWide;
  } else {
    out.lower = z1;
    out.lower_closed = false;
    out.theorem_case = RangeCase::BoundaryNarrow;
  }
  return out;
}

std::optional<IntensityInterval> interior_noise_range(const ModelParams& p, double theta,
                                                      double c) {
  const auto [a, b, source] = interior_inputs(p, theta, c);
  // Either B > -A > 0, or B > 0 with A >= 0.
  if (!(b > 0.0) || !(b > -a)) return std::nullopt;
  const auto [t1, t2] = interior_endpoints(a, b);
  IntensityInterval out;
  out.theta_used = theta;
  out.upper = t2;
  if (b > -2.0 * a) {
    out.lower = std::max(0.0, -a);
    out.lower_closed = true;
    out.theorem_case = RangeCase::InteriorWide;
  } else {
    out.lower = t1;
    out.lower_closed = false;
    out.theorem_case = RangeCase::InteriorNarrow;
  }
  return out;
}

double decay_delta(const ModelParams& p, const DomainGeometry& g, ConstantSource source,
                   int n_eps) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_eps; ++k) {
    const double eps = p.lambda * k / (n_eps + 1);
    const double d = std::min(eps, trace_constant(p.lambda - eps, g, source) - p.beta);
    best = std::max(best, d);
  }
  return best;
}

DeterministicVerdict deterministic_verdict(const ModelParams& p, const DomainGeometry& g,
                                           ConstantSource source) {
  DeterministicVerdict v;
  v.threshold_constant = trace_constant(p.lambda, g, source);
  if (v.threshold_constant > p.beta) {
    v.verdict = Verdict::Stable;
    const double delta = decay_delta(p, g, source);
    if (delta > 0.0) v.decay_rate = 2.0 * delta;
  } else if (source == ConstantSource::Optimal1D && v.threshold_constant < p.beta) {
    v.verdict = Verdict::Unstable;
  } else {
    v.verdict = Verdict::Inconclusive;
  }
  return v;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

Checked<ThetaInterval> theta_feasible_interval_boundary(const ModelParams& p,
                                                        const DomainGeometry& g) {
  const double dr = g.d_over_r();
  Checked<ThetaInterval> out;
  if (!(p.lambda < 0.5 * (dr - 1.0))) {
    out.failed_hypothesis = "0 < lambda < (d/R - 1)/2 fails: lambda = " + fmt(p.lambda) +
                            ", (d/R - 1)/2 = " + fmt(0.5 * (dr - 1.0));
    return out;
  }
  const double psi = (1.0 - dr) * (1.0 - dr) - 4.0 * (p.beta - p.lambda);
  if (!(psi > 0.0)) {
    out.failed_hypothesis = "beta < (d/R - 1)^2/4 + lambda fails (Psi = " + fmt(psi) + " <= 0)";
    return out;
  }
  const double s = std::sqrt(psi);
  const double root_lo = 0.5 * (dr - 1.0 - s);
  const double root_hi = 0.5 * (dr - 1.0 + s);
  ThetaInterval iv;
  iv.lower = std::max(p.lambda, root_lo);
  if (0.5 * dr < root_hi) {
    iv.upper = 0.5 * dr;
    iv.upper_closed = true;
  } else {
    iv.upper = root_hi;
  }
  if (!(iv.upper > iv.lower)) {
    out.failed_hypothesis = "theta interval (lambda, d/2R] misses the quadratic's roots";
    return out;
  }
  out.value = iv;
  return out;
}

Checked<ThetaInterval> theta_feasible_interval_interior(const ModelParams& p,
                                                        const DomainGeometry& g) {
  const double dr = g.d_over_r();
  Checked<ThetaInterval> out;
  const double c_lambda = explicit_constant(p.lambda, g);
  if (!(p.beta > std::max(p.lambda, c_lambda))) {
    out.failed_hypothesis = "beta > max{lambda, C_lambda} fails: beta = " + fmt(p.beta) +
                            ", lambda = " + fmt(p.lambda) + ", C_lambda = " + fmt(c_lambda);
    return out;
  }
  if (!(g.dimension > g.half_diameter)) {
    out.failed_hypothesis = "d > R fails";
    return out;
  }
  const double phi = (dr - 1.0) * (dr - 1.0) - 4.0 * (p.beta - p.lambda);
  if (phi < 0.0) {
    out.failed_hypothesis = "beta <= (d/R - 1)^2/4 + lambda fails (Phi = " + fmt(phi) + " < 0)";
    return out;
  }
  const double s = std::sqrt(phi);
  ThetaInterval iv;
  iv.lower = std::max(0.0, 0.5 * (dr - 1.0 - s));
  iv.upper = std::min({0.5 * dr, p.lambda, 0.5 * (dr - 1.0 + s)});
  if (!(iv.upper > iv.lower)) {
    out.failed_hypothesis = "no theta with lambda - theta > beta - C_theta (strict inequality)";
    return out;
  }
  out.value = iv;
  return out;
}

double theta_hat_persistence_interior(const ModelParams& p, const DomainGeometry& g) {
  const double c_lambda = explicit_constant(p.lambda, g);
  if (!(p.beta < c_lambda)) {
    throw Error(ErrorKind::HypothesisFailed,
                "beta < C_lambda fails: beta = " + fmt(p.beta) + ", C_lambda = " + fmt(c_lambda));
  }
  const double dr = g.d_over_r();
  const double target = p.beta + p.lambda;
  const double knee = 0.5 * dr;
  if (target <= knee + 0.25 * dr * dr) {
    // Smaller root of theta^2 - (1 + d/R) theta + target = 0, in the form
    // without cancellation.
    const double disc = (1.0 + dr) * (1.0 + dr) - 4.0 * target;
    return 2.0 * target / ((1.0 + dr) + std::sqrt(disc));
  }
  return target - 0.25 * dr * dr;
}

Checked<IntensityInterval> boundary_persistence_range(const ModelParams& p,
                                                      const DomainGeometry& g,
                                                      ConstantSource source) {
  Checked<IntensityInterval> out;
  const double c = trace_constant(p.lambda, g, source);
  if (!(p.beta < c)) {
    out.failed_hypothesis = "beta < C_lambda fails: beta = " + fmt(p.beta) + ", C_lambda = " + fmt(c);
    return out;
  }
  IntensityInterval iv;
  iv.lower = 0.0;
  iv.lower_closed = true;
  iv.upper = (3.0 + 2.0 * std::numbers::sqrt2) * (c - p.beta);
  iv.theorem_case = RangeCase::BoundaryPersistence;
  iv.theta_used = p.lambda;
  out.value = iv;
  return out;
}

Checked<IntensityInterval> interior_persistence_range(const ModelParams& p,
                                                      const DomainGeometry& g) {
  Checked<IntensityInterval> out;
  const double c_lambda = explicit_constant(p.lambda, g);
  if (!(p.beta < c_lambda)) {
    out.failed_hypothesis =
        "beta < C_lambda fails: beta = " + fmt(p.beta) + ", C_lambda = " + fmt(c_lambda);
    return out;
  }
  const double theta_hat = theta_hat_persistence_interior(p, g);
  IntensityInterval iv;
  iv.lower = 0.0;
  iv.lower_closed = true;
  iv.upper = 8.0 * (p.lambda - theta_hat);
  iv.theorem_case = RangeCase::InteriorPersistence;
  iv.theta_used = theta_hat;
  out.value = iv;
  return out;
}

Checked<IntensityInterval> interior_small_theta_range(const ModelParams& p) {
  Checked<IntensityInterval> out;
  if (!(p.beta < p.lambda)) {
    out.failed_hypothesis =
        "beta < lambda fails: beta = " + fmt(p.beta) + ", lambda = " + fmt(p.lambda);
    return out;
  }
  // theta = 0 with C_0 = 0: A = -beta, B = lambda.
  auto iv = interior_noise_range(p, 0.0, 0.0);
  iv->theorem_case = RangeCase::InteriorSmallTheta;
  out.value = iv;
  return out;
}

namespace {

double hypothesis_margin(double theta, const ModelParams& p, const DomainGeometry& g,
                         NoisePlacement placement, ConstantSource source) {
  const double a = trace_constant(theta, g, source) - p.beta;
  if (placement == NoisePlacement::Boundary) {
    // min(A, A - B) with B = theta - lambda.
    return a - std::max(0.0, theta - p.lambda);
  }
  // min(B, A + B) with B = lambda - theta.
  return p.lambda - theta + std::min(0.0, a);
}

}  // namespace

Checked<ThetaInterval> feasible_theta_interval(const ModelParams& p, const DomainGeometry& g,
                                               NoisePlacement placement, ConstantSource source) {
  Checked<ThetaInterval> out;
  if (placement == NoisePlacement::None) {
    out.failed_hypothesis = "no noise placement selected";
    return out;
  }
  const double c_max = source == ConstantSource::ExplicitC
                           ? 0.25 * g.d_over_r() * g.d_over_r()
                           : dirichlet_bound(g.interval_length());
  const double theta_max =
      placement == NoisePlacement::Boundary ? c_max - p.beta + p.lambda : p.lambda;
  if (!(theta_max > 0.0)) {
    out.failed_hypothesis = "beta exceeds the largest attainable trace constant plus lambda";
    return out;
  }
  auto f = [&](double theta) { return hypothesis_margin(theta, p, g, placement, source); };

  // Coarse scan for the maximiser of the concave margin, then golden-section.
  constexpr int n_scan = 256;
  double best_t = 0.0;
  double best_f = f(0.0);
  for (int k = 1; k <= n_scan; ++k) {
    const double t = theta_max * k / n_scan;
    const double v = f(t);
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  }
  {
    double lo = std::max(0.0, best_t - theta_max / n_scan);
    double hi = std::min(theta_max, best_t + theta_max / n_scan);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-15 * theta_max; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = f(x1);
      }
    }
    const double t = 0.5 * (lo + hi);
    const double v = f(t);
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  }
  if (!(best_f > 0.0)) {
    std::ostringstream os;
    if (placement == NoisePlacement::Boundary) {
      os << "no theta > 0 with C_theta - beta > max{0, theta - lambda} (best margin "
         << fmt(best_f) << " at theta = " << fmt(best_t) << ")";
    } else {
      os << "no theta in (0, lambda) with lambda - theta > beta - C_theta (best margin "
         << fmt(best_f) << " at theta = " << fmt(best_t) << ")";
      if (!(p.beta < p.lambda)) os << "; small-theta stabilisation needs beta < lambda";
    }
    out.failed_hypothesis = os.str();
    return out;
  }
  auto edge = [&](double inside, double outside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      if (f(mid) > 0.0) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return inside;
  };
  ThetaInterval iv;
  iv.lower = f(0.0) > 0.0 ? 0.0 : edge(best_t, 0.0);
  iv.upper = f(theta_max) > 0.0 ? theta_max : edge(best_t, theta_max);
  out.value = iv;
  return out;
}

std::vector<IntensityInterval> merge_intervals(std::vector<IntensityInterval> pieces) {
  std::sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) {
    if (x.lower != y.lower) return x.lower < y.lower;
    return x.lower_closed && !y.lower_closed;
  });
  std::vector<IntensityInterval> merged;
  for (const auto& iv : pieces) {
    if (!merged.empty()) {
      auto& last = merged.back();
      // Upper ends are open, so touching pieces join only through a closed lower.
      if (iv.lower < last.upper || (iv.lower == last.upper && iv.lower_closed)) {
        last.upper = std::max(last.upper, iv.upper);
        continue;
      }
    }
    merged.push_back(iv);
  }
  return merged;
}

ThetaSweepResult optimize_range_over_theta(const ModelParams& p, const DomainGeometry& g,
                                           NoisePlacement placement, ConstantSource source,
                                           int n_theta) {
  if (n_theta < 1) throw Error(ErrorKind::UsageError, "n_theta must be positive");
  const auto feasible = feasible_theta_interval(p, g, placement, source);
  if (!feasible) throw Error(ErrorKind::EmptyFeasibleSet, feasible.failed_hypothesis);

  ThetaSweepResult result;
  result.feasible = *feasible.value;
  const double lo = result.feasible.lower;
  const double width = result.feasible.width();
  result.per_theta.reserve(static_cast<std::size_t>(n_theta));
  for (int k = 0; k < n_theta; ++k) {
    const double theta = lo + width * (k + 0.5) / n_theta;
    const double c = trace_constant(theta, g, source);
    const auto iv = placement == NoisePlacement::Boundary ? boundary_noise_range(p, theta, c)
                                                          : interior_noise_range(p, theta, c);
    if (iv) result.per_theta.push_back(*iv);
  }
  if (result.per_theta.empty()) {
    throw Error(ErrorKind::EmptyFeasibleSet, "no sampled theta produced an admissible range");
  }
  result.merged = merge_intervals(result.per_theta);
  result.envelope_lower = result.merged.front().lower;
  result.envelope_upper = result.merged.front().upper;
  for (const auto& iv : result.merged) {
    result.envelope_lower = std::min(result.envelope_lower, iv.lower);
    result.envelope_upper = std::max(result.envelope_upper, iv.upper);
  }
  result.connected = result.merged.size() == 1;
  return result;
}

bool quadratic_positivity_oracle(double a, double b, double alpha_sq,
                                 QuadraticConvention convention, double z_max, int n_z) {
  if (n_z < 1000 || !(z_max > 0.0)) {
    throw Error(ErrorKind::UsageError, "the positivity oracle needs n_z >= 1000 and z_max > 0");
  }
  double q2 = 0.0;
  double q1 = 0.0;
  double q0 = 0.0;
  if (convention == QuadraticConvention::Boundary) {
    q2 = 2.0 * a;
    q1 = 2.0 * a - 2.0 * b - alpha_sq;
    q0 = alpha_sq - 2.0 * b;
  } else {
    q2 = 2.0 * a + alpha_sq;
    q1 = 2.0 * (a + b) - alpha_sq;
    q0 = 2.0 * b;
  }
  constexpr double decades = 10.0;
  for (int k = 0; k < n_z; ++k) {
    const double z = z_max * std::pow(10.0, -decades * (n_z - 1 - k) / (n_z - 1));
    if (!((q2 * z + q1) * z + q0 > 0.0)) return false;
  }
  return true;
}

}  // namespace cistab
