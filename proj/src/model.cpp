#include "cistab/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cistab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorKind::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorKind::BadGeometry: return "BadGeometry";
    case ErrorKind::NoRootInBracket: return "NoRootInBracket";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorKind::RootCountShortfall: return "RootCountShortfall";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ZeroInitialState: return "ZeroInitialState";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

const char* to_string(NoisePlacement placement) noexcept {
  switch (placement) {
    case NoisePlacement::Boundary: return "boundary";
    case NoisePlacement::Interior: return "interior";
    case NoisePlacement::None: return "none";
  }
  return "unknown";
}

NoisePlacement placement_from_string(const std::string& name) {
  if (name == "boundary") return NoisePlacement::Boundary;
  if (name == "interior") return NoisePlacement::Interior;
  if (name == "none") return NoisePlacement::None;
  throw Error(ErrorKind::UsageError, "unknown noise placement '" + name + "'");
}

std::pair<ModelParams, DomainGeometry> validate_params(const ModelParams& p,
                                                       const DomainGeometry& g) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw Error(ErrorKind::NonPositiveBeta, "beta = " + std::to_string(p.beta));
  }
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
    throw Error(ErrorKind::NonPositiveLambda, "lambda = " + std::to_string(p.lambda));
  }
  if (!std::isfinite(p.alpha)) {
    throw Error(ErrorKind::UsageError, "alpha is not finite");
  }
  if (g.dimension < 1) {
    throw Error(ErrorKind::BadGeometry, "dimension = " + std::to_string(g.dimension));
  }
  if (!(g.half_diameter > 0.0) || !std::isfinite(g.half_diameter)) {
    throw Error(ErrorKind::BadGeometry, "half_diameter = " + std::to_string(g.half_diameter));
  }
  return {p, g};
}

HState::HState(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) {
    throw Error(ErrorKind::UsageError, "an H-state needs at least the two boundary nodes");
  }
}

HState HState::scaled(double c) const {
  HState out = *this;
  for (double& v : out.nodes_) v *= c;
  return out;
}

bool HState::all_finite() const noexcept {
  return std::all_of(nodes_.begin(), nodes_.end(), [](double v) { return std::isfinite(v); });
}

bool HState::is_zero() const noexcept {
  return std::all_of(nodes_.begin(), nodes_.end(), [](double v) { return v == 0.0; });
}

namespace {

double trapezoid(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  double sum = 0.5 * (f[0] + f[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) sum += f[i];
  return h * sum;
}

void require_same_grid(const HState& u, const HState& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::UsageError, "H-states live on different grids");
  }
}

}  // namespace

double h_inner(const HState& u, const HState& v, double grid_spacing) {
  require_same_grid(u, v);
  std::vector<double> prod(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) prod[i] = u[i] * v[i];
  return trapezoid(prod, grid_spacing) + u.boundary_left() * v.boundary_left() +
         u.boundary_right() * v.boundary_right();
}

double h_norm_sq(const HState& s, double grid_spacing) {
  return l2_norm_sq(s, grid_spacing) + s.boundary_left() * s.boundary_left() +
         s.boundary_right() * s.boundary_right();
}

double l2_norm_sq(const HState& s, double grid_spacing) {
  const auto u = s.nodes();
  const std::size_t n = u.size();
  double sum = 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) sum += u[i] * u[i];
  return grid_spacing * sum;
}

double l4_norm_pow4(const HState& s, double grid_spacing) {
  std::vector<double> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) q[i] = std::pow(s[i], 4);
  return trapezoid(q, grid_spacing);
}

double bilinear_form(const HState& s, double grid_spacing, double lambda) {
  double grad = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double du = s[i + 1] - s[i];
    grad += du * du;
  }
  grad /= grid_spacing;
  return grad + lambda * (s.boundary_left() * s.boundary_left() +
                          s.boundary_right() * s.boundary_right());
}

}  // namespace cistab
