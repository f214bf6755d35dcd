#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cistab/errors.hpp"

namespace cistab {

enum class NoisePlacement { Boundary, Interior, None };

const char* to_string(NoisePlacement placement) noexcept;
NoisePlacement placement_from_string(const std::string& name);

/// Physical parameters of the Chafee-Infante problem with dynamical boundary
/// conditions: reaction coefficient beta, boundary dissipation lambda and the
/// multiplicative noise intensity alpha together with where the noise acts.
struct ModelParams {
  double beta = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  NoisePlacement placement = NoisePlacement::Boundary;

  /// Noise intensity actually used; zero when placement is None.
  double effective_alpha() const noexcept {
    return placement == NoisePlacement::None ? 0.0 : alpha;
  }
  double half_alpha_sq() const noexcept {
    const double a = effective_alpha();
    return 0.5 * a * a;
  }
};

/// Domain data entering the trace constants: dimension d, half-diameter R and,
/// in one dimension, the interval length L = 2R.
struct DomainGeometry {
  int dimension = 1;
  double half_diameter = 0.5;

  static DomainGeometry interval(double length) { return {1, 0.5 * length}; }

  double interval_length() const noexcept { return 2.0 * half_diameter; }
  /// d / R, the quantity every explicit formula is written in.
  double d_over_r() const noexcept { return dimension / half_diameter; }
};

/// Returns the pair unchanged or throws Error naming the offending field.
std::pair<ModelParams, DomainGeometry> validate_params(const ModelParams& p,
                                                       const DomainGeometry& g);

/// Element U = (u, u|boundary) of H = L2(0,L) x L2({0,L}) sampled on a uniform
/// grid that includes both endpoints. The boundary components are the first and
/// last grid values, so the trace constraint of V holds by construction.
class HState {
 public:
  HState() = default;
  explicit HState(std::vector<double> nodes);

  static HState zeros(std::size_t n_nodes) { return HState(std::vector<double>(n_nodes, 0.0)); }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<double> nodes() noexcept { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double& operator[](std::size_t i) { return nodes_[i]; }

  double boundary_left() const { return nodes_.front(); }
  double boundary_right() const { return nodes_.back(); }

  HState scaled(double c) const;
  bool all_finite() const noexcept;
  bool is_zero() const noexcept;

  friend bool operator==(const HState&, const HState&) = default;

 private:
  std::vector<double> nodes_;
};

/// Composite trapezoid for the interior integral plus unit point masses at the
/// two endpoints.
double h_inner(const HState& u, const HState& v, double grid_spacing);
double h_norm_sq(const HState& s, double grid_spacing);

/// Trapezoid approximation of the L2(0,L) part only.
double l2_norm_sq(const HState& s, double grid_spacing);
double l4_norm_pow4(const HState& s, double grid_spacing);

/// Discrete bilinear form a_h(U,U) = |grad u|^2 + lambda (u(0)^2 + u(L)^2) with
/// forward differences for the gradient.
double bilinear_form(const HState& s, double grid_spacing, double lambda);

}  // namespace cistab
