#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cistab/model.hpp"
#include "cistab/tridiagonal.hpp"

namespace cistab {

enum class TimeScheme { Explicit, SemiImplicit };
enum class BoundaryStencil { SecondOrder, FirstOrder };

const char* to_string(TimeScheme s) noexcept;
const char* to_string(BoundaryStencil s) noexcept;
TimeScheme scheme_from_string(const std::string& name);
BoundaryStencil stencil_from_string(const std::string& name);

struct SimConfig {
  int n_nodes = 101;
  double dt = 2.5e-5;
  double t_final = 1.0;
  /// Defaults to 0.1 * t_final.
  std::optional<double> t_burn_in;
  std::uint64_t seed = 0;
  bool linearized = false;
  int renormalize_every = 100;
  TimeScheme scheme = TimeScheme::Explicit;
  BoundaryStencil stencil = BoundaryStencil::SecondOrder;
  /// Explicit runs need dt <= stability_fraction * h^2.
  double stability_fraction = 0.25;
  /// Record every k-th step; 0 picks k so that about 1000 points are kept.
  int record_every = 0;
  bool keep_final_state = false;

  double grid_spacing() const noexcept { return 1.0 / (n_nodes - 1); }
  double burn_in() const noexcept { return t_burn_in.value_or(0.1 * t_final); }
  long long n_steps() const;
  long long burn_in_step() const;

  /// Throws Error(UsageError) on any violated field constraint.
  void validate() const;
};

struct PathRecord {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> times;
  std::vector<double> log_h_norm_sq;
  double lyapunov_estimate = 0.0;
  /// State at t_final in true scale (renormalisation undone).
  std::optional<HState> final_state;
};

/// Advances one time step on (0,1). Stateful only in cached matrix factors;
/// results do not depend on what was stepped before.
class Stepper {
 public:
  Stepper(const ModelParams& p, const SimConfig& cfg);
  Stepper(const ModelParams& p, const SimConfig& cfg, double dt);

  /// In-place step with Brownian increment dW. Throws NonFiniteState.
  void advance(HState& u, double dW);

  double dt() const noexcept { return dt_; }

 private:
  void drift_explicit(const HState& u, std::vector<double>& out) const;
  double boundary_slope_left(std::span<const double> u) const;
  double boundary_slope_right(std::span<const double> u) const;

  ModelParams p_;
  SimConfig cfg_;
  double dt_;
  double h_;
  double alpha_;
  // Semi-implicit: row-elimination factors for the second-order stencil and
  // the factorised tridiagonal system.
  double elim_left_ = 0.0;
  double elim_right_ = 0.0;
  tridiag::Factorization lu_;
  std::vector<double> work_;
};

HState step(const HState& state, const ModelParams& p, const SimConfig& cfg, double dW);

/// Integrates one path. path_index selects the RNG stream.
PathRecord run_path(const HState& u0, const ModelParams& p, const SimConfig& cfg,
                    std::uint64_t path_index = 0);

struct EnsembleSummary {
  double mean = 0.0;
  double median = 0.0;
  /// Absent for a single path.
  std::optional<double> standard_error;
  double fraction_negative = 0.0;
  std::vector<PathRecord> paths;  // sorted by path_index
};

/// n_threads = 0 uses the hardware concurrency.
EnsembleSummary monte_carlo_lyapunov(const HState& u0, const ModelParams& p, const SimConfig& cfg,
                                     int n_paths, unsigned n_threads = 0);

double kaplan_functional(const HState& state, const HState& psi1, double h);

/// Right-hand side of the energy identity, -a_h(U,U) - |u|_4^4 + beta |u|_2^2.
double energy_rate(const HState& u, const ModelParams& p, double h);

struct ConvergenceProbe {
  std::vector<std::pair<double, double>> levels;  // (dt of finer level, error)
  double order = 0.0;
};

/// Pathwise self-convergence in dt. Level l uses dt * 2^l; all levels share one
/// Brownian path per sample. Errors are RMS over n_samples paths of the
/// H-distance between consecutive levels at t_final.
ConvergenceProbe strong_convergence_probe(const HState& u0, const ModelParams& p,
                                          const SimConfig& cfg, int n_levels, int n_samples = 8);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& xy);

void write_trajectory_csv(std::ostream& os, const PathRecord& rec);
void write_ensemble_csv(std::ostream& os, const EnsembleSummary& summary);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace cistab
