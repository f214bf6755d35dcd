#include "cistab/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "cistab/rng.hpp"

namespace cistab {

namespace {

// Nonlinear runs cannot be renormalised (the cubic term is not homogeneous),
// but once |U|_H^2 is this small the cubic term is far below rounding relative
// to the linear part, so rescaling changes nothing except avoiding underflow.
constexpr double kUnderflowGuard = 1e-200;
constexpr double kUnderflowTarget = 1e-100;

constexpr long long kDefaultRecordPoints = 1000;

}  // namespace

const char* to_string(TimeScheme s) noexcept {
  return s == TimeScheme::Explicit ? "explicit" : "semi_implicit";
}

const char* to_string(BoundaryStencil s) noexcept {
  return s == BoundaryStencil::SecondOrder ? "second_order" : "first_order";
}

TimeScheme scheme_from_string(const std::string& name) {
  if (name == "explicit") return TimeScheme::Explicit;
  if (name == "semi_implicit" || name == "semi-implicit") return TimeScheme::SemiImplicit;
  throw Error(ErrorKind::UsageError, "unknown time scheme '" + name + "'");
}

BoundaryStencil stencil_from_string(const std::string& name) {
  if (name == "second_order") return BoundaryStencil::SecondOrder;
  if (name == "first_order") return BoundaryStencil::FirstOrder;
  throw Error(ErrorKind::UsageError, "unknown boundary stencil '" + name + "'");
}

long long SimConfig::n_steps() const { return std::llround(t_final / dt); }

long long SimConfig::burn_in_step() const { return std::llround(burn_in() / dt); }

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::UsageError, what); };
  if (n_nodes < 3) fail("n_nodes must be at least 3");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) fail("t_final must be positive");
  if (n_steps() < 1) fail("t_final must cover at least one step");
  const double tb = burn_in();
  if (!(tb >= 0.0) || !(tb < t_final)) fail("t_burn_in must lie in [0, t_final)");
  if (burn_in_step() >= n_steps()) fail("t_burn_in rounds to the final step");
  if (renormalize_every < 1) fail("renormalize_every must be positive");
  if (record_every < 0) fail("record_every must be nonnegative");
  if (scheme == TimeScheme::Explicit) {
    const double h = grid_spacing();
    if (dt > stability_fraction * h * h) {
      fail("explicit scheme needs dt <= " + format_double(stability_fraction) +
           " h^2; use the semi-implicit scheme or refine dt");
    }
  }
}

Stepper::Stepper(const ModelParams& p, const SimConfig& cfg) : Stepper(p, cfg, cfg.dt) {}

Stepper::Stepper(const ModelParams& p, const SimConfig& cfg, double dt)
    : p_(p), cfg_(cfg), dt_(dt), h_(cfg.grid_spacing()), alpha_(p.effective_alpha()),
      work_(static_cast<std::size_t>(cfg.n_nodes)) {
  if (cfg_.scheme != TimeScheme::SemiImplicit) return;

  // (I - dt L) with L the linear operator: 3-point Laplacian inside,
  // u'(0) - lambda u(0) (and its mirror) on the boundary rows.
  const std::size_t n = static_cast<std::size_t>(cfg.n_nodes);
  const double h = h_;
  const double r = dt / (h * h);
  std::vector<double> lower(n - 1, -r), diag(n, 1.0 + 2.0 * r), upper(n - 1, -r);

  if (cfg_.stencil == BoundaryStencil::FirstOrder) {
    diag[0] = 1.0 + dt * (1.0 / h + p.lambda);
    upper[0] = -dt / h;
    diag[n - 1] = diag[0];
    lower[n - 2] = -dt / h;
  } else {
    // Row 0 touches column 2; cancel it with row 1, same at the right end.
    const double d0 = 1.0 + dt * (1.5 / h + p.lambda);
    const double u01 = -2.0 * dt / h;
    const double u02 = 0.5 * dt / h;
    elim_left_ = -u02 / upper[1];
    diag[0] = d0 + elim_left_ * lower[0];
    upper[0] = u01 + elim_left_ * diag[1];

    elim_right_ = -u02 / lower[n - 3];
    diag[n - 1] = d0 + elim_right_ * upper[n - 2];
    lower[n - 2] = u01 + elim_right_ * diag[n - 2];
  }
  lu_ = tridiag::Factorization(lower, diag, upper);
}

double Stepper::boundary_slope_left(std::span<const double> u) const {
  if (cfg_.stencil == BoundaryStencil::FirstOrder) return (u[1] - u[0]) / h_;
  return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h_);
}

double Stepper::boundary_slope_right(std::span<const double> u) const {
  const std::size_t m = u.size() - 1;
  if (cfg_.stencil == BoundaryStencil::FirstOrder) return (u[m - 1] - u[m]) / h_;
  return (-3.0 * u[m] + 4.0 * u[m - 1] - u[m - 2]) / (2.0 * h_);
}

void Stepper::drift_explicit(const HState& state, std::vector<double>& out) const {
  const auto u = state.nodes();
  const std::size_t n = u.size();
  const double inv_h2 = 1.0 / (h_ * h_);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    double f = lap + p_.beta * u[i];
    if (!cfg_.linearized) f -= u[i] * u[i] * u[i];
    out[i] = f;
  }
  out[0] = boundary_slope_left(u) - p_.lambda * u[0];
  out[n - 1] = boundary_slope_right(u) - p_.lambda * u[n - 1];
}

void Stepper::advance(HState& state, double dW) {
  auto u = state.nodes();
  const std::size_t n = u.size();
  const double noise = alpha_ * dW;
  const bool boundary_noise = p_.placement == NoisePlacement::Boundary;
  const bool interior_noise = p_.placement == NoisePlacement::Interior;

  if (cfg_.scheme == TimeScheme::Explicit) {
    drift_explicit(state, work_);
    for (std::size_t i = 0; i < n; ++i) {
      const bool edge = (i == 0 || i + 1 == n);
      double du = dt_ * work_[i];
      if ((edge && boundary_noise) || (!edge && interior_noise)) du += noise * u[i];
      work_[i] = u[i] + du;
    }
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double f = p_.beta * u[i];
      if (!cfg_.linearized) f -= u[i] * u[i] * u[i];
      work_[i] = u[i] + dt_ * f + (interior_noise ? noise * u[i] : 0.0);
    }
    work_[0] = u[0] + (boundary_noise ? noise * u[0] : 0.0);
    work_[n - 1] = u[n - 1] + (boundary_noise ? noise * u[n - 1] : 0.0);
    work_[0] += elim_left_ * work_[1];
    work_[n - 1] += elim_right_ * work_[n - 2];
    lu_.solve(work_);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(work_[i])) {
      throw Error(ErrorKind::NonFiniteState, "state became non-finite; reduce dt");
    }
    u[i] = work_[i];
  }
}

HState step(const HState& state, const ModelParams& p, const SimConfig& cfg, double dW) {
  cfg.validate();
  if (state.size() != static_cast<std::size_t>(cfg.n_nodes)) {
    throw Error(ErrorKind::UsageError, "state size does not match n_nodes");
  }
  Stepper stepper(p, cfg);
  HState next = state;
  stepper.advance(next, dW);
  return next;
}

PathRecord run_path(const HState& u0, const ModelParams& p, const SimConfig& cfg,
                    std::uint64_t path_index) {
  cfg.validate();
  if (u0.size() != static_cast<std::size_t>(cfg.n_nodes)) {
    throw Error(ErrorKind::UsageError, "initial state size does not match n_nodes");
  }
  if (u0.is_zero()) throw Error(ErrorKind::ZeroInitialState, "initial state is identically zero");

  const double h = cfg.grid_spacing();
  const long long n_steps = cfg.n_steps();
  const long long burn_step = cfg.burn_in_step();
  const long long every = cfg.record_every > 0
                              ? cfg.record_every
                              : std::max<long long>(1, n_steps / kDefaultRecordPoints);
  const bool noisy = p.effective_alpha() != 0.0;

  Stepper stepper(p, cfg);
  const BrownianPath brownian(cfg.seed, path_index, cfg.dt);

  PathRecord rec;
  rec.seed = cfg.seed;
  rec.path_index = path_index;

  HState u = u0;
  double offset = 0.0;
  double psi_burn = 0.0;
  double psi = std::log(h_norm_sq(u, h));
  rec.times.push_back(0.0);
  rec.log_h_norm_sq.push_back(psi);
  if (burn_step == 0) psi_burn = psi;

  for (long long k = 1; k <= n_steps; ++k) {
    const double dW = noisy ? brownian.increment(static_cast<std::uint64_t>(k - 1)) : 0.0;
    stepper.advance(u, dW);

    const bool renorm_due = cfg.linearized && k % cfg.renormalize_every == 0;
    const bool record_due = k % every == 0 || k == burn_step || k == n_steps;
    if (!renorm_due && !record_due && cfg.linearized) continue;

    const double s = h_norm_sq(u, h);
    if (!(s > 0.0)) throw Error(ErrorKind::NonFiniteState, "state collapsed to zero (underflow)");
    if (!std::isfinite(s)) throw Error(ErrorKind::NonFiniteState, "H-norm overflowed");
    psi = std::log(s) + offset;

    if (renorm_due) {
      const double c = 1.0 / std::sqrt(s);
      for (double& v : u.nodes()) v *= c;
      offset += std::log(s);
    } else if (!cfg.linearized && s < kUnderflowGuard) {
      const double c = std::sqrt(kUnderflowTarget / s);
      for (double& v : u.nodes()) v *= c;
      offset += std::log(s) - std::log(kUnderflowTarget);
    }

    if (record_due) {
      rec.times.push_back(static_cast<double>(k) * cfg.dt);
      rec.log_h_norm_sq.push_back(psi);
      if (k == burn_step) psi_burn = psi;
    }
  }

  const double t_burn = static_cast<double>(burn_step) * cfg.dt;
  const double t_end = static_cast<double>(n_steps) * cfg.dt;
  rec.lyapunov_estimate = (rec.log_h_norm_sq.back() - psi_burn) / (t_end - t_burn);
  // Undo the bookkeeping so the snapshot is the actual state.
  if (cfg.keep_final_state) rec.final_state = u.scaled(std::exp(0.5 * offset));
  return rec;
}

EnsembleSummary monte_carlo_lyapunov(const HState& u0, const ModelParams& p, const SimConfig& cfg,
                                     int n_paths, unsigned n_threads) {
  if (n_paths < 1) throw Error(ErrorKind::UsageError, "n_paths must be at least 1");
  cfg.validate();
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_paths));

  EnsembleSummary out;
  out.paths.resize(static_cast<std::size_t>(n_paths));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_paths));
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_paths; i = next.fetch_add(1)) {
      try {
        out.paths[static_cast<std::size_t>(i)] = run_path(u0, p, cfg, static_cast<std::uint64_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  // Report the failure of the lowest path index so errors are reproducible too.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> est;
  est.reserve(out.paths.size());
  for (const auto& r : out.paths) est.push_back(r.lyapunov_estimate);
  const double n = static_cast<double>(est.size());
  out.mean = std::accumulate(est.begin(), est.end(), 0.0) / n;
  out.fraction_negative =
      static_cast<double>(std::count_if(est.begin(), est.end(), [](double x) { return x < 0.0; })) / n;
  if (est.size() > 1) {
    double ss = 0.0;
    for (double x : est) ss += (x - out.mean) * (x - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  std::sort(est.begin(), est.end());
  const std::size_t mid = est.size() / 2;
  out.median = est.size() % 2 == 1 ? est[mid] : 0.5 * (est[mid - 1] + est[mid]);
  return out;
}

double kaplan_functional(const HState& state, const HState& psi1, double h) {
  return h_inner(state, psi1, h);
}

double energy_rate(const HState& u, const ModelParams& p, double h) {
  return -bilinear_form(u, h, p.lambda) - l4_norm_pow4(u, h) + p.beta * l2_norm_sq(u, h);
}

ConvergenceProbe strong_convergence_probe(const HState& u0, const ModelParams& p,
                                          const SimConfig& cfg, int n_levels, int n_samples) {
  if (n_levels < 3) throw Error(ErrorKind::UsageError, "strong_convergence_probe needs >= 3 levels");
  if (n_samples < 1) throw Error(ErrorKind::UsageError, "n_samples must be at least 1");
  const std::uint64_t coarsest = std::uint64_t{1} << (n_levels - 1);
  SimConfig coarse = cfg;
  coarse.dt = cfg.dt * static_cast<double>(coarsest);
  coarse.t_burn_in = 0.0;
  coarse.validate();
  if (u0.size() != static_cast<std::size_t>(cfg.n_nodes)) {
    throw Error(ErrorKind::UsageError, "initial state size does not match n_nodes");
  }
  const std::uint64_t coarse_steps = static_cast<std::uint64_t>(coarse.n_steps());
  const double h = cfg.grid_spacing();
  const bool noisy = p.effective_alpha() != 0.0;

  std::vector<Stepper> steppers;
  for (int l = 0; l < n_levels; ++l) steppers.emplace_back(p, cfg, cfg.dt * std::ldexp(1.0, l));

  std::vector<double> sq_err(static_cast<std::size_t>(n_levels - 1), 0.0);
  for (int s = 0; s < n_samples; ++s) {
    const BrownianPath brownian(cfg.seed, static_cast<std::uint64_t>(s), cfg.dt);
    std::vector<HState> finals;
    for (int l = 0; l < n_levels; ++l) {
      const std::uint64_t sub = std::uint64_t{1} << l;
      const std::uint64_t steps = coarse_steps * (coarsest / sub);
      HState u = u0;
      for (std::uint64_t k = 0; k < steps; ++k) {
        steppers[static_cast<std::size_t>(l)].advance(u, noisy ? brownian.increment(k, sub) : 0.0);
      }
      finals.push_back(std::move(u));
    }
    for (int l = 0; l + 1 < n_levels; ++l) {
      HState diff = finals[static_cast<std::size_t>(l)];
      const auto& other = finals[static_cast<std::size_t>(l + 1)];
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= other[i];
      sq_err[static_cast<std::size_t>(l)] += h_norm_sq(diff, h);
    }
  }

  ConvergenceProbe probe;
  for (int l = 0; l + 1 < n_levels; ++l) {
    probe.levels.emplace_back(cfg.dt * std::ldexp(1.0, l),
                              std::sqrt(sq_err[static_cast<std::size_t>(l)] / n_samples));
  }
  probe.order = loglog_slope(probe.levels);
  return probe;
}

double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  const double n = static_cast<double>(xy.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : xy) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const PathRecord& rec) {
  os << "t,log_h_norm_sq\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    os << format_double(rec.times[i]) << ',' << format_double(rec.log_h_norm_sq[i]) << '\n';
  }
}

void write_ensemble_csv(std::ostream& os, const EnsembleSummary& summary) {
  os << "path_index,seed,lyapunov_estimate\n";
  for (const auto& r : summary.paths) {
    os << r.path_index << ',' << r.seed << ',' << format_double(r.lyapunov_estimate) << '\n';
  }
}

}  // namespace cistab
