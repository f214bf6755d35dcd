// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   cistab_acceptance [--only N] [--cli path/to/cistab]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cistab/experiment.hpp"
#include "cistab/simulator.hpp"
#include "cistab/spectral.hpp"
#include "cistab/stability_ranges.hpp"
#include "cistab/trace_constants.hpp"

using namespace cistab;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kFeasibleTol = 1e-3;
constexpr double kFeasibleMaxMs = 1.0;
constexpr double kEnvelopeLowerTol = 1e-3;
constexpr double kEnvelopeUpperTol = 1e-2;
constexpr double kEnvelopeMaxMs = 100.0;
constexpr int kOracleTriples = 200;
constexpr double kOracleStep = 1e-3;
constexpr double kTraceAgreeTol = 5e-5;
constexpr double kRichardsonTarget = 4.0;
constexpr double kRichardsonTol = 0.5;
constexpr double kTraceMaxMs = 5000.0;
constexpr double kAsymptoticSlope = 3.0;
constexpr double kAsymptoticSlopeTol = 0.3;
constexpr double kGrowthRelTol = 0.2;
constexpr double kSpatialRatioLo = 3.0;
constexpr double kSpatialRatioHi = 5.0;
constexpr double kMcFractionNegative = 0.9;
constexpr double kMcMaxMs = 600000.0;
constexpr double kDecaySlack = 0.01;
constexpr double kThetaHatTol = 1e-12;
constexpr double kT1Tol = 1e-10;
constexpr double kSmallThetaTol = 1e-12;

const DomainGeometry kUnit{1, 0.5};
const ModelParams kSec5{0.02, 0.001, 0.0, NoisePlacement::Boundary};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Strictly inside at 20 samples, rejected just above the upper end.
bool endpoint_consistent(const IntensityInterval& iv, double a, double b, QuadraticConvention conv) {
  for (int k = 1; k <= 20; ++k) {
    const double z = iv.lower + (iv.upper - iv.lower) * k / 21.0;
    if (!quadratic_positivity_oracle(a, b, 2.0 * z, conv, 1e3, 10000)) return false;
  }
  return !quadratic_positivity_oracle(a, b, 2.0 * (iv.upper + kOracleStep), conv, 1e3, 10000);
}

Outcome criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = theta_feasible_interval_boundary(kSec5, kUnit);
  const double ms = elapsed_ms(start);
  if (!r) return {false, "no interval: " + r.failed_hypothesis};
  const double disc = std::sqrt(1.0 - 4.0 * 0.019);
  const double lo = 0.5 * (1.0 - disc);
  const double hi = 0.5 * (1.0 + disc);
  const double err = std::max(std::abs(r.value->lower - lo), std::abs(r.value->upper - hi));
  const bool ok = err <= kFeasibleTol && std::abs(r.value->lower - 0.0194) <= kFeasibleTol &&
                  std::abs(r.value->upper - 0.9806) <= kFeasibleTol && ms < kFeasibleMaxMs;
  return {ok, fmt("interval (%.9f, %.9f), max endpoint error %.2e, %.3f ms", r.value->lower,
                  r.value->upper, err, ms)};
}

Outcome criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = optimize_range_over_theta(kSec5, kUnit, NoisePlacement::Boundary,
                                           ConstantSource::ExplicitC, 2000);
  const double ms = elapsed_ms(start);
  const bool ok = std::abs(r.envelope_lower - 0.0278) <= kEnvelopeLowerTol &&
                  std::abs(r.envelope_upper - 3.137) <= kEnvelopeUpperTol && r.connected &&
                  ms < kEnvelopeMaxMs;
  return {ok, fmt("alpha^2/2 in (%.6f, %.6f), alpha^2 in (%.6f, %.6f), connected=%s, %.2f ms",
                  r.envelope_lower, r.envelope_upper, 2.0 * r.envelope_lower,
                  2.0 * r.envelope_upper, r.connected ? "yes" : "no", ms)};
}

Outcome criterion_3() {
  std::mt19937_64 rng(0xACCE55);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int boundary = 0, interior = 0, failures = 0;
  for (long trial = 0; trial < 1000000 && (boundary < kOracleTriples || interior < kOracleTriples);
       ++trial) {
    const double beta = 1.5 * u01(rng) + 1e-3;
    const double lambda = 1.5 * u01(rng) + 1e-3;
    const double theta = 2.0 * u01(rng);
    const ModelParams p{beta, lambda, 0.0};
    const double c = explicit_constant(theta, kUnit);
    if (boundary < kOracleTriples) {
      if (auto iv = boundary_noise_range(p, theta, c)) {
        ++boundary;
        if (!endpoint_consistent(*iv, c - beta, theta - lambda, QuadraticConvention::Boundary)) ++failures;
      }
    }
    if (interior < kOracleTriples) {
      if (auto iv = interior_noise_range(p, theta, c)) {
        ++interior;
        if (!endpoint_consistent(*iv, c - beta, lambda - theta, QuadraticConvention::Interior)) ++failures;
      }
    }
  }
  const bool ok = boundary == kOracleTriples && interior == kOracleTriples && failures == 0;
  return {ok, fmt("%d boundary + %d interior triples, %d failures", boundary, interior, failures)};
}

Outcome criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  const double dirichlet = std::numbers::pi * std::numbers::pi;
  int sandwich_bad = 0, agree_bad = 0, ratio_bad = 0;
  double worst_gap = 0.0, ratio_min = 1e300, ratio_max = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double theta = 0.1 * k;
    const double c_explicit = explicit_constant(theta, kUnit);
    const double c_star = optimal_constant_1d(theta, 1.0);
    if (!(c_explicit <= c_star && c_star <= dirichlet)) ++sandwich_bad;
    const double fd = robin_spectrum_fd(theta, 1.0, 2000).front();
    worst_gap = std::max(worst_gap, std::abs(fd - c_star));
    if (std::abs(fd - c_star) > kTraceAgreeTol) ++agree_bad;
    const double e1 = std::abs(robin_spectrum_fd(theta, 1.0, 101).front() - c_star);
    const double e2 = std::abs(robin_spectrum_fd(theta, 1.0, 201).front() - c_star);
    const double ratio = e1 / e2;
    ratio_min = std::min(ratio_min, ratio);
    ratio_max = std::max(ratio_max, ratio);
    if (std::abs(ratio - kRichardsonTarget) > kRichardsonTol) ++ratio_bad;
  }
  const double ms = elapsed_ms(start);
  const bool ok = sandwich_bad == 0 && agree_bad == 0 && ratio_bad == 0 && ms < kTraceMaxMs;
  return {ok, fmt("50 thetas: sandwich violations %d, max |FD(2000) - C*| %.2e, error ratio "
                  "101->201 in [%.3f, %.3f], %.0f ms",
                  sandwich_bad, worst_gap, ratio_min, ratio_max, ms)};
}

Outcome criterion_5() {
  std::vector<std::pair<double, double>> pts;
  std::vector<std::pair<double, double>> coeff;
  for (double b : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    const double mu = mu_roots(b, 1).front().mu;
    const double dev = std::abs(mu * mu - mu1_squared_asymptotic(b));
    pts.emplace_back(b, dev);
    coeff.emplace_back(b, dev / (b * b));
  }
  const double slope = loglog_slope(pts);
  const bool ok = std::abs(slope - kAsymptoticSlope) <= kAsymptoticSlopeTol;
  return {ok, fmt("slope %.4f (target %.1f +/- %.1f); |deviation|/b^2 from %.6f to %.6f, "
                  "2/81 = %.6f",
                  slope, kAsymptoticSlope, kAsymptoticSlopeTol, coeff.front().second,
                  coeff.back().second, 2.0 / 81.0)};
}

double linear_rate(int n) {
  SimConfig c;
  c.n_nodes = n;
  c.dt = 1e-3;
  c.t_final = 100.0;
  c.t_burn_in = 10.0;
  c.linearized = true;
  c.scheme = TimeScheme::SemiImplicit;
  const auto mode = spectral_modes(kSec5, 1).front();
  return run_path(sample_mode(mode, n), kSec5, c).lyapunov_estimate;
}

Outcome criterion_6() {
  const double expected = 2.0 * instability_predicate(kSec5).margin;
  const double r201 = linear_rate(201);
  const double rel = std::abs(r201 - expected) / expected;
  // The dt error is common to all grids, so successive differences isolate
  // the spatial part.
  std::vector<double> rates;
  for (int n : {51, 101, 201, 401}) rates.push_back(n == 201 ? r201 : linear_rate(n));
  const double d1 = rates[0] - rates[1];
  const double d2 = rates[1] - rates[2];
  const double d3 = rates[2] - rates[3];
  const double q1 = d1 / d2;
  const double q2 = d2 / d3;
  const bool ok = rel <= kGrowthRelTol && q1 >= kSpatialRatioLo && q1 <= kSpatialRatioHi &&
                  q2 >= kSpatialRatioLo && q2 <= kSpatialRatioHi;
  return {ok, fmt("rate %.8f vs 2(beta - mu1^2) = %.8f (rel %.1e); spatial difference ratios "
                  "%.3f, %.3f",
                  r201, expected, rel, q1, q2)};
}

EnsembleSummary mc(double alpha) {
  SimConfig c;
  c.n_nodes = 51;
  c.dt = 1e-2;
  c.t_final = 2000.0;
  c.scheme = TimeScheme::SemiImplicit;
  c.seed = 2024;
  const ModelParams p{0.02, 0.001, alpha, NoisePlacement::Boundary};
  const HState u0 = experiment::initial_state({experiment::InitialKind::Mode1, 1e-3}, p, c.n_nodes, c.seed);
  return monte_carlo_lyapunov(u0, p, c, 64);
}

Outcome criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  const auto noisy = mc(std::sqrt(2.0));
  const auto quiet = mc(0.0);
  const double ms = elapsed_ms(start);
  const bool ok = noisy.median < 0.0 && noisy.fraction_negative >= kMcFractionNegative &&
                  quiet.median > 0.0 && ms < kMcMaxMs;
  return {ok, fmt("alpha^2=2: median %.5f, %.0f%% negative; alpha=0: median %.5f; %.1f s",
                  noisy.median, 100.0 * noisy.fraction_negative, quiet.median, ms / 1000.0)};
}

Outcome criterion_8() {
  const ModelParams p{0.5, 1.0, 0.0, NoisePlacement::None};
  const double delta = decay_delta(p, kUnit, ConstantSource::ExplicitC);
  int violations = 0;
  std::size_t points = 0;
  double worst = -1e300;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig c;
    c.n_nodes = 101;
    c.dt = 1e-3;
    c.t_final = 5.0;
    c.scheme = TimeScheme::SemiImplicit;
    c.record_every = 10;
    const HState u0 = experiment::initial_state({experiment::InitialKind::RandomSmooth, 1.0}, p,
                                                c.n_nodes, seed);
    const auto r = run_path(u0, p, c);
    const double log0 = std::log(h_norm_sq(u0, c.grid_spacing()));
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const double excess = r.log_h_norm_sq[i] - log0 + 2.0 * (delta - kDecaySlack) * r.times[i];
      worst = std::max(worst, excess);
      if (excess > 1e-12) ++violations;
      ++points;
    }
  }
  return {violations == 0,
          fmt("delta %.6f, %zu recorded points over 5 initial states, %d violations, max "
              "log-excess %.3e",
              delta, points, violations, worst)};
}

Outcome criterion_9() {
  const ModelParams p{0.2, 0.5, 0.0, NoisePlacement::Interior};
  const double th = theta_hat_persistence_interior(p, kUnit);
  const double c = explicit_constant(th, kUnit);
  const double identity = std::abs(th + c - (p.beta + p.lambda));
  const double t1 = std::abs(interior_endpoints(c - p.beta, p.lambda - th).first);
  const auto pers = interior_noise_range(p, th, c);
  const bool pers_ok =
      pers && endpoint_consistent(*pers, c - p.beta, p.lambda - th, QuadraticConvention::Interior);

  const ModelParams q{0.4, 1.0, 0.0, NoisePlacement::Interior};
  const auto small = interior_small_theta_range(q);
  bool small_ok = false;
  double small_err = 1e300;
  if (small) {
    const auto& iv = *small.value;
    small_err = std::max(std::abs(iv.lower - 0.4), std::abs(iv.upper - (2.6 + 2.0 * std::sqrt(1.2))));
    small_ok = iv.lower_closed && small_err <= kSmallThetaTol &&
               endpoint_consistent(iv, -q.beta, q.lambda, QuadraticConvention::Interior);
  }
  const bool ok = identity <= kThetaHatTol && t1 <= kT1Tol && pers_ok && small_ok;
  return {ok, fmt("theta_hat %.15f, |theta_hat + C - beta - lambda| %.1e, |T1| %.1e, persistence "
                  "oracle %s; small-theta interval error %.1e, oracle %s",
                  th, identity, t1, pers_ok ? "ok" : "FAILED", small_err,
                  small_ok ? "ok" : "FAILED")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_10(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli given"};
  const fs::path root = fs::temp_directory_path() / "cistab_acceptance_10";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"sim": {"n_nodes": 31, "dt": 0.01, "t_final": 100,)"
                     << R"( "scheme": "semi_implicit"}, "n_paths": 8, "seed": 11})";
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    const std::string cmd = "\"" + cli + "\" repro-sec5 --config \"" + cfg.string() +
                            "\" --out \"" + d.string() + "\" > \"" + (root / "log.txt").string() +
                            "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, fmt("repro-sec5 exited with status %d", rc)};
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t count_b = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
  int differing = 0;
  for (const auto& n : names) {
    if (!fs::exists(dirs[1] / n) || slurp(dirs[0] / n) != slurp(dirs[1] / n)) ++differing;
  }
  const bool ok = !names.empty() && count_b == names.size() && differing == 0;
  fs::remove_all(root);
  return {ok, fmt("%zu files compared, %d differ", names.size(), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string cli;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only N] [--cli path]\n", argv[0]);
      return 1;
    }
  }
  const std::vector<std::function<Outcome()>> checks{
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, [&] { return criterion_10(cli); }};
  if (only < 0 || only > static_cast<int>(checks.size())) {
    std::fprintf(stderr, "--only must be in 1..%zu\n", checks.size());
    return 1;
  }
  bool all = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
