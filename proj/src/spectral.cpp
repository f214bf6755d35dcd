#include "cistab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cistab {

double SpectralMode::eigenfunction(double x) const {
  return coeff_cos * std::cos(mu * x) + coeff_sin * std::sin(mu * x);
}

double SpectralMode::eigenfunction_derivative(double x) const {
  return mu * (-coeff_cos * std::sin(mu * x) + coeff_sin * std::cos(mu * x));
}

double characteristic_residual(double mu, double b) {
  const double m2 = mu * mu;
  return (m2 * m2 - (2.0 * b + 1.0) * m2 + b * b) * std::sin(mu) -
         (2.0 * m2 * mu - 2.0 * b * mu) * std::cos(mu);
}

namespace {

// characteristic_residual / mu, finite at mu = 0 where it equals b^2 + 2b.
double reduced_residual(double mu, double b) {
  const double m2 = mu * mu;
  const double sinc = std::abs(mu) < 1e-4 ? 1.0 - m2 / 6.0 + m2 * m2 / 120.0 : std::sin(mu) / mu;
  return (m2 * m2 - (2.0 * b + 1.0) * m2 + b * b) * sinc - (2.0 * m2 - 2.0 * b) * std::cos(mu);
}

double residual_scale(double mu, double b) {
  const double m2 = mu * mu;
  // Sum of monomial magnitudes: on the cos(mu) = 0 branch both bracketed
  // factors vanish together, so their values are no measure of rounding.
  return (m2 * m2 + (2.0 * b + 1.0) * m2 + b * b) * std::abs(std::sin(mu)) +
         (2.0 * m2 * mu + 2.0 * b * mu) * std::abs(std::cos(mu)) + 1e-300;
}

double bisect(double a, double b_end, double fa, double b) {
  const bool neg_a = fa < 0.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (a + b_end);
    if (mid <= a || mid >= b_end) break;
    const double fm = reduced_residual(mid, b);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == neg_a) {
      a = mid;
    } else {
      b_end = mid;
    }
  }
  return 0.5 * (a + b_end);
}

SpectralMode make_mode(double mu, double b) {
  SpectralMode m;
  m.mu = mu;
  m.coeff_cos = 1.0;
  m.coeff_sin = (b - mu * mu) / mu;
  m.growth_rate = -mu * mu;
  m.branch = std::abs(std::cos(mu)) < 1e-9 ? ModeBranch::CosZeroBranch : ModeBranch::TanBranch;
  return m;
}

constexpr double kScanStep = 1e-3;
constexpr double kScanCap = 1e5;

}  // namespace

std::vector<SpectralMode> mu_roots(double b, int n_roots, double tol) {
  if (!(b > 0.0)) throw Error(ErrorKind::UsageError, "mu_roots needs b = beta + lambda > 0");
  if (n_roots < 1) throw Error(ErrorKind::UsageError, "mu_roots needs n_roots >= 1");

  std::vector<double> roots;
  double window = (n_roots + 2) * std::numbers::pi;
  double a = 0.0;
  double fa = reduced_residual(0.0, b);
  std::size_t k = 0;
  while (static_cast<int>(roots.size()) < n_roots) {
    const double end = a + kScanStep;
    if (end > window) {
      if (window >= kScanCap) {
        throw Error(ErrorKind::RootCountShortfall,
                    "found " + std::to_string(roots.size()) + " of " + std::to_string(n_roots) +
                        " roots below mu = " + std::to_string(kScanCap));
      }
      window = std::min(2.0 * window, kScanCap);
      continue;
    }
    // Grid points are generated from the index to avoid drift.
    const double next = static_cast<double>(++k) * kScanStep;
    const double fb = reduced_residual(next, b);
    if (fb == 0.0) {
      roots.push_back(next);
      // Step past the exact zero so it is not bracketed twice.
      const double after = static_cast<double>(++k) * kScanStep;
      a = after;
      fa = reduced_residual(after, b);
      continue;
    }
    if ((fa < 0.0) != (fb < 0.0)) roots.push_back(bisect(a, next, fa, b));
    a = next;
    fa = fb;
  }

  // cos(mu) = 0 roots: mu = -/+1/2 + sqrt(1/4 + b) landing on pi/2 + k pi.
  // They are simple zeros of the determinant and are normally already
  // bracketed by the scan; add any that slipped between grid points.
  for (double sign : {-1.0, 1.0}) {
    const double mu_c = 0.5 * sign + std::sqrt(0.25 + b);
    if (mu_c <= 0.0 || std::abs(std::cos(mu_c)) > 1e-12) continue;
    const bool known = std::any_of(roots.begin(), roots.end(),
                                   [&](double r) { return std::abs(r - mu_c) < 1e-8; });
    if (!known) roots.push_back(mu_c);
  }
  std::sort(roots.begin(), roots.end());
  roots.resize(static_cast<std::size_t>(n_roots));

  std::vector<SpectralMode> modes;
  modes.reserve(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double mu = roots[i];
    if (std::abs(characteristic_residual(mu, b)) > tol * residual_scale(mu, b)) {
      throw Error(ErrorKind::ConvergenceFailure,
                  "root " + std::to_string(i + 1) + " has residual above tolerance");
    }
    SpectralMode m = make_mode(mu, b);
    m.index = static_cast<int>(i) + 1;
    modes.push_back(m);
  }
  return modes;
}

std::vector<SpectralMode> spectral_modes(const ModelParams& p, int n_roots, double tol) {
  auto modes = mu_roots(p.beta + p.lambda, n_roots, tol);
  for (auto& m : modes) m.growth_rate = p.beta - m.mu * m.mu;
  return modes;
}

double mu1_squared_asymptotic(double b) { return 2.0 / 3.0 * b - b * b / 27.0; }

InstabilityReport instability_predicate(const ModelParams& p) {
  InstabilityReport r;
  const auto modes = mu_roots(p.beta + p.lambda, 1);
  r.mu1_squared = modes.front().mu * modes.front().mu;
  r.margin = p.beta - r.mu1_squared;
  r.unstable = p.beta > r.mu1_squared;
  return r;
}

double left_boundary_residual(const SpectralMode& m, double b) {
  // -mu^2 phi(0) - phi'(0) + b phi(0) = 0
  const double phi = m.eigenfunction(0.0);
  const double dphi = m.eigenfunction_derivative(0.0);
  const double scale = std::abs(m.mu * m.mu * phi) + std::abs(dphi) + std::abs(b * phi);
  return std::abs((b - m.mu * m.mu) * phi - dphi) / scale;
}

double right_boundary_residual(const SpectralMode& m, double b) {
  // -mu^2 phi(1) + phi'(1) + b phi(1) = 0
  const double phi = m.eigenfunction(1.0);
  const double dphi = m.eigenfunction_derivative(1.0);
  const double scale = std::abs(m.mu * m.mu * phi) + std::abs(dphi) + std::abs(b * phi);
  return std::abs((b - m.mu * m.mu) * phi + dphi) / scale;
}

HState sample_mode(const SpectralMode& m, int n_nodes) {
  std::vector<double> v(static_cast<std::size_t>(n_nodes));
  const double h = 1.0 / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) v[static_cast<std::size_t>(i)] = m.eigenfunction(i * h);
  return HState(std::move(v));
}

SeriesSolution::SeriesSolution(const HState& u0, std::vector<SpectralMode> modes,
                               const ModelParams& p)
    : modes_(std::move(modes)), beta_(p.beta) {
  if (modes_.empty()) throw Error(ErrorKind::UsageError, "series needs at least one mode");
  const int n = static_cast<int>(u0.size());
  const double h = 1.0 / (n - 1);
  coeffs_.reserve(modes_.size());
  for (const auto& m : modes_) {
    const HState phi = sample_mode(m, n);
    coeffs_.push_back(h_inner(u0, phi, h) / h_norm_sq(phi, h));
  }
}

double SeriesSolution::operator()(double x, double t) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const double mu2 = modes_[i].mu * modes_[i].mu;
    sum += coeffs_[i] * std::exp((beta_ - mu2) * t) * modes_[i].eigenfunction(x);
  }
  return sum;
}

HState SeriesSolution::sample(int n_nodes, double t) const {
  std::vector<double> v(static_cast<std::size_t>(n_nodes));
  const double h = 1.0 / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) v[static_cast<std::size_t>(i)] = (*this)(i * h, t);
  return HState(std::move(v));
}

double series_solution(const HState& u0, const std::vector<SpectralMode>& modes,
                       const ModelParams& p, double x, double t) {
  return SeriesSolution(u0, modes, p)(x, t);
}

}  // namespace cistab
