#include "cistab/trace_constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cistab/tridiagonal.hpp"

namespace cistab {

using std::numbers::pi;

double explicit_constant(double theta, const DomainGeometry& g) {
  const double dr = g.d_over_r();
  if (theta < 0.5 * dr) return theta * (dr - theta);
  return 0.25 * dr * dr;
}

namespace {

// sin(x)/x, accurate near 0.
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace

double robin_characteristic(double mu, double theta, double length) {
  return (mu * mu - theta * theta) * length * sinc(mu * length) -
         2.0 * theta * std::cos(mu * length);
}

double optimal_constant_1d(double theta, double length, double tol) {
  if (!(length > 0.0)) throw Error(ErrorKind::BadGeometry, "interval length must be positive");
  if (theta < 0.0) throw Error(ErrorKind::UsageError, "theta must be nonnegative");
  if (theta == 0.0) return 0.0;

  // At mu -> 0+ the characteristic is -theta (theta L + 2) < 0, and at
  // mu = pi/L it equals 2 theta > 0, so the first root lies in (0, pi/L].
  const double mu_max = pi / length;
  const double step = std::min(0.01, pi / (100.0 * length));
  double a = 0.0;
  double fa = robin_characteristic(0.0, theta, length);
  double b = 0.0;
  bool bracketed = false;
  while (a < mu_max) {
    b = std::min(a + step, mu_max);
    const double fb = robin_characteristic(b, theta, length);
    if ((fa < 0.0) != (fb < 0.0) || fb == 0.0) {
      bracketed = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!bracketed) {
    throw Error(ErrorKind::NoRootInBracket,
                "no sign change of the Robin characteristic on (0, pi/L] for theta = " +
                    std::to_string(theta));
  }
  const double fa_sign_negative = fa < 0.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (2.0 * b * (b - a) < 0.25 * tol && it > 60) break;
    const double fm = robin_characteristic(mid, theta, length);
    if ((fm < 0.0) == fa_sign_negative) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double mu = 0.5 * (a + b);
  return mu * mu;
}

std::vector<double> robin_spectrum_fd(double theta, double length, int n_nodes, int n_modes) {
  if (n_nodes < 16 || n_modes < 1 || n_modes > n_nodes || !(theta > 0.0) || !(length > 0.0)) {
    throw Error(ErrorKind::UsageError, "robin_spectrum_fd: bad parameters");
  }
  const auto n = static_cast<std::size_t>(n_nodes);
  const double h = length / (n_nodes - 1);
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> diag(n, 2.0 * inv_h2);
  std::vector<double> off(n - 1, -inv_h2);
  // Halved end rows: ((1 + h theta) u0 - u1) / h^2 = kappa u0 / 2.
  diag.front() = diag.back() = (1.0 + h * theta) * inv_h2;
  // Symmetric scaling M^{-1/2} K M^{-1/2}: end rows carry mass 1/2.
  diag.front() *= 2.0;
  diag.back() *= 2.0;
  off.front() *= std::numbers::sqrt2;
  off.back() *= std::numbers::sqrt2;
  return tridiag::smallest_eigenvalues(diag, off, static_cast<std::size_t>(n_modes));
}

double dirichlet_bound(double length) {
  if (!(length > 0.0)) throw Error(ErrorKind::BadGeometry, "interval length must be positive");
  return pi * pi / (length * length);
}

HState robin_eigenfunction(double theta, double length, int n_nodes) {
  const double mu = std::sqrt(optimal_constant_1d(theta, length));
  const double h = length / (n_nodes - 1);
  std::vector<double> v(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    const double x = i * h;
    // theta/mu * sin(mu x) written as theta * x * sinc(mu x) to survive mu -> 0.
    v[static_cast<std::size_t>(i)] = std::cos(mu * x) + theta * x * sinc(mu * x);
  }
  return HState(std::move(v));
}

const char* to_string(TraceMethod m) noexcept {
  switch (m) {
    case TraceMethod::ExplicitOnly: return "explicit";
    case TraceMethod::Transcendental: return "transcendental";
    case TraceMethod::FiniteDifference: return "finite_difference";
  }
  return "unknown";
}

bool TraceConstantReport::sandwich_holds(double slack) const {
  if (!optimal_value) return explicit_value <= dirichlet_bound + slack;
  return explicit_value <= *optimal_value + slack && *optimal_value <= dirichlet_bound + slack;
}

TraceConstantReport trace_constant_report(double theta, const DomainGeometry& g,
                                          TraceMethod method, int fd_nodes) {
  TraceConstantReport r;
  r.theta = theta;
  r.explicit_value = explicit_constant(theta, g);
  const double length = g.interval_length();
  r.dirichlet_bound = dirichlet_bound(length);
  if (g.dimension != 1) {
    // Only the explicit constant exists beyond one dimension; the Dirichlet
    // column then refers to the interval of the same diameter.
    r.method = TraceMethod::ExplicitOnly;
    return r;
  }
  r.method = method;
  if (method == TraceMethod::Transcendental) {
    r.optimal_value = optimal_constant_1d(theta, length);
  } else if (method == TraceMethod::FiniteDifference) {
    r.optimal_value = theta == 0.0 ? 0.0 : robin_spectrum_fd(theta, length, fd_nodes, 1).front();
  }
  return r;
}

}  // namespace cistab
