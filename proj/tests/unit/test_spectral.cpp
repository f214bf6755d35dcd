#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cistab/spectral.hpp"

using namespace cistab;

namespace {

// Roots of the characteristic determinant for b = 0.021, from an mpmath scan
// (step 1e-3) with 30-digit bisection.
constexpr double kRoots[] = {0.11829857212920932, 1.3133536021232473, 3.6738883538251791,
                             6.5847576938839046,  9.6317301776498994, 12.723260807413763};

// mu_1^2 at small b, same oracle.
struct Frozen {
  double b;
  double mu1_sq;
};
constexpr Frozen kMu1Sq[] = {
    {1e-4, 6.6666543209510745e-5}, {3e-4, 1.9999888887901234e-4},
    {1e-3, 6.6665432062185594e-4}, {3e-3, 1.9998888790123066e-3},
    {1e-2, 6.6654317329627607e-3}, {0.27, 0.17909279835587529},
};

}  // namespace

TEST_CASE("first six roots for b = 0.021") {
  const auto modes = mu_roots(0.021, 6);
  REQUIRE(modes.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(modes[i].index == static_cast<int>(i) + 1);
    CHECK(std::abs(modes[i].mu - kRoots[i]) < 1e-10);
    CHECK(modes[i].branch == ModeBranch::TanBranch);
  }
}

TEST_CASE("root spacing tends to pi") {
  const auto modes = mu_roots(0.021, 12);
  double prev_gap = 1e9;
  for (std::size_t i = 2; i < modes.size(); ++i) {
    const double gap = std::abs(modes[i].mu - modes[i - 1].mu - std::numbers::pi);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.01);
}

TEST_CASE("characteristic residual near and away from the first root") {
  CHECK(std::abs(characteristic_residual(0.118, 0.021)) < 1e-4);
  CHECK(characteristic_residual(std::numbers::pi / 4, 0.021) < -0.5);
}

TEST_CASE("mu_1^2 against the oracle and the instability margin") {
  for (const auto& f : kMu1Sq) {
    const double mu = mu_roots(f.b, 1).front().mu;
    CHECK(std::abs(mu * mu - f.mu1_sq) < 1e-12 * (1.0 + f.mu1_sq) + 1e-16);
  }
  const auto r = instability_predicate({0.02, 0.001, 0.0});
  CHECK(r.unstable);
  CHECK(std::abs(r.mu1_squared - 0.01399455216780974) < 1e-12);
  CHECK(std::abs(r.margin - (0.02 - 0.01399455216780974)) < 1e-12);
  CHECK_FALSE(instability_predicate({0.001, 0.02, 0.0}).unstable);
}

TEST_CASE("two-term expansion of mu_1^2") {
  CHECK(mu1_squared_asymptotic(0.021) == doctest::Approx(0.014 - 0.021 * 0.021 / 27.0).epsilon(1e-15));
  CHECK(std::abs(mu1_squared_asymptotic(0.021) - 0.0139837) < 1e-7);
  CHECK(std::abs(mu1_squared_asymptotic(0.27) - 0.1773) < 1e-4);
  // Linear slope 2/3 at the origin.
  CHECK(mu1_squared_asymptotic(1e-9) / 1e-9 == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  // The gap to the true root grows with b.
  CHECK(std::abs(0.17909279835587529 - mu1_squared_asymptotic(0.27)) >
        std::abs(6.6654317329627607e-3 - mu1_squared_asymptotic(1e-2)));
}

TEST_CASE("the true second-order coefficient is -1/81") {
  // mu^2 = 2b/3 - b^2/81 + O(b^3), so subtracting the b^2/81 term leaves a
  // cubic remainder while the -b^2/27 form leaves a quadratic one.
  for (const auto& f : kMu1Sq) {
    if (f.b > 0.011) continue;
    const double mu = mu_roots(f.b, 1).front().mu;
    const double rem81 = std::abs(mu * mu - (2.0 / 3.0 * f.b - f.b * f.b / 81.0));
    const double rem27 = std::abs(mu * mu - mu1_squared_asymptotic(f.b));
    CHECK(rem81 < f.b * f.b * f.b);
    CHECK(rem27 / (f.b * f.b) == doctest::Approx(2.0 / 81.0).epsilon(2e-2));
  }
}

TEST_CASE("eigenfunctions satisfy both dynamical boundary conditions") {
  for (double b : {0.021, 1.0, 7.5}) {
    for (const auto& m : mu_roots(b, 10)) {
      CHECK(left_boundary_residual(m, b) < 1e-8);
      CHECK(right_boundary_residual(m, b) < 1e-8);
      CHECK(m.coeff_sin == doctest::Approx((b - m.mu * m.mu) / m.mu));
    }
  }
}

TEST_CASE("modes are orthogonal in the discrete H inner product") {
  const int n = 8001;
  const double h = 1.0 / (n - 1);
  const auto modes = mu_roots(0.021, 6);
  std::vector<HState> s;
  for (const auto& m : modes) s.push_back(sample_mode(m, n));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double c = h_inner(s[i], s[j], h) / std::sqrt(h_norm_sq(s[i], h) * h_norm_sq(s[j], h));
      CHECK(std::abs(c) < 1e-6);
    }
  }
}

TEST_CASE("cos(mu) = 0 branch appears exactly when b sits on it") {
  const double half_pi = 0.5 * std::numbers::pi;
  const double b = -0.25 + (0.5 + half_pi) * (0.5 + half_pi);
  const auto modes = mu_roots(b, 6);
  int hits = 0;
  for (const auto& m : modes) {
    if (std::abs(m.mu - half_pi) < 1e-9) {
      ++hits;
      CHECK(m.branch == ModeBranch::CosZeroBranch);
      CHECK(left_boundary_residual(m, b) < 1e-8);
      CHECK(right_boundary_residual(m, b) < 1e-8);
    }
  }
  CHECK(hits == 1);
  for (std::size_t i = 0; i + 1 < modes.size(); ++i) CHECK(modes[i].mu < modes[i + 1].mu);
  for (const auto& m : mu_roots(0.021, 6)) CHECK(m.branch == ModeBranch::TanBranch);
}

TEST_CASE("no separated solutions grow in the shifted problem") {
  // phi'' = s^2 phi with phi(0) = 1 forces phi'(0) = s^2 + b, and then the
  // right boundary expression is a sum of positive terms.
  for (double b : {1e-3, 0.021, 1.0}) {
    for (int k = 1; k <= 200; ++k) {
      const double s = 0.05 * k;
      const double c = (s * s + b) / s;
      const double phi1 = std::cosh(s) + c * std::sinh(s);
      const double dphi1 = s * (std::sinh(s) + c * std::cosh(s));
      CHECK((s * s + b) * phi1 + dphi1 > 0.0);
    }
  }
}

TEST_CASE("series solution for eigenmode data") {
  const ModelParams p{0.02, 0.001, 0.0};
  const auto modes = spectral_modes(p, 8);
  const auto u0 = sample_mode(modes[0], 4001);
  const SeriesSolution sol(u0, modes, p);
  CHECK(sol.coefficients()[0] == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t i = 1; i < sol.coefficients().size(); ++i) CHECK(std::abs(sol.coefficients()[i]) < 1e-6);
  const double growth = std::exp(100.0 * (0.02 - 0.01399455216780974));
  CHECK(std::abs(growth - std::exp(0.600545)) < 1e-5);
  for (double x : {0.0, 0.3, 1.0}) {
    CHECK(sol(x, 100.0) == doctest::Approx(growth * modes[0].eigenfunction(x)).epsilon(1e-6));
  }
  CHECK(series_solution(u0, modes, p, 0.3, 100.0) == doctest::Approx(sol(0.3, 100.0)));
}

TEST_CASE("series reconstruction at t = 0 improves with more modes") {
  const ModelParams p{0.02, 0.001, 0.0};
  const int n = 4001;
  const double h = 1.0 / (n - 1);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + std::pow(i * h, 2);
  const HState u0(v);
  double prev = 1e9;
  for (int m : {4, 16, 64}) {
    const SeriesSolution sol(u0, spectral_modes(p, m), p);
    HState diff = sol.sample(n, 0.0);
    for (int i = 0; i < n; ++i) diff[i] -= u0[i];
    const double err = std::sqrt(h_norm_sq(diff, h) / h_norm_sq(u0, h));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}
