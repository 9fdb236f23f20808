#include <cmath>
#include <vector>

#include "doctest.h"
#include "psd/kernel.hpp"
#include "psd/numeric.hpp"

using namespace psd;

namespace {

// theta(y) = P(|y - U| <= a), U a sum of k uniforms on [-b, b]: the
// Irwin-Hall distribution, exact.
long double irwin_hall_cdf(long double x, int k) {
  if (x <= 0.0L) return 0.0L;
  if (x >= k) return 1.0L;
  long double s = 0.0L, binom = 1.0L, fact = 1.0L;
  for (int i = 2; i <= k; ++i) fact *= i;
  for (int j = 0; j <= k && j < x; ++j) {
    s += ((j % 2) ? -1.0L : 1.0L) * binom * std::pow(x - j, static_cast<long double>(k));
    binom = binom * (k - j) / (j + 1);
  }
  return s / fact;
}

double theta_exact(double y, double eps, int k) {
  const long double a = 7.0L * eps / 8.0L;
  const long double b = static_cast<long double>(eps) / (8.0L * k);
  auto F = [&](long double t) { return irwin_hall_cdf((t + k * b) / (2.0L * b), k); };
  return static_cast<double>(F(y + a) - F(y - a));
}

// int theta(y) cos(2 pi x y) dy by Simpson on a fine grid of the exact theta.
double transform_by_quadrature(double x, double eps, int k) {
  const std::size_t n = 20000;
  const double h = 2.0 * eps / n;
  CompensatedSum s;
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = -eps + h * i;
    s.add(simpson_weight(i, n) * theta_exact(y, eps, k) * std::cos(kTwoPi * x * y));
  }
  return s.value() * h / 3.0;
}

}  // namespace

TEST_CASE("domain checks") {
  CHECK_THROWS_AS(make_kernel(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_kernel(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_kernel(1.0, 65), std::invalid_argument);
  CHECK_THROWS_AS(make_kernel(1.0, 3, 1000), std::invalid_argument);
}

TEST_CASE("k = 1 is the trapezoid") {
  const SmoothingKernel K = make_kernel(2.0, 1);
  CHECK(K.theta(0.0) == 1.0);
  CHECK(K.theta(1.5) == 1.0);
  CHECK(K.theta(1.75) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(K.theta(2.0) == 0.0);
  for (double y = 1.5; y <= 2.0; y += 0.01) {
    CHECK(K.theta(y) == doctest::Approx((2.0 - y) / 0.5).epsilon(1e-9));
  }
}

TEST_CASE("plateau and support are exact") {
  for (int k : {1, 2, 3, 7, 20, 64}) {
    for (double eps : {1e-3, 1.0, 10.0}) {
      const SmoothingKernel K = make_kernel(eps, k);
      CHECK(K.theta(0.0) == 1.0);
      CHECK(K.theta(eps) == 0.0);
      CHECK(K.theta(-eps) == 0.0);
      CHECK(K.theta(2.0 * eps) == 0.0);
      for (std::size_t i = 0; i < K.grid().size(); ++i) {
        const double y = K.node(i);
        if (std::abs(y) <= 0.75 * eps) CHECK(K.grid()[i] == 1.0);
        if (std::abs(y) >= eps) CHECK(K.grid()[i] == 0.0);
        CHECK(K.grid()[i] >= 0.0);
        CHECK(K.grid()[i] <= 1.0);
      }
      const double inside = K.theta(0.875 * eps);
      CHECK(inside > 0.0);
      CHECK(inside < 1.0);
    }
  }
}

TEST_CASE("mesh matches the Irwin-Hall closed form") {
  // Second order in the mesh step: 4x the points gives about 16x less error.
  auto worst_error = [](int k, std::size_t mesh) {
    const SmoothingKernel K = make_kernel(1.0, k, mesh);
    double worst = 0.0;
    for (double y = 0.7; y <= 1.0; y += 1e-4) {
      worst = std::max(worst, std::abs(K.theta(y) - theta_exact(y, 1.0, k)));
    }
    return worst;
  };
  for (int k : {1, 2, 3, 5, 8, 16}) {
    const double coarse = worst_error(k, kDefaultKernelMesh);
    const double fine = worst_error(k, 4 * kDefaultKernelMesh);
    CAPTURE(k);
    if (k <= 3) CHECK(coarse < 1e-6);
    CHECK(fine < 1e-6);
    if (k > 1) CHECK(coarse / fine > 12.0);
  }
  const SmoothingKernel K3 = make_kernel(1.0, 3);
  CHECK(K3.theta(0.8) > 0.0);
  CHECK(K3.theta(0.8) < 1.0);
  CHECK(K3.theta(0.8) == doctest::Approx(theta_exact(0.8, 1.0, 3)).epsilon(1e-6));
  const SmoothingKernel K2 = make_kernel(1.0, 2);
  CHECK(std::abs(K2.theta(0.9) - theta_exact(0.9, 1.0, 2)) < 1e-6);
}

TEST_CASE("mass and antiderivatives") {
  for (int k : {1, 4, 11}) {
    const double eps = 0.3;
    const SmoothingKernel K = make_kernel(eps, k);
    CHECK(K.mass() == doctest::Approx(1.75 * eps).epsilon(1e-6));
    CHECK(K.antiderivative(eps) == doctest::Approx(1.75 * eps).epsilon(1e-6));
    CHECK(K.antiderivative(0.0) == doctest::Approx(0.875 * eps).epsilon(1e-9));
    CHECK(K.antiderivative(-eps) == 0.0);
    // Beyond the support the antiderivatives continue as polynomials.
    const double m = K.mass();
    CHECK(K.antiderivative(3.0 * eps) == doctest::Approx(m));
    // int_{-eps}^{u} (u - s) theta(s) ds with theta even: at u = eps this is eps * m.
    CHECK(K.second_antiderivative(eps) == doctest::Approx(eps * m).epsilon(1e-9));
    CHECK(K.second_antiderivative(2.0 * eps) == doctest::Approx(2.0 * eps * m).epsilon(1e-9));
    // int (u-s)^2/2 theta(s) ds at u = eps: eps^2 m / 2 + (1/2) int s^2 theta.
    CompensatedSum s2;
    const std::size_t n = 200000;
    const double h = 2.0 * eps / n;
    for (std::size_t i = 0; i <= n; ++i) {
      const double y = -eps + h * i;
      s2.add(simpson_weight(i, n) * y * y * K.theta(y));
    }
    const double second_moment = s2.value() * h / 3.0;
    CHECK(K.third_antiderivative(eps) ==
          doctest::Approx(0.5 * eps * eps * m + 0.5 * second_moment).epsilon(1e-6));
    // Numerical derivative of each level gives the previous one.
    for (double u : {-0.9 * eps, -0.2 * eps, 0.5 * eps, 0.95 * eps}) {
      const double d = 1e-6 * eps;
      CHECK((K.antiderivative(u + d) - K.antiderivative(u - d)) / (2 * d) ==
            doctest::Approx(K.theta(u)).epsilon(1e-5));
      CHECK((K.second_antiderivative(u + d) - K.second_antiderivative(u - d)) / (2 * d) ==
            doctest::Approx(K.antiderivative(u)).epsilon(1e-6));
      CHECK((K.third_antiderivative(u + d) - K.third_antiderivative(u - d)) / (2 * d) ==
            doctest::Approx(K.second_antiderivative(u)).epsilon(1e-6));
    }
  }
}

TEST_CASE("closed-form transform") {
  for (double eps : {0.5, 1.0, 4.0}) {
    const SmoothingKernel K = make_kernel(eps, 4);
    CHECK(K.transform(0.0) == doctest::Approx(1.75 * eps).epsilon(1e-15));
    CHECK(K.transform(1e-12) == doctest::Approx(1.75 * eps).epsilon(1e-9));
    CHECK(std::abs(K.transform(1.0 / (2.0 * K.a()))) < 1e-12);
    CHECK(K.transform(-0.37 / eps) == K.transform(0.37 / eps));
  }
  for (int k : {1, 2, 5}) {
    const double eps = 1.0;
    const SmoothingKernel K = make_kernel(eps, k);
    for (double x = -10.0; x <= 10.0; x += 0.37) {
      CAPTURE(x);
      CHECK(std::abs(K.transform(x) - transform_by_quadrature(x, eps, k)) <= 1e-4 * eps);
    }
  }
}

TEST_CASE("bound branches") {
  const SmoothingKernel K = make_kernel(1.0, 1);
  CHECK(K.transform_bound(0.0) == 1.75);
  CHECK(K.transform_bound_branch(0.0) == 1);
  // At x = 1: 1/pi against (1/pi)(1/(pi/4)) = 4/pi^2.
  CHECK(K.transform_bound(1.0) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(K.transform_bound_branch(1.0) == 2);
  const SmoothingKernel K5 = make_kernel(1.0, 5);
  CHECK(K5.transform_bound_branch(1e-3) == 1);
  CHECK(K5.transform_bound_branch(1e3) == 3);
  // Decay like x^{-k-1} on the third branch.
  const double r = K5.transform_bound(2e3) / K5.transform_bound(1e3);
  CHECK(r == doctest::Approx(std::pow(0.5, 6)).epsilon(1e-12));
  const SmoothingKernel K64 = make_kernel(1e-3, 64);
  for (double x : log_grid(1e-3 / 1e-3, 1e6, 50)) {
    CHECK(std::isfinite(K64.transform_bound(x)));
    CHECK(std::isfinite(K64.transform(x)));
  }
}

TEST_CASE("bound holds on log grids and at sine zeros") {
  for (double eps : {1e-3, 1.0, 10.0}) {
    const auto grid = log_grid(1e-3 / eps, 1e3 / eps, 10000);
    for (int k = 1; k <= 20; ++k) {
      const SmoothingKernel K = make_kernel(eps, k);
      const BoundReport r = verify_bounds(K, grid);
      CHECK(r.points == 10000);
      CHECK(r.violations == 0);
      CHECK(r.max_ratio <= 1.0 + 1e-12);
      std::vector<double> zeros;
      for (int j = 1; j < 50; ++j) zeros.push_back(j / (2.0 * K.a()));
      CHECK(verify_bounds(K, zeros).violations == 0);
    }
  }
}

TEST_CASE("Fourier inversion") {
  // At T = 50 k / eps the error is below 1e-3 once k >= 2. For k = 1 it is
  // dominated by the truncated tail at the kink y = a - b, where it equals
  // 1/(4 pi^2 b T) to leading order.
  const double eps = 1.0;
  for (int k = 1; k <= 6; ++k) {
    const SmoothingKernel K = make_kernel(eps, k);
    const double T = 50.0 * k / eps;
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double y = -1.2 * eps + 2.4 * eps * i / 60.0;
      worst = std::max(worst, std::abs(inverse_transform(K, y, T) - K.theta(y)));
    }
    const double kink = std::abs(inverse_transform(K, K.a() - K.b(), T) - K.theta(K.a() - K.b()));
    worst = std::max(worst, kink);
    CAPTURE(k);
    if (k == 1) {
      CHECK(kink == doctest::Approx(1.0 / (4.0 * kPi * kPi * K.b() * T)).epsilon(0.02));
      CHECK(worst > 1e-3);
    } else {
      CHECK(worst <= 1e-3);
    }
    // The bound-driven cutoff brings every order under 1e-3.
    const double Tc = inversion_cutoff(K);
    CHECK(Tc >= T);
    CHECK(std::abs(inverse_transform(K, K.a() - K.b(), Tc) - K.theta(K.a() - K.b())) <= 1e-3);
  }
}

TEST_CASE("log_grid") {
  const auto g = log_grid(1e-3, 1e3, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1e3));
  CHECK(g[3] == doctest::Approx(1.0));
}
