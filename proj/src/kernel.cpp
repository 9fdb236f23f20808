#include "psd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "psd/numeric.hpp"

namespace psd {

SmoothingKernel make_kernel(double epsilon, int k, std::size_t mesh_points) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("make_kernel: epsilon must be positive");
  }
  if (k < 1 || k > 64) throw std::invalid_argument("make_kernel: k outside [1, 64]");
  if (mesh_points < 1024) throw std::invalid_argument("make_kernel: mesh_points < 1024");

  const std::size_t unit = 16 * static_cast<std::size_t>(k);
  const std::size_t n = (mesh_points - 1 + unit - 1) / unit * unit;
  const std::size_t m = n / unit;  // b in mesh steps
  const std::size_t c = n / 2;     // index of y = 0
  const auto km = static_cast<std::size_t>(k) * m;

  SmoothingKernel K;
  K.epsilon_ = epsilon;
  K.k_ = k;
  K.a_ = 7.0 * epsilon / 8.0;
  K.b_ = epsilon / (8.0 * k);
  K.h_ = 2.0 * epsilon / static_cast<double>(n);

  // First factor in closed form: the trapezoid 1_{[-a,a]} * U_b, with a = 7kb.
  std::vector<double> g(n + 1);
  const double rise = static_cast<double>((7 * k + 1) * m);
  for (std::size_t i = 0; i <= n; ++i) {
    const double d = std::abs(static_cast<double>(i) - static_cast<double>(c));
    g[i] = std::clamp((rise - d) / (2.0 * static_cast<double>(m)), 0.0, 1.0);
  }

  // Remaining k-1 factors: moving trapezoid average over [-b, b].
  std::vector<double> cells(n + 2, 0.0);
  std::vector<double> next(n + 1);
  for (int step = 1; step < k; ++step) {
    cells[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cells[i + 1] = cells[i] + 0.5 * (g[i] + g[i + 1]);
    const auto prefix = [&](std::ptrdiff_t i) {
      if (i <= 0) return 0.0;
      if (i >= static_cast<std::ptrdiff_t>(n)) return cells[n];
      return cells[static_cast<std::size_t>(i)];
    };
    for (std::size_t i = 0; i <= n; ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const auto mm = static_cast<std::ptrdiff_t>(m);
      next[i] = (prefix(ii + mm) - prefix(ii - mm)) / (2.0 * static_cast<double>(m));
    }
    g.swap(next);
  }

  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t d = i > c ? i - c : c - i;
    if (d <= 6 * km) {
      g[i] = 1.0;
    } else if (d >= 8 * km) {
      g[i] = 0.0;
    } else {
      g[i] = std::clamp(g[i], 0.0, 1.0);
    }
  }
  for (std::size_t i = 0; i < c; ++i) {
    const double avg = 0.5 * (g[i] + g[n - i]);
    g[i] = avg;
    g[n - i] = avg;
  }

  K.theta_ = std::move(g);
  K.cum1_.assign(n + 1, 0.0);
  K.cum2_.assign(n + 1, 0.0);
  K.cum3_.assign(n + 1, 0.0);
  const double h = K.h_;
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = K.theta_[i];
    const double t1 = K.theta_[i + 1];
    K.cum1_[i + 1] = K.cum1_[i] + 0.5 * h * (t0 + t1);
    K.cum2_[i + 1] = K.cum2_[i] + K.cum1_[i] * h + h * h * (2.0 * t0 + t1) / 6.0;
    K.cum3_[i + 1] = K.cum3_[i] + K.cum2_[i] * h + K.cum1_[i] * h * h / 2.0 +
                     h * h * h * (3.0 * t0 + t1) / 24.0;
  }
  return K;
}

double SmoothingKernel::node(std::size_t i) const {
  return -epsilon_ + static_cast<double>(i) * h_;
}

double SmoothingKernel::theta(double y) const {
  const double u = std::abs(y);
  if (u <= 0.75 * epsilon_) return 1.0;
  if (u >= epsilon_) return 0.0;
  const double pos = (u + epsilon_) / h_;
  const auto i = std::min(static_cast<std::size_t>(pos), theta_.size() - 2);
  const double s = pos - static_cast<double>(i);
  return theta_[i] + s * (theta_[i + 1] - theta_[i]);
}

double SmoothingKernel::transform(double x) const {
  if (x == 0.0) return 2.0 * a_;
  const double head = sin_2pi(a_ * x) / (kPi * x);
  const double sinc = sin_2pi(b_ * x) / (kTwoPi * b_ * x);
  if (sinc == 0.0 || head == 0.0) return 0.0;
  const double sign = (sinc < 0.0 && (k_ % 2 == 1)) ? -1.0 : 1.0;
  return head * sign * std::exp(k_ * std::log(std::abs(sinc)));
}

namespace {

struct BranchLogs {
  double l1, l2, l3;
};

BranchLogs branch_logs(double epsilon, int k, double x) {
  const double ax = std::abs(x);
  const double l1 = std::log(7.0 * epsilon / 4.0);
  const double l2 = -std::log(kPi * ax);
  const double l3 = l2 + k * std::log(k / (kTwoPi * ax * epsilon / 8.0));
  return {l1, l2, l3};
}

}  // namespace

double SmoothingKernel::transform_bound(double x) const {
  if (x == 0.0) return 7.0 * epsilon_ / 4.0;
  const BranchLogs b = branch_logs(epsilon_, k_, x);
  return std::exp(std::min({b.l1, b.l2, b.l3}));
}

int SmoothingKernel::transform_bound_branch(double x) const {
  if (x == 0.0) return 1;
  const BranchLogs b = branch_logs(epsilon_, k_, x);
  if (b.l1 <= b.l2 && b.l1 <= b.l3) return 1;
  return b.l2 <= b.l3 ? 2 : 3;
}

double SmoothingKernel::mass() const { return cum1_.back(); }

double SmoothingKernel::antiderivative(double u) const {
  if (u <= -epsilon_) return 0.0;
  if (u >= epsilon_) return cum1_.back();
  const double pos = (u + epsilon_) / h_;
  const auto i = std::min(static_cast<std::size_t>(pos), theta_.size() - 2);
  const double s = u - node(i);
  const double t0 = theta_[i];
  const double dt = theta_[i + 1] - t0;
  return cum1_[i] + t0 * s + dt * s * s / (2.0 * h_);
}

double SmoothingKernel::second_antiderivative(double u) const {
  if (u <= -epsilon_) return 0.0;
  if (u >= epsilon_) return cum2_.back() + cum1_.back() * (u - epsilon_);
  const double pos = (u + epsilon_) / h_;
  const auto i = std::min(static_cast<std::size_t>(pos), theta_.size() - 2);
  const double s = u - node(i);
  const double t0 = theta_[i];
  const double dt = theta_[i + 1] - t0;
  return cum2_[i] + cum1_[i] * s + t0 * s * s / 2.0 + dt * s * s * s / (6.0 * h_);
}

double SmoothingKernel::third_antiderivative(double u) const {
  if (u <= -epsilon_) return 0.0;
  if (u >= epsilon_) {
    const double d = u - epsilon_;
    return cum3_.back() + cum2_.back() * d + cum1_.back() * d * d / 2.0;
  }
  const double pos = (u + epsilon_) / h_;
  const auto i = std::min(static_cast<std::size_t>(pos), theta_.size() - 2);
  const double s = u - node(i);
  const double t0 = theta_[i];
  const double dt = theta_[i + 1] - t0;
  return cum3_[i] + cum2_[i] * s + cum1_[i] * s * s / 2.0 + t0 * s * s * s / 6.0 +
         dt * s * s * s * s / (24.0 * h_);
}

BoundReport verify_bounds(const SmoothingKernel& kernel, std::span<const double> x_grid,
                          double rel_slack) {
  BoundReport r;
  r.points = x_grid.size();
  r.min_slack = INFINITY;
  for (double x : x_grid) {
    const double value = std::abs(kernel.transform(x));
    const double bound = kernel.transform_bound(x);
    const double ratio = value / bound;
    if (value > bound * (1.0 + rel_slack)) ++r.violations;
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.worst_x = x;
    }
    r.min_slack = std::min(r.min_slack, bound - value);
  }
  return r;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double l0 = std::log(lo);
  const double step = (std::log(hi) - l0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(l0 + step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

double inverse_transform(const SmoothingKernel& kernel, double y, double T) {
  const double f = kernel.epsilon() + std::abs(y);
  auto n = static_cast<std::size_t>(std::ceil(16.0 * T * f));
  n = std::max<std::size_t>(n + (n % 2), 64);
  const double h = T / static_cast<double>(n);
  CompensatedSum acc;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = h * static_cast<double>(i);
    const double c = unit_phase(x * y).real();
    acc.add(simpson_weight(i, n) * kernel.transform(x) * c);
  }
  return 2.0 * acc.value() * h / 3.0;
}

double inversion_cutoff(const SmoothingKernel& kernel, double tail) {
  if (!(tail > 0.0)) throw std::invalid_argument("inversion_cutoff: tail must be positive");
  const double k = kernel.k();
  const double eps = kernel.epsilon();
  const double tb = 4.0 * k / (kPi * eps) * std::exp(std::log(2.0 / (kPi * k * tail)) / k);
  return std::max(50.0 * k / eps, tb);
}

}  // namespace psd
