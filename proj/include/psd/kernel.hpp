#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psd {

// theta = 1_{[-a,a]} * U_b * ... * U_b (k factors), U_b the normalized
// indicator of [-b,b], with a = 7 eps/8 and b = eps/(8k). Then theta = 1 on
// |y| <= 3 eps/4, theta = 0 on |y| >= eps, and
//   Theta(x) = sin(2 pi a x)/(pi x) * (sin(2 pi b x)/(2 pi b x))^k.
class SmoothingKernel {
 public:
  double epsilon() const { return epsilon_; }
  int k() const { return k_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double mesh_step() const { return h_; }
  std::span<const double> grid() const { return theta_; }
  // Mesh abscissa of grid()[i].
  double node(std::size_t i) const;

  // Linear interpolation of the mesh; exactly 1 on the plateau and 0 off the
  // support.
  double theta(double y) const;
  // Closed-form Fourier transform.
  double transform(double x) const;
  // min(7 eps/4, 1/(pi|x|), (1/(pi|x|)) (k/(2 pi |x| eps/8))^k), in log space.
  double transform_bound(double x) const;
  // Index (1, 2, 3) of the branch attaining the minimum.
  int transform_bound_branch(double x) const;

  // Trapezoid integral of the mesh (should be 7 eps/4).
  double mass() const;
  // int_{-eps}^{u} theta and int_{-eps}^{u} int_{-eps}^{s} theta, exact for
  // the piecewise-linear interpolant.
  double antiderivative(double u) const;
  double second_antiderivative(double u) const;
  // Third iterated integral from -eps, same interpolant.
  double third_antiderivative(double u) const;

  friend SmoothingKernel make_kernel(double epsilon, int k, std::size_t mesh_points);

 private:
  SmoothingKernel() = default;

  double epsilon_ = 0.0;
  int k_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
  double h_ = 0.0;
  std::vector<double> theta_;
  std::vector<double> cum1_;
  std::vector<double> cum2_;
  std::vector<double> cum3_;
};

inline constexpr std::size_t kDefaultKernelMesh = std::size_t{1} << 14;

// Builds theta by iterated convolution on a uniform mesh over [-eps, eps].
// The interval count is rounded up to a multiple of 16k so that b, a and the
// plateau edge fall on mesh nodes. Throws std::invalid_argument for eps <= 0,
// k outside [1, 64] or mesh_points < 1024.
SmoothingKernel make_kernel(double epsilon, int k,
                            std::size_t mesh_points = kDefaultKernelMesh);

struct BoundReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  // max |Theta| / bound over the grid (<= 1 means no violation).
  double max_ratio = 0.0;
  double worst_x = 0.0;
  // min (bound - |Theta|).
  double min_slack = 0.0;
};

// |Theta(x)| <= bound(x) (1 + rel_slack) at every grid point.
BoundReport verify_bounds(const SmoothingKernel& kernel, std::span<const double> x_grid,
                          double rel_slack = 1e-12);

// n log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

// int_{-T}^{T} Theta(x) e(xy) dx by composite Simpson, resolving the
// oscillation of both Theta and e(xy).
double inverse_transform(const SmoothingKernel& kernel, double y, double T);

// Truncation point for inverse_transform: max(50 k/eps, T_b), where T_b is
// where the bound's tail 2 int_{T_b}^inf (1/(pi x)) (4k/(pi eps x))^k dx
// equals `tail`. For k = 1 the truncation error near the kink at 3 eps/4 is
// 1/(4 pi^2 b T), so 50/eps alone leaves about 4e-3.
double inversion_cutoff(const SmoothingKernel& kernel, double tail = 5e-4);

}  // namespace psd
