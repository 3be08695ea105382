#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace centroaffine {

/// Quadrature and collocation grid on the unit circle (dim 2) or unit sphere (dim 3).
///
/// dim 2: uniform angles theta_k = 2 pi k / N, weight 2 pi / N each; N even, N >= 4.
/// dim 3: Gauss-Legendre nodes in cos(theta) crossed with uniform azimuth phi;
///        both resolution components >= 8, azimuth count even.  No node sits at a pole.
///
/// Copies share the underlying immutable data.
class Grid {
 public:
  static Grid circle(int n_nodes);
  static Grid sphere(int n_polar, int n_azimuth);
  /// resolution = {N} for dim 2, {n_polar, n_azimuth} for dim 3.
  static Grid build(int dim, const std::vector<int>& resolution);

  int dim() const;
  std::size_t node_count() const;
  int n_theta() const;  ///< circle node count (dim 2) or polar count (dim 3)
  int n_phi() const;    ///< azimuth count (dim 3), 0 for dim 2

  const std::vector<Eigen::Vector3d>& nodes() const;
  const std::vector<double>& weights() const;

  double theta(std::size_t i) const;  ///< circle angle (dim 2) or polar angle (dim 3)
  double phi(std::size_t i) const;    ///< azimuth (dim 3)

  /// Orthonormal tangent frame at node i.  dim 2: frame1 = (-sin, cos, 0), frame2 = 0.
  /// dim 3: frame1 = e_theta, frame2 = e_phi.
  Eigen::Vector3d frame1(std::size_t i) const;
  Eigen::Vector3d frame2(std::size_t i) const;

  std::vector<int> resolution() const;
  std::string resolution_label() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  explicit Grid(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Sum of w_i * v_i with compensated summation.  Rejects size mismatch and
/// non-finite entries.
double integrate(const Grid& grid, std::span<const double> values);

/// First and second covariant derivatives of a node-sampled function, in the
/// per-node orthonormal frame.
///
/// dim 2: grad[i][0] = f'(theta_i), hess[i][0] = f''(theta_i); other entries zero.
/// dim 3: grad = (f_theta, f_phi / sin theta),
///        hess = (H11, H12, H22) with
///        H11 = f_theta_theta,
///        H12 = (f_theta_phi - cot(theta) f_phi) / sin(theta),
///        H22 = f_phi_phi / sin^2(theta) + cot(theta) f_theta.
struct SphereDerivatives {
  std::vector<Eigen::Vector2d> grad;
  std::vector<Eigen::Vector3d> hess;
};

/// Spectral differentiation: dense trigonometric matrices along periodic
/// directions, barycentric polynomial differentiation in cos(theta) for the
/// polar direction with odd/even azimuth-parity handling.  Exact on
/// band-limited inputs sampled below the grid Nyquist.
SphereDerivatives differentiate(const Grid& grid, std::span<const double> values);

/// First partial along theta (polar angle), mostly for symmetry cross-checks.
std::vector<double> d_theta(const Grid& grid, std::span<const double> values);
/// First partial along phi (azimuth); dim 3 only.
std::vector<double> d_phi(const Grid& grid, std::span<const double> values);

}  // namespace centroaffine
