#pragma once

#include "centroaffine/sphere.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace centroaffine {

/// A body failed a positivity / positive-definiteness / consistency check.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family {
  ellipsoid,
  fourier2d,
  sphharm3d,
  linear_image,
  translate,
  polar_numeric,
  polygonal2d,
};

/// Value, gradient and Hessian of the 1-homogeneous support extension
/// H(v) = |v| h(v / |v|) at some v != 0.  Bodies in the plane use the z = 0
/// slice; third rows and columns are zero.
struct AmbientJet {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
};

struct FourierTerm {
  int degree = 0;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// Real normalized spherical harmonic coefficient: m > 0 selects the cosine
/// harmonic, m < 0 the sine harmonic of order |m|, m = 0 the zonal one.
struct SphHarmTerm {
  int l = 0;
  int m = 0;
  double coef = 0.0;
};

/// Convex body with support-function evaluator.  Smooth families are validated
/// at construction (h > 0 and Hess h + h I positive definite on a fixed
/// validation grid); linear images and translates of valid bodies stay valid
/// by congruence and are only sanity-checked.
class Body {
 public:
  static Body ellipsoid(const std::vector<double>& semi_axes);
  static Body fourier(double c0, const std::vector<FourierTerm>& terms);
  static Body sphharm(double c0, const std::vector<SphHarmTerm>& terms);
  /// Polygon given by its vertices in counter-clockwise order (origin inside).
  static Body polygon(const std::vector<Eigen::Vector2d>& vertices);
  /// Numerical polar of a smooth body: support values solve the dual
  /// maximization max_u (u . v) / h(u) by coarse scan plus local ascent.
  /// The scan grid seeds the coarse argmax (capped internally for speed).
  static Body polar(const Body& base, const Grid& scan);

  /// Image under an invertible n x n matrix (h_{AK}(v) = h_K(A^T v)).
  Body linear_image(const Eigen::MatrixXd& a) const;
  Body translated(const Eigen::VectorXd& t) const;

  int dim() const;
  Family family() const;
  bool smooth() const;        ///< false for polygonal bodies
  bool analytic_jet() const;  ///< family chain supplies closed-form derivatives
  bool centered_ellipsoid() const;
  std::string label() const;

  /// Support value of the 1-homogeneous extension at any v != 0.
  double support(const Eigen::Vector3d& v) const;
  /// Closed-form jet; requires analytic_jet().
  AmbientJet jet(const Eigen::Vector3d& v) const;
  /// Vertices when this is a polygonal body, else nullptr.
  const std::vector<Eigen::Vector2d>* polygon_vertices() const;

  struct Node;
  const Node& node() const { return *node_; }
  explicit Body(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const Node> node_;
};

/// Fixed grid used for construction-time validation: 512 nodes in the plane,
/// 96 x 192 on the sphere.
const Grid& validation_grid(int dim);

enum class DerivativePath { automatic, analytic, spectral };

/// Per-node support data of a body on a grid.
///
/// derivs holds the covariant derivatives of h; curvature_fn is
/// f_K = det(Hess h + h I), gauss = 1 / f_K, k0 = gauss / h^{n+1}, and
/// cone_density = h f_K (the density of n * volume).
struct FieldTable {
  Grid grid;
  int dim = 0;
  std::string body_label;
  DerivativePath path = DerivativePath::automatic;
  std::vector<double> h;
  SphereDerivatives derivs;
  std::vector<double> curvature_fn;
  std::vector<double> gauss;
  std::vector<double> k0;
  std::vector<double> cone_density;
};

/// Evaluate support fields on a grid.  Uses the closed-form jet when the
/// family provides one (or when forced), else spectral differentiation of the
/// node samples.  Throws ValidationError with a located node when positivity
/// or positive definiteness fails.
FieldTable evaluate_fields(const Body& body, const Grid& grid,
                           DerivativePath path = DerivativePath::automatic);

/// (min, max) of the centro-affine curvature K0 over the grid, each refined by
/// one local quadratic fit around the extremal node.
std::pair<double, double> curvature_extrema(const FieldTable& fields);

}  // namespace centroaffine
