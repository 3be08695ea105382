#include "centroaffine/geometry.hpp"

#include "centroaffine/detail/sphere_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace centroaffine {

namespace {

constexpr double kPi = std::numbers::pi;

using Eigen::Vector2d;
using Eigen::Vector3d;

std::vector<double> product(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void require_size(const Grid& grid, std::span<const double> f, const char* who) {
  if (f.size() != grid.node_count()) {
    throw std::invalid_argument(std::string(who) + ": values/grid size mismatch");
  }
}

}  // namespace

double volume(const FieldTable& fields) {
  return integrate(fields.grid, fields.cone_density) / fields.dim;
}

double polar_volume(const FieldTable& fields) {
  return integrate(fields.grid, product(fields.k0, fields.cone_density)) / fields.dim;
}

double surface_area(const FieldTable& fields) {
  return integrate(fields.grid, fields.curvature_fn);
}

std::vector<double> mixed_curvature(const Grid& grid, std::span<const double> f) {
  if (grid.dim() != 2) {
    throw std::invalid_argument("mixed_curvature: one function is the planar form");
  }
  require_size(grid, f, "mixed_curvature");
  const SphereDerivatives d = differentiate(grid, f);
  std::vector<double> s(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s[i] = d.hess[i][0] + f[i];
  return s;
}

std::vector<double> mixed_curvature(const Grid& grid, std::span<const double> f,
                                    std::span<const double> g) {
  if (grid.dim() != 3) {
    throw std::invalid_argument("mixed_curvature: two functions need a sphere grid");
  }
  require_size(grid, f, "mixed_curvature");
  require_size(grid, g, "mixed_curvature");
  const SphereDerivatives df = differentiate(grid, f);
  const SphereDerivatives dg = differentiate(grid, g);
  std::vector<double> s(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a11 = df.hess[i][0] + f[i], a12 = df.hess[i][1], a22 = df.hess[i][2] + f[i];
    const double b11 = dg.hess[i][0] + g[i], b12 = dg.hess[i][1], b22 = dg.hess[i][2] + g[i];
    s[i] = 0.5 * (a11 * b22 + a22 * b11 - 2.0 * a12 * b12);
  }
  return s;
}

double mixed_integral(const Grid& grid, std::span<const double> f0, std::span<const double> f1) {
  require_size(grid, f0, "mixed_integral");
  return integrate(grid, product(f0, mixed_curvature(grid, f1))) / 2.0;
}

double mixed_integral(const Grid& grid, std::span<const double> f0, std::span<const double> f1,
                      std::span<const double> f2) {
  require_size(grid, f0, "mixed_integral");
  return integrate(grid, product(f0, mixed_curvature(grid, f1, f2))) / 3.0;
}

Body polar_body(const Body& body, const Grid& scan) { return Body::polar(body, scan); }

double radial_function(const Body& body, const Eigen::Vector3d& v) {
  const double r = v.norm();
  if (!(r > 0.0)) throw std::invalid_argument("radial_function: zero direction");
  const Vector3d vh = v / r;
  if (body.dim() == 2) {
    const int n_scan = 512;
    double best = -1.0, best_t = 0.0;
    for (int k = 0; k < n_scan; ++k) {
      const double t = 2.0 * kPi * k / n_scan;
      const Vector3d u(std::cos(t), std::sin(t), 0.0);
      const double g = u.dot(vh) / body.support(u);
      if (g > best) {
        best = g;
        best_t = t;
      }
    }
    auto obj = [&](double t) {
      const Vector3d u(std::cos(t), std::sin(t), 0.0);
      return u.dot(vh) / body.support(u);
    };
    const auto opt = detail::refine_max_circle(obj, best_t, 2.0 * kPi / n_scan);
    return 1.0 / std::max(opt.value, best);
  }
  static const Grid scan = Grid::sphere(24, 48);
  std::size_t best = 0;
  double bestval = -1.0;
  for (std::size_t i = 0; i < scan.node_count(); ++i) {
    const double g = scan.nodes()[i].dot(vh) / body.support(scan.nodes()[i]);
    if (g > bestval) {
      bestval = g;
      best = i;
    }
  }
  auto obj = [&](const Vector3d& u) { return u.dot(vh) / body.support(u); };
  const auto opt = detail::refine_max_sphere(obj, scan.nodes()[best], kPi / scan.n_theta());
  if (!opt.converged) {
    throw ConvergenceError("radial_function: refinement stalled for " + body.label());
  }
  return 1.0 / std::max(opt.value, bestval);
}

Body aleksandrov_body(const Grid& grid, std::span<const double> f) {
  if (grid.dim() != 2) throw std::invalid_argument("aleksandrov_body: needs a circle grid");
  require_size(grid, f, "aleksandrov_body");
  std::vector<Vector2d> pts(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0) || !std::isfinite(f[i])) {
      throw std::invalid_argument("aleksandrov_body: values must be positive");
    }
    pts[i] = Vector2d(grid.nodes()[i].x(), grid.nodes()[i].y()) / f[i];
  }

  // convex hull, monotone chain, counter-clockwise
  std::sort(pts.begin(), pts.end(), [](const Vector2d& a, const Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Vector2d& o, const Vector2d& a, const Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw std::invalid_argument("aleksandrov_body: dual point set is degenerate");
  }

  // polar polygon: one vertex per hull edge, solving y . p_a = y . p_b = 1
  std::vector<Vector2d> verts(hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vector2d& a = hull[i];
    const Vector2d& b = hull[(i + 1) % hull.size()];
    const double det = a.x() * b.y() - a.y() * b.x();
    if (det == 0.0) throw std::invalid_argument("aleksandrov_body: hull edge through origin");
    verts[i] = Vector2d(b.y() - a.y(), a.x() - b.x()) / det;
  }
  return Body::polygon(verts);
}

}  // namespace centroaffine
