#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "centroaffine/body.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace centroaffine;
using Eigen::Matrix3d;
using Eigen::Vector3d;

namespace {

constexpr double kPi = 3.14159265358979323846;

Body wobbly2d() {
  return Body::fourier(1.0, {{2, 0.03, -0.01}, {3, 0.02, 0.04}});
}

Body wobbly3d() {
  return Body::sphharm(1.0, {{2, 1, 0.03}, {3, -2, 0.02}, {4, 0, 0.015}});
}

/// Central-difference jet of the support extension, independent of the
/// closed-form derivative code.
AmbientJet fd_jet(const Body& b, const Vector3d& v, double step) {
  AmbientJet j;
  j.value = b.support(v);
  const int n = b.dim();
  for (int i = 0; i < n; ++i) {
    Vector3d e = Vector3d::Zero();
    e[i] = step;
    j.grad[i] = (b.support(v + e) - b.support(v - e)) / (2.0 * step);
    j.hess(i, i) = (b.support(v + e) - 2.0 * j.value + b.support(v - e)) / (step * step);
    for (int k = i + 1; k < n; ++k) {
      Vector3d f = Vector3d::Zero();
      f[k] = step;
      j.hess(i, k) = (b.support(v + e + f) - b.support(v + e - f) - b.support(v - e + f) +
                      b.support(v - e - f)) /
                     (4.0 * step * step);
      j.hess(k, i) = j.hess(i, k);
    }
  }
  return j;
}

void check_jet_against_fd(const Body& b, const Vector3d& v) {
  const AmbientJet a = b.jet(v);
  const AmbientJet f = fd_jet(b, v, 1e-5);
  const double scale = std::max(1.0, std::abs(a.value));
  CHECK(std::abs(a.value - b.support(v)) <= 1e-13 * scale);
  CHECK((a.grad - f.grad).norm() <= 1e-7 * scale);
  CHECK((a.hess - f.hess).norm() <= 1e-4 * scale);
}

void check_homogeneity(const Body& b, const Vector3d& v) {
  const AmbientJet j1 = b.jet(v);
  const AmbientJet j2 = b.jet(2.0 * v);
  CHECK(j2.value == doctest::Approx(2.0 * j1.value).epsilon(1e-12));
  CHECK((j2.grad - j1.grad).norm() <= 1e-11 * std::max(1.0, j1.grad.norm()));
  CHECK((j2.hess - 0.5 * j1.hess).norm() <= 1e-11 * std::max(1.0, j1.hess.norm()));
  // Euler identities for a 1-homogeneous function
  CHECK(std::abs(v.dot(j1.grad) - j1.value) <= 1e-11 * std::max(1.0, std::abs(j1.value)));
  CHECK((j1.hess * v).norm() <= 1e-10 * std::max(1.0, j1.hess.norm() * v.norm()));
}

}  // namespace

TEST_CASE("factory argument validation") {
  CHECK_THROWS_AS(Body::ellipsoid({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Body::ellipsoid({1.0, 2.0, 3.0, 4.0}), std::invalid_argument);
  CHECK_THROWS_AS(Body::ellipsoid({1.0, -2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Body::ellipsoid({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Body::fourier(1.0, {{0, 0.1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Body::sphharm(1.0, {{2, 3, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(Body::sphharm(1.0, {{0, 0, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(Body::polygon({{1.0, 0.0}, {0.0, 1.0}}), std::invalid_argument);
  // clockwise winding
  CHECK_THROWS_AS(Body::polygon({{1.0, 0.0}, {0.0, 1.0}, {0.3, 0.3}}), std::invalid_argument);
  // origin outside
  CHECK_THROWS_AS(Body::polygon({{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);

  const Body e = Body::ellipsoid({2.0, 1.0});
  Eigen::MatrixXd sing(2, 2);
  sing << 1.0, 2.0, 0.5, 1.0;
  CHECK_THROWS_AS(e.linear_image(sing), std::invalid_argument);
  CHECK_THROWS_AS(e.linear_image(Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(e.translated(Eigen::Vector3d(0.1, 0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("curvature validation accepts mild perturbations and rejects strong ones") {
  CHECK_NOTHROW(Body::fourier(1.0, {{3, 0.05, 0.0}}));
  CHECK_THROWS_AS(Body::fourier(1.0, {{3, 0.2, 0.0}}), ValidationError);
  CHECK_NOTHROW(Body::sphharm(1.0, {{2, 0, 0.05}}));
  CHECK_THROWS_AS(Body::sphharm(1.0, {{2, 0, 0.8}}), ValidationError);
  // disk moved beyond its radius no longer contains the origin
  const Body disk = Body::ellipsoid({1.0, 1.0});
  CHECK_THROWS_AS(disk.translated(Eigen::Vector2d(1.2, 0.0)), ValidationError);
  CHECK_NOTHROW(disk.translated(Eigen::Vector2d(0.3, 0.0)));
}

TEST_CASE("family flags and labels") {
  const Body e2 = Body::ellipsoid({2.0, 1.0});
  CHECK(e2.dim() == 2);
  CHECK(e2.family() == Family::ellipsoid);
  CHECK(e2.smooth());
  CHECK(e2.analytic_jet());
  CHECK(e2.centered_ellipsoid());
  CHECK(e2.polygon_vertices() == nullptr);

  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.3, 0.2, 1.1;
  CHECK(e2.linear_image(a).centered_ellipsoid());
  CHECK_FALSE(e2.translated(Eigen::Vector2d(0.2, 0.1)).centered_ellipsoid());
  CHECK(e2.translated(Eigen::Vector2d(0.0, 0.0)).centered_ellipsoid());
  CHECK(Body::fourier(1.5, {}).centered_ellipsoid());  // a disk
  CHECK(Body::sphharm(1.0, {}).centered_ellipsoid());  // a ball
  CHECK_FALSE(wobbly2d().centered_ellipsoid());

  const Body sq = Body::polygon({{1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}});
  CHECK_FALSE(sq.smooth());
  CHECK(sq.polygon_vertices() != nullptr);
  CHECK(sq.polygon_vertices()->size() == 4);
  CHECK(sq.support(Vector3d(1.0, 0.5, 0.0)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(evaluate_fields(sq, Grid::circle(16)), ValidationError);
}

TEST_CASE("spherical harmonic terms are orthonormal on the grid") {
  const Grid g = Grid::sphere(24, 48);
  const std::vector<SphHarmTerm> cases = {{1, 0, 1.0},  {1, 1, 1.0},  {2, 0, 1.0}, {2, -1, 1.0},
                                          {3, 2, 1.0},  {3, -3, 1.0}, {4, 0, 1.0}, {4, 4, 1.0},
                                          {4, -2, 1.0}, {2, 2, 1.0}};
  for (const auto& t : cases) {
    CAPTURE(t.l);
    CAPTURE(t.m);
    // support = 1 + eps * Y on the unit sphere; recover Y from two bodies
    const double eps = 0.01;
    const Body b = Body::sphharm(1.0, {{t.l, t.m, eps}});
    std::vector<double> y2(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const double y = (b.support(g.nodes()[i]) - 1.0) / eps;
      y2[i] = y * y;
    }
    CHECK(integrate(g, y2) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // orthogonality of a distinct pair
  const Body b1 = Body::sphharm(1.0, {{3, 2, 0.01}});
  const Body b2 = Body::sphharm(1.0, {{4, 2, 0.01}});
  std::vector<double> prod(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    prod[i] = (b1.support(g.nodes()[i]) - 1.0) * (b2.support(g.nodes()[i]) - 1.0) / 1e-4;
  }
  CHECK(std::abs(integrate(g, prod)) <= 1e-10);
}

TEST_CASE("closed-form jets match finite differences") {
  const std::vector<Vector3d> dirs2 = {{1.0, 0.0, 0.0},
                                       {0.6, -0.8, 0.0},
                                       {-0.37, 0.93, 0.0},
                                       {1.4, 0.7, 0.0}};
  const std::vector<Vector3d> dirs3 = {{1.0, 0.0, 0.0},       {0.0, 0.0, 1.0},
                                       {0.48, -0.6, 0.64},    {-0.3, 0.85, 0.43},
                                       {0.71, 0.71, 0.05},    {1.2, -0.4, 0.9}};

  SUBCASE("ellipse") {
    const Body b = Body::ellipsoid({2.0, 1.0});
    for (const auto& v : dirs2) {
      check_jet_against_fd(b, v);
      check_homogeneity(b, v);
    }
  }
  SUBCASE("ellipsoid") {
    const Body b = Body::ellipsoid({1.5, 1.0, 0.8});
    for (const auto& v : dirs3) {
      check_jet_against_fd(b, v);
      check_homogeneity(b, v);
    }
  }
  SUBCASE("trig polynomial support") {
    const Body b = wobbly2d();
    for (const auto& v : dirs2) {
      check_jet_against_fd(b, v);
      check_homogeneity(b, v);
    }
  }
  SUBCASE("spherical harmonic support") {
    const Body b = wobbly3d();
    for (const auto& v : dirs3) {
      check_jet_against_fd(b, v);
      check_homogeneity(b, v);
    }
  }
  SUBCASE("translate of harmonic body") {
    const Body b = wobbly3d().translated(Eigen::Vector3d(0.1, -0.05, 0.08));
    for (const auto& v : dirs3) {
      check_jet_against_fd(b, v);
    }
  }
  SUBCASE("linear image of harmonic body") {
    Eigen::MatrixXd a(3, 3);
    a << 1.1, 0.2, 0.0, -0.1, 0.9, 0.15, 0.05, 0.0, 1.05;
    const Body b = wobbly3d().linear_image(a);
    for (const auto& v : dirs3) {
      check_jet_against_fd(b, v);
      check_homogeneity(b, v);
    }
  }
}

TEST_CASE("linear image of an ellipsoid is the transformed ellipsoid") {
  const Body base = Body::ellipsoid({1.5, 1.0, 0.8});
  Eigen::MatrixXd a(3, 3);
  a << 1.0, 0.4, -0.2, 0.0, 1.2, 0.3, 0.1, 0.0, 0.9;
  const Body img = base.linear_image(a);
  Matrix3d m = Matrix3d::Zero();
  m.diagonal() << 1.5 * 1.5, 1.0, 0.8 * 0.8;
  const Matrix3d m2 = a * m * a.transpose();
  for (const Vector3d& v :
       {Vector3d(1, 0, 0), Vector3d(0.2, -0.5, 0.84), Vector3d(-0.6, 0.3, 0.74)}) {
    CHECK(img.support(v) == doctest::Approx(std::sqrt(v.dot(m2 * v))).epsilon(1e-13));
  }
}

TEST_CASE("field evaluation: analytic and spectral paths agree") {
  SUBCASE("plane") {
    const Body b = wobbly2d();
    const Grid g = Grid::circle(64);
    const FieldTable fa = evaluate_fields(b, g, DerivativePath::analytic);
    const FieldTable fs = evaluate_fields(b, g, DerivativePath::spectral);
    CHECK(fa.path == DerivativePath::analytic);
    CHECK(fs.path == DerivativePath::spectral);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK(fa.h[i] == doctest::Approx(fs.h[i]).epsilon(1e-14));
      CHECK(std::abs(fa.curvature_fn[i] - fs.curvature_fn[i]) <= 1e-9);
      CHECK(std::abs(fa.k0[i] - fs.k0[i]) <= 1e-9);
    }
  }
  SUBCASE("space") {
    const Body b = wobbly3d();
    const Grid g = Grid::sphere(24, 48);
    const FieldTable fa = evaluate_fields(b, g, DerivativePath::analytic);
    const FieldTable fs = evaluate_fields(b, g, DerivativePath::spectral);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK(std::abs(fa.h[i] - fs.h[i]) <= 1e-13);
      CHECK(std::abs(fa.curvature_fn[i] - fs.curvature_fn[i]) <= 1e-6);
      CHECK(std::abs(fa.k0[i] - fs.k0[i]) <= 1e-6);
      CHECK(std::abs(fa.derivs.grad[i][0] - fs.derivs.grad[i][0]) <= 1e-6);
      CHECK(std::abs(fa.derivs.grad[i][1] - fs.derivs.grad[i][1]) <= 1e-6);
    }
  }
  SUBCASE("numerical polar body uses the spectral path") {
    const Body b = Body::polar(Body::ellipsoid({2.0, 1.0}), Grid::circle(64));
    const FieldTable f = evaluate_fields(b, Grid::circle(32));
    CHECK(f.path == DerivativePath::spectral);
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(evaluate_fields(wobbly2d(), Grid::sphere(8, 8)), std::invalid_argument);
    // requesting analytic derivatives from a numerical polar body must fail
    const Body p = Body::polar(Body::ellipsoid({2.0, 1.0}), Grid::circle(64));
    CHECK_THROWS_AS(evaluate_fields(p, Grid::circle(16), DerivativePath::analytic),
                    std::invalid_argument);
  }
}

TEST_CASE("centro-affine curvature of an ellipse is constant") {
  const Body e = Body::ellipsoid({2.0, 1.0});
  const Grid g = Grid::circle(128);
  const FieldTable f = evaluate_fields(e, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(f.k0[i] == doctest::Approx(0.25).epsilon(1e-12));
    // cone density times Gauss curvature definition closes
    CHECK(f.k0[i] * std::pow(f.h[i], 3.0) * f.curvature_fn[i] ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto [lo, hi] = curvature_extrema(f);
  CHECK(lo == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("shifted disk has curvature 1 over support cubed") {
  const Body b = Body::ellipsoid({1.0, 1.0}).translated(Eigen::Vector2d(0.3, 0.0));
  const Grid g = Grid::circle(256);
  const FieldTable f = evaluate_fields(b, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double h = 1.0 + 0.3 * std::cos(g.theta(i));
    CHECK(f.h[i] == doctest::Approx(h).epsilon(1e-14));
    CHECK(f.curvature_fn[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.k0[i] == doctest::Approx(1.0 / (h * h * h)).epsilon(1e-12));
  }
  const auto [lo, hi] = curvature_extrema(f);
  CHECK(lo == doctest::Approx(1.0 / (1.3 * 1.3 * 1.3)).epsilon(1e-10));
  CHECK(hi == doctest::Approx(1.0 / (0.7 * 0.7 * 0.7)).epsilon(1e-10));
}

TEST_CASE("curvature extrema refinement beats the raw grid value") {
  // K0 extrema of the shifted disk land between nodes on a coarse grid; the
  // quadratic fit must recover them better than the nearest node does
  const Body b = Body::ellipsoid({1.0, 1.0}).translated(Eigen::Vector2d(0.3, 0.0));
  const Grid g = Grid::circle(24);
  // rotate so no node is at theta = 0 or pi: shift direction instead
  const Body rot = Body::ellipsoid({1.0, 1.0})
                       .translated(Eigen::Vector2d(0.3 * std::cos(0.13), 0.3 * std::sin(0.13)));
  const FieldTable f = evaluate_fields(rot, g);
  const auto [lo, hi] = curvature_extrema(f);
  const double exact_lo = 1.0 / (1.3 * 1.3 * 1.3);
  const double exact_hi = 1.0 / (0.7 * 0.7 * 0.7);
  double node_lo = 1e300, node_hi = -1e300;
  for (double v : f.k0) {
    node_lo = std::min(node_lo, v);
    node_hi = std::max(node_hi, v);
  }
  CHECK(std::abs(lo - exact_lo) < std::abs(node_lo - exact_lo));
  CHECK(std::abs(hi - exact_hi) < std::abs(node_hi - exact_hi));
  CHECK(lo == doctest::Approx(exact_lo).epsilon(2.5e-3));
  CHECK(hi == doctest::Approx(exact_hi).epsilon(2.5e-3));
}

TEST_CASE("ellipsoid fields in space match closed forms") {
  const double a = 1.5, b = 1.0, c = 0.8;
  const Body e = Body::ellipsoid({a, b, c});
  const Grid g = Grid::sphere(16, 32);
  const FieldTable f = evaluate_fields(e, g);
  const double k0_exact = 1.0 / (a * a * b * b * c * c);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(f.k0[i] == doctest::Approx(k0_exact).epsilon(1e-11));
  }
  const auto [lo, hi] = curvature_extrema(f);
  CHECK(lo == doctest::Approx(k0_exact).epsilon(1e-11));
  CHECK(hi == doctest::Approx(k0_exact).epsilon(1e-11));
}

TEST_CASE("numerical polar support matches the dual ellipsoid") {
  SUBCASE("plane") {
    const Body p = Body::polar(Body::ellipsoid({2.0, 1.0}), Grid::circle(64));
    for (double t : {0.0, 0.3, 1.1, 2.0, 3.9, 5.5}) {
      const Vector3d v(std::cos(t), std::sin(t), 0.0);
      const double exact = std::sqrt(0.25 * std::cos(t) * std::cos(t) +
                                     std::sin(t) * std::sin(t));
      CHECK(p.support(v) == doctest::Approx(exact).epsilon(1e-11));
    }
    // homogeneous extension
    CHECK(p.support(Vector3d(3.0, 0.0, 0.0)) == doctest::Approx(1.5).epsilon(1e-11));
  }
  SUBCASE("space") {
    const Body p = Body::polar(Body::ellipsoid({1.5, 1.0, 0.8}), Grid::sphere(16, 32));
    for (const Vector3d& v : {Vector3d(1, 0, 0), Vector3d(0, 0, 1), Vector3d(0.48, -0.6, 0.64),
                              Vector3d(-0.3, 0.85, 0.43)}) {
      const Vector3d u = v.normalized();
      const double exact = std::sqrt(u.x() * u.x() / 2.25 + u.y() * u.y() +
                                     u.z() * u.z() / 0.64);
      CHECK(p.support(u) == doctest::Approx(exact).epsilon(1e-9));
    }
  }
  SUBCASE("polar of a polygon is rejected") {
    const Body sq = Body::polygon({{1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}});
    CHECK_THROWS_AS(Body::polar(sq, Grid::circle(64)), std::invalid_argument);
  }
}

TEST_CASE("support positivity check reports the offending node") {
  try {
    Body::fourier(1.0, {{3, 0.2, 0.0}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("node") != std::string::npos);
    CHECK(msg.find("theta") != std::string::npos);
  }
}
