#include "centroaffine/body.hpp"

#include "centroaffine/detail/sphere_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace centroaffine {

namespace {

constexpr double kPi = std::numbers::pi;

using Eigen::Matrix3d;
using Eigen::Vector3d;

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// homogeneous trivariate polynomials (for solid-harmonic support terms)
// ---------------------------------------------------------------------------

struct TriPoly {
  int degree = 0;
  std::vector<double> c;  // coefficient of x^i y^j z^(degree-i-j)

  static int size(int d) { return (d + 1) * (d + 2) / 2; }
  static int idx(int d, int i, int j) { return i * (d + 1) - i * (i - 1) / 2 + j; }
  static TriPoly zero(int d) { return {d, std::vector<double>(size(d), 0.0)}; }
  double get(int i, int j) const { return c[idx(degree, i, j)]; }
  void add(int i, int j, double v) { c[idx(degree, i, j)] += v; }
};

TriPoly mul_axis(const TriPoly& p, int axis) {
  TriPoly q = TriPoly::zero(p.degree + 1);
  for (int i = 0; i <= p.degree; ++i) {
    for (int j = 0; j + i <= p.degree; ++j) {
      const double v = p.get(i, j);
      if (v == 0.0) continue;
      if (axis == 0) q.add(i + 1, j, v);
      else if (axis == 1) q.add(i, j + 1, v);
      else q.add(i, j, v);
    }
  }
  return q;
}

TriPoly mul_r2(const TriPoly& p) {
  TriPoly q = TriPoly::zero(p.degree + 2);
  for (int i = 0; i <= p.degree; ++i) {
    for (int j = 0; j + i <= p.degree; ++j) {
      const double v = p.get(i, j);
      if (v == 0.0) continue;
      q.add(i + 2, j, v);
      q.add(i, j + 2, v);
      q.add(i, j, v);
    }
  }
  return q;
}

TriPoly lin_comb(double a, const TriPoly& p, double b, const TriPoly& q) {
  TriPoly r = TriPoly::zero(p.degree);
  for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] = a * p.c[k] + b * q.c[k];
  return r;
}

TriPoly scaled(double a, const TriPoly& p) {
  TriPoly r = p;
  for (auto& c : r.c) c *= a;
  return r;
}

struct PolyJet {
  double val = 0.0;
  Vector3d g = Vector3d::Zero();
  Matrix3d h = Matrix3d::Zero();
};

PolyJet poly_jet(const TriPoly& p, const Vector3d& v) {
  const int d = p.degree;
  std::vector<double> px(d + 1), py(d + 1), pz(d + 1);
  px[0] = py[0] = pz[0] = 1.0;
  for (int k = 1; k <= d; ++k) {
    px[k] = px[k - 1] * v.x();
    py[k] = py[k - 1] * v.y();
    pz[k] = pz[k - 1] * v.z();
  }
  PolyJet out;
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j + i <= d; ++j) {
      const double c = p.get(i, j);
      if (c == 0.0) continue;
      const int k = d - i - j;
      out.val += c * px[i] * py[j] * pz[k];
      if (i >= 1) out.g.x() += c * i * px[i - 1] * py[j] * pz[k];
      if (j >= 1) out.g.y() += c * j * px[i] * py[j - 1] * pz[k];
      if (k >= 1) out.g.z() += c * k * px[i] * py[j] * pz[k - 1];
      if (i >= 2) out.h(0, 0) += c * i * (i - 1) * px[i - 2] * py[j] * pz[k];
      if (j >= 2) out.h(1, 1) += c * j * (j - 1) * px[i] * py[j - 2] * pz[k];
      if (k >= 2) out.h(2, 2) += c * k * (k - 1) * px[i] * py[j] * pz[k - 2];
      if (i >= 1 && j >= 1) out.h(0, 1) += c * i * j * px[i - 1] * py[j - 1] * pz[k];
      if (i >= 1 && k >= 1) out.h(0, 2) += c * i * k * px[i - 1] * py[j] * pz[k - 1];
      if (j >= 1 && k >= 1) out.h(1, 2) += c * j * k * px[i] * py[j - 1] * pz[k - 1];
    }
  }
  out.h(1, 0) = out.h(0, 1);
  out.h(2, 0) = out.h(0, 2);
  out.h(2, 1) = out.h(1, 2);
  return out;
}

/// Complex solid harmonics r^l P_l^m(cos theta) e^{i m phi} without the
/// Condon-Shortley phase, as polynomial pairs (real, imag), for 0 <= m <= l.
std::vector<std::vector<std::pair<TriPoly, TriPoly>>> solid_harmonics(int lmax) {
  std::vector<std::vector<std::pair<TriPoly, TriPoly>>> c(lmax + 1);
  for (int l = 0; l <= lmax; ++l) c[l].resize(l + 1, {TriPoly::zero(l), TriPoly::zero(l)});
  c[0][0].first.c[0] = 1.0;
  for (int m = 1; m <= lmax; ++m) {
    // C_m^m = (2m - 1) (x + i y) C_{m-1}^{m-1}
    const auto& prev = c[m - 1][m - 1];
    TriPoly re = lin_comb(2.0 * m - 1.0, mul_axis(prev.first, 0), -(2.0 * m - 1.0),
                          mul_axis(prev.second, 1));
    TriPoly im = lin_comb(2.0 * m - 1.0, mul_axis(prev.first, 1), 2.0 * m - 1.0,
                          mul_axis(prev.second, 0));
    c[m][m] = {re, im};
  }
  for (int m = 0; m < lmax; ++m) {
    // C_{m+1}^m = (2m + 1) z C_m^m
    c[m + 1][m] = {scaled(2.0 * m + 1.0, mul_axis(c[m][m].first, 2)),
                   scaled(2.0 * m + 1.0, mul_axis(c[m][m].second, 2))};
  }
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      // (l - m) C_l^m = (2l - 1) z C_{l-1}^m - (l + m - 1) r^2 C_{l-2}^m
      const double a = (2.0 * l - 1.0) / (l - m);
      const double b = -(l + m - 1.0) / (l - m);
      c[l][m] = {lin_comb(a, mul_axis(c[l - 1][m].first, 2), b, mul_r2(c[l - 2][m].first)),
                 lin_comb(a, mul_axis(c[l - 1][m].second, 2), b, mul_r2(c[l - 2][m].second))};
    }
  }
  return c;
}

double sphharm_normalization(int l, int m) {
  double ratio = 1.0;  // (l - m)! / (l + m)!
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

}  // namespace

// ---------------------------------------------------------------------------
// body nodes
// ---------------------------------------------------------------------------

struct Body::Node {
  virtual ~Node() = default;
  virtual int dim() const = 0;
  virtual Family family() const = 0;
  virtual bool smooth() const { return true; }
  virtual bool analytic() const = 0;
  virtual bool centered_ellipsoid() const { return false; }
  virtual double support(const Vector3d& v) const = 0;
  virtual AmbientJet jet(const Vector3d&) const {
    throw std::logic_error("jet: family '" + label() + "' has no closed-form derivatives");
  }
  virtual std::string label() const = 0;
  virtual const std::vector<Eigen::Vector2d>* polygon() const { return nullptr; }
};

namespace {

struct EllipsoidNode final : Body::Node {
  int n = 0;
  Matrix3d m = Matrix3d::Zero();  // diag(a_i^2)
  std::vector<double> axes;

  int dim() const override { return n; }
  Family family() const override { return Family::ellipsoid; }
  bool analytic() const override { return true; }
  bool centered_ellipsoid() const override { return true; }
  double support(const Vector3d& v) const override { return std::sqrt(v.dot(m * v)); }
  AmbientJet jet(const Vector3d& v) const override {
    AmbientJet j;
    const Vector3d mv = m * v;
    j.value = std::sqrt(v.dot(mv));
    j.grad = mv / j.value;
    j.hess = m / j.value - mv * mv.transpose() / (j.value * j.value * j.value);
    return j;
  }
  std::string label() const override {
    std::string s = "ellipsoid(";
    for (std::size_t i = 0; i < axes.size(); ++i) s += (i ? "," : "") + fmt_num(axes[i]);
    return s + ")";
  }
};

struct FourierNode final : Body::Node {
  double c0 = 0.0;
  std::vector<FourierTerm> terms;

  void eval(double t, double& h, double& dh, double& ddh) const {
    h = c0;
    dh = 0.0;
    ddh = 0.0;
    for (const auto& tm : terms) {
      const double k = tm.degree;
      const double ck = std::cos(k * t), sk = std::sin(k * t);
      h += tm.cos_coef * ck + tm.sin_coef * sk;
      dh += k * (-tm.cos_coef * sk + tm.sin_coef * ck);
      ddh += -k * k * (tm.cos_coef * ck + tm.sin_coef * sk);
    }
  }

  int dim() const override { return 2; }
  Family family() const override { return Family::fourier2d; }
  bool analytic() const override { return true; }
  bool centered_ellipsoid() const override { return terms.empty(); }  // disk
  double support(const Vector3d& v) const override {
    const double r = std::hypot(v.x(), v.y());
    double h, dh, ddh;
    eval(std::atan2(v.y(), v.x()), h, dh, ddh);
    return r * h;
  }
  AmbientJet jet(const Vector3d& v) const override {
    const double r = std::hypot(v.x(), v.y());
    const double t = std::atan2(v.y(), v.x());
    double h, dh, ddh;
    eval(t, h, dh, ddh);
    const double ct = std::cos(t), st = std::sin(t);
    AmbientJet j;
    j.value = r * h;
    j.grad = Vector3d(ct * h - st * dh, st * h + ct * dh, 0.0);
    const Vector3d tang(-st, ct, 0.0);
    j.hess = (ddh + h) / r * tang * tang.transpose();
    return j;
  }
  std::string label() const override {
    std::string s = "fourier2d(" + fmt_num(c0);
    for (const auto& tm : terms) {
      s += "; (" + std::to_string(tm.degree) + "," + fmt_num(tm.cos_coef) + "," +
           fmt_num(tm.sin_coef) + ")";
    }
    return s + ")";
  }
};

struct SphHarmNode final : Body::Node {
  double c0 = 0.0;
  std::vector<SphHarmTerm> terms;
  std::vector<std::pair<TriPoly, int>> polys;  // scaled polynomial and its degree l

  int dim() const override { return 3; }
  Family family() const override { return Family::sphharm3d; }
  bool analytic() const override { return true; }
  bool centered_ellipsoid() const override { return terms.empty(); }  // round ball
  double support(const Vector3d& v) const override {
    const double r = v.norm();
    double h = c0 * r;
    for (const auto& [p, l] : polys) {
      const int d = p.degree;
      std::vector<double> py(d + 1), pz(d + 1);
      py[0] = pz[0] = 1.0;
      for (int k = 1; k <= d; ++k) {
        py[k] = py[k - 1] * v.y();
        pz[k] = pz[k - 1] * v.z();
      }
      double val = 0.0, px = 1.0;
      for (int i = 0; i <= d; ++i) {
        for (int j = 0; j + i <= d; ++j) {
          const double c = p.get(i, j);
          if (c != 0.0) val += c * px * py[j] * pz[d - i - j];
        }
        px *= v.x();
      }
      h += val * std::pow(r, 1.0 - l);
    }
    return h;
  }
  AmbientJet jet(const Vector3d& v) const override {
    const double r = v.norm();
    AmbientJet j;
    // constant part c0 |v|
    j.value = c0 * r;
    j.grad = c0 / r * v;
    j.hess = c0 / r * (Matrix3d::Identity() - v * v.transpose() / (r * r));
    for (const auto& [p, l] : polys) {
      const PolyJet pj = poly_jet(p, v);
      const double a = 1.0 - l;
      const double ra = std::pow(r, a);
      const double ram2 = std::pow(r, a - 2.0);
      const double ram4 = std::pow(r, a - 4.0);
      j.value += pj.val * ra;
      j.grad += ra * pj.g + a * ram2 * pj.val * v;
      j.hess += ra * pj.h + a * ram2 * (pj.g * v.transpose() + v * pj.g.transpose()) +
                a * pj.val * ((a - 2.0) * ram4 * v * v.transpose() + ram2 * Matrix3d::Identity());
    }
    return j;
  }
  std::string label() const override {
    std::string s = "sphharm3d(" + fmt_num(c0);
    for (const auto& tm : terms) {
      s += "; (" + std::to_string(tm.l) + "," + std::to_string(tm.m) + "," + fmt_num(tm.coef) +
           ")";
    }
    return s + ")";
  }
};

struct LinearImageNode final : Body::Node {
  Body base;
  Matrix3d a = Matrix3d::Identity();   // embedded n x n block
  explicit LinearImageNode(Body b) : base(std::move(b)) {}

  int dim() const override { return base.dim(); }
  Family family() const override { return Family::linear_image; }
  bool smooth() const override { return base.smooth(); }
  bool analytic() const override { return base.analytic_jet(); }
  bool centered_ellipsoid() const override { return base.centered_ellipsoid(); }
  double support(const Vector3d& v) const override { return base.support(a.transpose() * v); }
  AmbientJet jet(const Vector3d& v) const override {
    const AmbientJet bj = base.jet(a.transpose() * v);
    AmbientJet j;
    j.value = bj.value;
    j.grad = a * bj.grad;
    j.hess = a * bj.hess * a.transpose();
    return j;
  }
  std::string label() const override { return "linear_image(" + base.label() + ")"; }
};

struct TranslateNode final : Body::Node {
  Body base;
  Vector3d t = Vector3d::Zero();
  explicit TranslateNode(Body b) : base(std::move(b)) {}

  int dim() const override { return base.dim(); }
  Family family() const override { return Family::translate; }
  bool smooth() const override { return base.smooth(); }
  bool analytic() const override { return base.analytic_jet(); }
  bool centered_ellipsoid() const override {
    return t.norm() == 0.0 && base.centered_ellipsoid();
  }
  double support(const Vector3d& v) const override { return base.support(v) + t.dot(v); }
  AmbientJet jet(const Vector3d& v) const override {
    AmbientJet j = base.jet(v);
    j.value += t.dot(v);
    j.grad += t;
    return j;
  }
  std::string label() const override {
    return "translate(" + base.label() + "; [" + fmt_num(t.x()) + "," + fmt_num(t.y()) +
           (base.dim() == 3 ? "," + fmt_num(t.z()) : std::string()) + "])";
  }
};

struct PolarNode final : Body::Node {
  Body base;
  std::vector<Vector3d> scan_dirs;
  std::vector<double> scan_h;  // base support at scan_dirs
  double refine_step = 0.1;
  explicit PolarNode(Body b) : base(std::move(b)) {}

  int dim() const override { return base.dim(); }
  Family family() const override { return Family::polar_numeric; }
  bool analytic() const override { return false; }
  bool centered_ellipsoid() const override { return base.centered_ellipsoid(); }
  double support(const Vector3d& v) const override {
    const double r = v.norm();
    if (!(r > 0.0)) throw std::invalid_argument("support: zero direction");
    const Vector3d vh = v / r;
    std::size_t best = 0;
    double bestval = -1.0;
    for (std::size_t i = 0; i < scan_dirs.size(); ++i) {
      const double g = scan_dirs[i].dot(vh) / scan_h[i];
      if (g > bestval) {
        bestval = g;
        best = i;
      }
    }
    detail::SphereOpt opt;
    if (base.dim() == 2) {
      auto obj = [&](double t) {
        const Vector3d u(std::cos(t), std::sin(t), 0.0);
        return u.dot(vh) / base.support(u);
      };
      const double t0 = std::atan2(scan_dirs[best].y(), scan_dirs[best].x());
      opt = detail::refine_max_circle(obj, t0, refine_step);
    } else {
      auto obj = [&](const Vector3d& u) { return u.dot(vh) / base.support(u); };
      opt = detail::refine_max_sphere(obj, scan_dirs[best], refine_step);
    }
    if (!opt.converged) {
      throw ConvergenceError("polar support: no convergence at direction (" + fmt_num(vh.x()) +
                             ", " + fmt_num(vh.y()) + ", " + fmt_num(vh.z()) + ") of " +
                             base.label());
    }
    return r * std::max(opt.value, bestval);
  }
  std::string label() const override { return "polar(" + base.label() + ")"; }
};

struct PolygonNode final : Body::Node {
  std::vector<Eigen::Vector2d> verts;

  int dim() const override { return 2; }
  Family family() const override { return Family::polygonal2d; }
  bool smooth() const override { return false; }
  bool analytic() const override { return false; }
  double support(const Vector3d& v) const override {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : verts) best = std::max(best, p.x() * v.x() + p.y() * v.y());
    return best;
  }
  std::string label() const override {
    return "polygonal2d(k=" + std::to_string(verts.size()) + ")";
  }
  const std::vector<Eigen::Vector2d>* polygon() const override { return &verts; }
};

/// Shared validation: evaluating fields on the fixed validation grid throws a
/// located ValidationError when positivity or positive definiteness fails.
void validate_on_grid(const Body& body) {
  (void)evaluate_fields(body, validation_grid(body.dim()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Body surface
// ---------------------------------------------------------------------------

int Body::dim() const { return node_->dim(); }
Family Body::family() const { return node_->family(); }
bool Body::smooth() const { return node_->smooth(); }
bool Body::analytic_jet() const { return node_->analytic(); }
bool Body::centered_ellipsoid() const { return node_->centered_ellipsoid(); }
std::string Body::label() const { return node_->label(); }
double Body::support(const Eigen::Vector3d& v) const { return node_->support(v); }
AmbientJet Body::jet(const Eigen::Vector3d& v) const { return node_->jet(v); }
const std::vector<Eigen::Vector2d>* Body::polygon_vertices() const { return node_->polygon(); }

Body Body::ellipsoid(const std::vector<double>& semi_axes) {
  if (semi_axes.size() != 2 && semi_axes.size() != 3) {
    throw std::invalid_argument("ellipsoid: need 2 or 3 semi-axes");
  }
  for (double a : semi_axes) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("ellipsoid: semi-axes must be positive, got " + fmt_num(a));
    }
  }
  auto node = std::make_shared<EllipsoidNode>();
  node->n = static_cast<int>(semi_axes.size());
  node->axes = semi_axes;
  for (int i = 0; i < node->n; ++i) node->m(i, i) = semi_axes[i] * semi_axes[i];
  return Body(std::move(node));
}

Body Body::fourier(double c0, const std::vector<FourierTerm>& terms) {
  for (const auto& t : terms) {
    if (t.degree < 1) throw std::invalid_argument("fourier: term degree must be >= 1");
    if (!std::isfinite(t.cos_coef) || !std::isfinite(t.sin_coef)) {
      throw std::invalid_argument("fourier: non-finite coefficient");
    }
  }
  auto node = std::make_shared<FourierNode>();
  node->c0 = c0;
  node->terms = terms;
  Body b{std::shared_ptr<const Node>(std::move(node))};
  validate_on_grid(b);
  return b;
}

Body Body::sphharm(double c0, const std::vector<SphHarmTerm>& terms) {
  int lmax = 0;
  for (const auto& t : terms) {
    if (t.l < 1 || std::abs(t.m) > t.l) {
      throw std::invalid_argument("sphharm: need 1 <= l and |m| <= l");
    }
    if (!std::isfinite(t.coef)) throw std::invalid_argument("sphharm: non-finite coefficient");
    lmax = std::max(lmax, t.l);
  }
  auto node = std::make_shared<SphHarmNode>();
  node->c0 = c0;
  node->terms = terms;
  const auto table = solid_harmonics(lmax);
  for (const auto& t : terms) {
    const int m = std::abs(t.m);
    const double norm = sphharm_normalization(t.l, m) * (m > 0 ? std::numbers::sqrt2 : 1.0);
    const TriPoly& src = (t.m >= 0) ? table[t.l][m].first : table[t.l][m].second;
    TriPoly scaled = src;
    for (auto& c : scaled.c) c *= t.coef * norm;
    node->polys.emplace_back(std::move(scaled), t.l);
  }
  Body b{std::shared_ptr<const Node>(std::move(node))};
  validate_on_grid(b);
  return b;
}

Body Body::polygon(const std::vector<Eigen::Vector2d>& vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon: need at least 3 vertices");
  const std::size_t k = vertices.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % k];
    if (a.x() * b.y() - a.y() * b.x() <= 0.0) {
      throw std::invalid_argument(
          "polygon: vertices must wind counter-clockwise around an interior origin");
    }
  }
  auto node = std::make_shared<PolygonNode>();
  node->verts = vertices;
  return Body{std::shared_ptr<const Node>(std::move(node))};
}

Body Body::polar(const Body& base, const Grid& scan) {
  if (!base.smooth()) {
    throw std::invalid_argument("polar: base must be a smooth body, got " + base.label());
  }
  if (scan.dim() != base.dim()) throw std::invalid_argument("polar: scan grid dimension mismatch");
  auto node = std::make_shared<PolarNode>(base);
  // cap the coarse scan so polar evaluation stays cheap; refinement supplies
  // the accuracy
  const bool cap = scan.dim() == 3 && scan.node_count() > 4608;
  const Grid use = cap ? Grid::sphere(32, 64) : scan;
  node->scan_dirs = use.nodes();
  node->scan_h.resize(node->scan_dirs.size());
  for (std::size_t i = 0; i < node->scan_dirs.size(); ++i) {
    node->scan_h[i] = base.support(node->scan_dirs[i]);
    if (!(node->scan_h[i] > 0.0)) {
      throw ValidationError("polar: base support not positive at scan node " + std::to_string(i));
    }
  }
  node->refine_step = (use.dim() == 2) ? 2.0 * kPi / use.n_theta() : kPi / use.n_theta();
  Body b{std::shared_ptr<const Node>(std::move(node))};
  validate_on_grid(b);
  return b;
}

Body Body::linear_image(const Eigen::MatrixXd& a) const {
  const int n = dim();
  if (a.rows() != n || a.cols() != n) {
    throw std::invalid_argument("linear_image: matrix must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  if (!a.allFinite()) throw std::invalid_argument("linear_image: non-finite matrix");
  if (std::abs(a.determinant()) < 1e-12) {
    throw std::invalid_argument("linear_image: matrix is singular");
  }
  auto node = std::make_shared<LinearImageNode>(*this);
  node->a = Matrix3d::Identity();
  node->a.topLeftCorner(n, n) = a;
  // congruence preserves positivity and positive definiteness; no re-validation
  return Body{std::shared_ptr<const Node>(std::move(node))};
}

Body Body::translated(const Eigen::VectorXd& t) const {
  if (t.size() != dim()) {
    throw std::invalid_argument("translated: offset must have length " + std::to_string(dim()));
  }
  auto node = std::make_shared<TranslateNode>(*this);
  node->t.head(t.size()) = t;
  Body b{std::shared_ptr<const Node>(std::move(node))};
  // curvature is translation invariant; only positivity can break
  const Grid& vg = validation_grid(b.dim());
  for (std::size_t i = 0; i < vg.node_count(); ++i) {
    const double h = b.support(vg.nodes()[i]);
    if (!(h > 0.0)) {
      throw ValidationError("translated: support " + fmt_num(h) + " not positive at node " +
                            std::to_string(i) + " (theta=" + fmt_num(vg.theta(i)) +
                            ", phi=" + fmt_num(vg.phi(i)) + ") of " + b.label());
    }
  }
  return b;
}

const Grid& validation_grid(int dim) {
  static const Grid g2 = Grid::circle(512);
  static const Grid g3 = Grid::sphere(96, 192);
  if (dim == 2) return g2;
  if (dim == 3) return g3;
  throw std::invalid_argument("validation_grid: dim must be 2 or 3");
}

// ---------------------------------------------------------------------------
// field evaluation
// ---------------------------------------------------------------------------

FieldTable evaluate_fields(const Body& body, const Grid& grid, DerivativePath path) {
  if (body.dim() != grid.dim()) {
    throw std::invalid_argument("evaluate_fields: body/grid dimension mismatch");
  }
  if (!body.smooth()) {
    throw ValidationError("evaluate_fields: fields require a C2 support function, got " +
                          body.label());
  }
  if (path == DerivativePath::automatic) {
    path = body.analytic_jet() ? DerivativePath::analytic : DerivativePath::spectral;
  }
  if (path == DerivativePath::analytic && !body.analytic_jet()) {
    throw std::invalid_argument("evaluate_fields: no analytic derivatives for " + body.label());
  }

  const std::size_t count = grid.node_count();
  FieldTable t{grid, body.dim(), body.label(), path, {}, {}, {}, {}, {}, {}};
  t.h.resize(count);
  t.curvature_fn.resize(count);
  t.gauss.resize(count);
  t.k0.resize(count);
  t.cone_density.resize(count);

  if (path == DerivativePath::analytic) {
    t.derivs.grad.assign(count, Eigen::Vector2d::Zero());
    t.derivs.hess.assign(count, Eigen::Vector3d::Zero());
    for (std::size_t i = 0; i < count; ++i) {
      const AmbientJet j = body.jet(grid.nodes()[i]);
      const Vector3d e1 = grid.frame1(i), e2 = grid.frame2(i);
      t.h[i] = j.value;
      t.derivs.grad[i][0] = e1.dot(j.grad);
      const double a11 = e1.dot(j.hess * e1);
      t.derivs.hess[i][0] = a11 - j.value;
      if (body.dim() == 3) {
        t.derivs.grad[i][1] = e2.dot(j.grad);
        t.derivs.hess[i][1] = e1.dot(j.hess * e2);
        t.derivs.hess[i][2] = e2.dot(j.hess * e2) - j.value;
      }
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) t.h[i] = body.support(grid.nodes()[i]);
    t.derivs = differentiate(grid, t.h);
  }

  const int n = body.dim();
  for (std::size_t i = 0; i < count; ++i) {
    const double h = t.h[i];
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw ValidationError("support value " + fmt_num(h) + " not positive at node " +
                            std::to_string(i) + " (theta=" + fmt_num(grid.theta(i)) +
                            ", phi=" + fmt_num(grid.phi(i)) + ") of " + body.label());
    }
    const double a11 = t.derivs.hess[i][0] + h;
    double fk, min_eig;
    if (n == 2) {
      fk = a11;
      min_eig = a11;
    } else {
      const double a22 = t.derivs.hess[i][2] + h;
      const double a12 = t.derivs.hess[i][1];
      fk = a11 * a22 - a12 * a12;
      min_eig = 0.5 * ((a11 + a22) - std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
    }
    if (!(min_eig > 0.0) || !(fk > 0.0)) {
      throw ValidationError("support Hessian not positive definite at node " + std::to_string(i) +
                            " (theta=" + fmt_num(grid.theta(i)) + ", phi=" +
                            fmt_num(grid.phi(i)) + "): min eigenvalue " + fmt_num(min_eig) +
                            " of " + body.label());
    }
    t.curvature_fn[i] = fk;
    t.gauss[i] = 1.0 / fk;
    t.k0[i] = 1.0 / (fk * std::pow(h, n + 1.0));
    t.cone_density[i] = h * fk;
  }
  return t;
}

// ---------------------------------------------------------------------------
// curvature extrema
// ---------------------------------------------------------------------------

namespace {

/// Value at the vertex of the parabola through (sm, fm), (0, f0), (sp, fp);
/// returns f0 when the fit is degenerate, the vertex lies outside, or the
/// curvature sign does not match the requested extremum.
double parabola_vertex_value(double fm, double f0, double fp, double sm, double sp,
                             bool maximize) {
  if (sm > sp) {
    std::swap(sm, sp);
    std::swap(fm, fp);
  }
  const double det = sm * sp * (sp - sm);
  if (det == 0.0) return f0;
  const double b = ((fm - f0) * sp * sp - (fp - f0) * sm * sm) / det;
  const double d = ((fp - f0) * sm - (fm - f0) * sp) / det;
  if ((maximize && d >= 0.0) || (!maximize && d <= 0.0)) return f0;
  const double s = -b / (2.0 * d);
  if (s < sm || s > sp) return f0;
  return f0 + b * s + d * s * s;
}

double refine_extremum(const FieldTable& t, std::size_t idx, bool maximize) {
  const Grid& g = t.grid;
  const auto& v = t.k0;
  if (t.dim == 2) {
    const int n = g.n_theta();
    const int i = static_cast<int>(idx);
    const double h = 2.0 * kPi / n;
    return parabola_vertex_value(v[(i + n - 1) % n], v[i], v[(i + 1) % n], -h, h, maximize);
  }
  const int np = g.n_phi();
  const int i = static_cast<int>(idx) / np;
  const int j = static_cast<int>(idx) % np;
  double refined = v[idx];
  if (i > 0 && i + 1 < g.n_theta()) {
    const std::size_t up = idx - np, dn = idx + np;
    const double th0 = g.theta(idx);
    refined += parabola_vertex_value(v[up], v[idx], v[dn], g.theta(up) - th0, g.theta(dn) - th0,
                                     maximize) -
               v[idx];
  }
  {
    const double hp = 2.0 * kPi / np;
    const std::size_t lf = static_cast<std::size_t>(i) * np + (j + np - 1) % np;
    const std::size_t rt = static_cast<std::size_t>(i) * np + (j + 1) % np;
    refined += parabola_vertex_value(v[lf], v[idx], v[rt], -hp, hp, maximize) - v[idx];
  }
  return refined;
}

}  // namespace

std::pair<double, double> curvature_extrema(const FieldTable& fields) {
  const auto& v = fields.k0;
  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[imin]) imin = i;
    if (v[i] > v[imax]) imax = i;
  }
  const double lo = refine_extremum(fields, imin, false);
  const double hi = refine_extremum(fields, imax, true);
  return {std::min(lo, v[imin]), std::max(hi, v[imax])};
}

}  // namespace centroaffine
