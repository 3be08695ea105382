#include "centroaffine/sphere.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace centroaffine {

namespace {

constexpr double kPi = std::numbers::pi;

using Matrix = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1] via Newton iteration
/// on the three-term recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(kPi * (4.0 * i + 3.0) / (4.0 * n + 2.0));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one clean-up step so the weight uses the converged derivative
    {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    }
    x[n - 1 - i] = xi;  // initial guesses are descending; store ascending
    w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

/// Periodic trigonometric differentiation matrices for an even uniform grid.
/// Diagonals use the negative-sum trick so that D * constant == 0 exactly.
void trig_diff_matrices(int n, Matrix& d1, Matrix& d2) {
  const double h = 2.0 * kPi / n;
  d1.setZero(n, n);
  d2.setZero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int m = j - k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double s = std::sin(0.5 * m * h);
      d1(j, k) = 0.5 * sign / std::tan(0.5 * m * h);
      d2(j, k) = -0.5 * sign / (s * s);
    }
    d1(j, j) = -d1.row(j).sum();
    d2(j, j) = -d2.row(j).sum();
  }
}

/// Barycentric polynomial differentiation matrices at Gauss-Legendre nodes.
/// Weights lambda_i ~ (-1)^i sqrt((1 - x_i^2) w_i); only ratios enter.
void barycentric_diff_matrices(const std::vector<double>& x, const std::vector<double>& w,
                               Matrix& d1, Matrix& d2) {
  const int n = static_cast<int>(x.size());
  std::vector<double> lam(n);
  for (int i = 0; i < n; ++i) {
    lam[i] = ((i % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - x[i] * x[i]) * w[i]);
  }
  d1.setZero(n, n);
  d2.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d1(i, j) = (lam[j] / lam[i]) / (x[i] - x[j]);
    }
    d1(i, i) = -d1.row(i).sum();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d2(i, j) = 2.0 * d1(i, j) * (d1(i, i) - 1.0 / (x[i] - x[j]));
    }
    d2(i, i) = -d2.row(i).sum();
  }
}

/// Apply a differentiation matrix in difference form:
///   out(i, :) = sum_j D(i, j) * (F(j, :) - F(i, :)).
/// Since every D here annihilates constants analytically, this equals D * F
/// but is exactly zero on constant input and better conditioned near
/// cancellation.
RowMat apply_diff(const Matrix& d, const RowMat& f) {
  RowMat out = RowMat::Zero(f.rows(), f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      if (j == i) continue;
      out.row(i) += d(i, j) * (f.row(j) - f.row(i));
    }
  }
  return out;
}

Eigen::VectorXd apply_diff(const Matrix& d, const Eigen::VectorXd& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      if (j == i) continue;
      const double term = d(i, j) * (f[j] - f[i]) - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    out[i] = sum;
  }
  return out;
}

/// Along the second (azimuth) index: out(:, j) = sum_k D(j, k) (F(:, k) - F(:, j)).
RowMat apply_diff_cols(const Matrix& d, const RowMat& f) {
  RowMat out = RowMat::Zero(f.rows(), f.cols());
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    for (Eigen::Index k = 0; k < f.cols(); ++k) {
      if (k == j) continue;
      out.col(j) += d(j, k) * (f.col(k) - f.col(j));
    }
  }
  return out;
}

}  // namespace

struct Grid::Impl {
  int dim = 0;
  int n_theta = 0;
  int n_phi = 0;
  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;
  std::vector<double> theta;  // per node
  std::vector<double> phi;    // per node
  std::vector<Eigen::Vector3d> e1, e2;

  // dim 2
  Matrix d1, d2;

  // dim 3
  std::vector<double> gl_x, gl_w;            // size n_theta, ascending in x = cos theta
  std::vector<double> sin_theta, cos_theta;  // size n_theta
  Matrix dx1, dx2;                           // polar, in x
  Matrix dphi1, dphi2;                       // azimuth
};

Grid Grid::circle(int n_nodes) {
  if (n_nodes < 4 || n_nodes % 2 != 0) {
    throw std::invalid_argument("Grid::circle: node count must be even and >= 4, got " +
                                std::to_string(n_nodes));
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = 2;
  impl->n_theta = n_nodes;
  const double w = 2.0 * kPi / n_nodes;
  impl->nodes.resize(n_nodes);
  impl->weights.assign(n_nodes, w);
  impl->theta.resize(n_nodes);
  impl->phi.assign(n_nodes, 0.0);
  impl->e1.resize(n_nodes);
  impl->e2.assign(n_nodes, Eigen::Vector3d::Zero());
  for (int k = 0; k < n_nodes; ++k) {
    const double t = 2.0 * kPi * k / n_nodes;
    impl->theta[k] = t;
    impl->nodes[k] = Eigen::Vector3d(std::cos(t), std::sin(t), 0.0);
    impl->e1[k] = Eigen::Vector3d(-std::sin(t), std::cos(t), 0.0);
  }
  trig_diff_matrices(n_nodes, impl->d1, impl->d2);
  return Grid(std::move(impl));
}

Grid Grid::sphere(int n_polar, int n_azimuth) {
  if (n_polar < 8 || n_azimuth < 8 || n_azimuth % 2 != 0) {
    throw std::invalid_argument(
        "Grid::sphere: resolution components must be >= 8 with even azimuth count, got (" +
        std::to_string(n_polar) + ", " + std::to_string(n_azimuth) + ")");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = 3;
  impl->n_theta = n_polar;
  impl->n_phi = n_azimuth;
  gauss_legendre(n_polar, impl->gl_x, impl->gl_w);
  impl->sin_theta.resize(n_polar);
  impl->cos_theta.resize(n_polar);
  for (int i = 0; i < n_polar; ++i) {
    impl->cos_theta[i] = impl->gl_x[i];
    impl->sin_theta[i] = std::sqrt(1.0 - impl->gl_x[i] * impl->gl_x[i]);
  }
  const std::size_t count = static_cast<std::size_t>(n_polar) * n_azimuth;
  impl->nodes.resize(count);
  impl->weights.resize(count);
  impl->theta.resize(count);
  impl->phi.resize(count);
  impl->e1.resize(count);
  impl->e2.resize(count);
  const double wphi = 2.0 * kPi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double st = impl->sin_theta[i];
    const double ct = impl->cos_theta[i];
    const double th = std::acos(ct);
    for (int j = 0; j < n_azimuth; ++j) {
      const double ph = 2.0 * kPi * j / n_azimuth;
      const double cp = std::cos(ph), sp = std::sin(ph);
      const std::size_t idx = static_cast<std::size_t>(i) * n_azimuth + j;
      impl->nodes[idx] = Eigen::Vector3d(st * cp, st * sp, ct);
      impl->weights[idx] = impl->gl_w[i] * wphi;
      impl->theta[idx] = th;
      impl->phi[idx] = ph;
      impl->e1[idx] = Eigen::Vector3d(ct * cp, ct * sp, -st);
      impl->e2[idx] = Eigen::Vector3d(-sp, cp, 0.0);
    }
  }
  barycentric_diff_matrices(impl->gl_x, impl->gl_w, impl->dx1, impl->dx2);
  trig_diff_matrices(n_azimuth, impl->dphi1, impl->dphi2);
  return Grid(std::move(impl));
}

Grid Grid::build(int dim, const std::vector<int>& resolution) {
  if (dim == 2) {
    if (resolution.size() != 1) {
      throw std::invalid_argument("Grid::build: dim 2 takes one resolution component");
    }
    return circle(resolution[0]);
  }
  if (dim == 3) {
    if (resolution.size() != 2) {
      throw std::invalid_argument("Grid::build: dim 3 takes two resolution components");
    }
    return sphere(resolution[0], resolution[1]);
  }
  throw std::invalid_argument("Grid::build: dim must be 2 or 3, got " + std::to_string(dim));
}

int Grid::dim() const { return impl_->dim; }
std::size_t Grid::node_count() const { return impl_->nodes.size(); }
int Grid::n_theta() const { return impl_->n_theta; }
int Grid::n_phi() const { return impl_->n_phi; }
const std::vector<Eigen::Vector3d>& Grid::nodes() const { return impl_->nodes; }
const std::vector<double>& Grid::weights() const { return impl_->weights; }
double Grid::theta(std::size_t i) const { return impl_->theta[i]; }
double Grid::phi(std::size_t i) const { return impl_->phi[i]; }
Eigen::Vector3d Grid::frame1(std::size_t i) const { return impl_->e1[i]; }
Eigen::Vector3d Grid::frame2(std::size_t i) const { return impl_->e2[i]; }

std::vector<int> Grid::resolution() const {
  if (impl_->dim == 2) return {impl_->n_theta};
  return {impl_->n_theta, impl_->n_phi};
}

std::string Grid::resolution_label() const {
  if (impl_->dim == 2) return std::to_string(impl_->n_theta);
  return std::to_string(impl_->n_theta) + "x" + std::to_string(impl_->n_phi);
}

double integrate(const Grid& grid, std::span<const double> values) {
  const auto& w = grid.weights();
  if (values.size() != w.size()) {
    throw std::invalid_argument("integrate: value count does not match grid node count");
  }
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("integrate: non-finite value at node " + std::to_string(i));
    }
    const double term = w[i] * values[i] - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

namespace {

/// Polar-direction derivatives on the product grid.  The azimuth-odd part of a
/// smooth sphere function carries a single sin(theta) factor in x = cos(theta);
/// dividing it out leaves a polynomial-type function that barycentric
/// differentiation handles exactly, so the odd/even split keeps spectral
/// accuracy all the way to the poles.
void polar_derivatives(const Grid::Impl& g, const RowMat& f, RowMat& ft, RowMat& ftt) {
  const int nt = g.n_theta, np = g.n_phi;
  RowMat fe(nt, np), fo(nt, np);
  const int half = np / 2;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const int jo = (j + half) % np;
      fe(i, j) = 0.5 * (f(i, j) + f(i, jo));
      fo(i, j) = 0.5 * (f(i, j) - f(i, jo));
    }
  }
  RowMat a1 = apply_diff(g.dx1, fe);
  RowMat a2 = apply_diff(g.dx2, fe);
  RowMat b = fo;
  for (int i = 0; i < nt; ++i) b.row(i) /= g.sin_theta[i];
  RowMat b1 = apply_diff(g.dx1, b);
  RowMat b2 = apply_diff(g.dx2, b);
  ft.resize(nt, np);
  ftt.resize(nt, np);
  for (int i = 0; i < nt; ++i) {
    const double x = g.cos_theta[i];
    const double s = g.sin_theta[i];
    const double oms = 1.0 - x * x;
    ft.row(i) = -s * a1.row(i) + x * b.row(i) - oms * b1.row(i);
    ftt.row(i) = oms * a2.row(i) - x * a1.row(i) +
                 s * (-b.row(i) - 3.0 * x * b1.row(i) + oms * b2.row(i));
  }
}

void check_input(const Grid& grid, std::span<const double> values, const char* what) {
  if (values.size() != grid.node_count()) {
    throw std::invalid_argument(std::string(what) + ": value count does not match grid");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at node " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

SphereDerivatives differentiate(const Grid& grid, std::span<const double> values) {
  check_input(grid, values, "differentiate");
  const auto& g = grid.impl();
  SphereDerivatives out;
  out.grad.assign(grid.node_count(), Eigen::Vector2d::Zero());
  out.hess.assign(grid.node_count(), Eigen::Vector3d::Zero());
  if (g.dim == 2) {
    Eigen::Map<const Eigen::VectorXd> fmap(values.data(), values.size());
    Eigen::VectorXd f = fmap;
    Eigen::VectorXd d1 = apply_diff(g.d1, f);
    Eigen::VectorXd d2 = apply_diff(g.d2, f);
    for (std::size_t i = 0; i < values.size(); ++i) {
      out.grad[i][0] = d1[i];
      out.hess[i][0] = d2[i];
    }
    return out;
  }
  const int nt = g.n_theta, np = g.n_phi;
  Eigen::Map<const RowMat> f(values.data(), nt, np);
  RowMat fp = apply_diff_cols(g.dphi1, RowMat(f));
  RowMat fpp = apply_diff_cols(g.dphi2, RowMat(f));
  RowMat ft, ftt, ftp, unused;
  polar_derivatives(g, RowMat(f), ft, ftt);
  polar_derivatives(g, fp, ftp, unused);
  for (int i = 0; i < nt; ++i) {
    const double s = g.sin_theta[i];
    const double cot = g.cos_theta[i] / s;
    for (int j = 0; j < np; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * np + j;
      out.grad[idx] = Eigen::Vector2d(ft(i, j), fp(i, j) / s);
      out.hess[idx] = Eigen::Vector3d(ftt(i, j), (ftp(i, j) - cot * fp(i, j)) / s,
                                      fpp(i, j) / (s * s) + cot * ft(i, j));
    }
  }
  return out;
}

std::vector<double> d_theta(const Grid& grid, std::span<const double> values) {
  check_input(grid, values, "d_theta");
  const auto& g = grid.impl();
  std::vector<double> out(values.size());
  if (g.dim == 2) {
    Eigen::Map<const Eigen::VectorXd> f(values.data(), values.size());
    Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = apply_diff(g.d1, Eigen::VectorXd(f));
    return out;
  }
  Eigen::Map<const RowMat> f(values.data(), g.n_theta, g.n_phi);
  RowMat ft, ftt;
  polar_derivatives(g, RowMat(f), ft, ftt);
  Eigen::Map<RowMat>(out.data(), g.n_theta, g.n_phi) = ft;
  return out;
}

std::vector<double> d_phi(const Grid& grid, std::span<const double> values) {
  check_input(grid, values, "d_phi");
  const auto& g = grid.impl();
  if (g.dim != 3) throw std::invalid_argument("d_phi: requires a dim-3 grid");
  std::vector<double> out(values.size());
  Eigen::Map<const RowMat> f(values.data(), g.n_theta, g.n_phi);
  Eigen::Map<RowMat>(out.data(), g.n_theta, g.n_phi) = apply_diff_cols(g.dphi1, RowMat(f));
  return out;
}

}  // namespace centroaffine
