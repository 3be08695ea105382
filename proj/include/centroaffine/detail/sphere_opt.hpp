#pragma once

// Local maximization helpers on the unit circle / sphere.  Callers locate the
// basin with their own coarse scan; these routines polish the maximizer until
// the objective is stationary to ~1e-13 relative.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

namespace centroaffine::detail {

struct SphereOpt {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  double value = 0.0;
  bool converged = false;
  int evals = 0;
};

/// Brent-style 1D maximization of obj(angle) starting from a bracketing
/// midpoint: requires obj(center) >= max(obj(center - half), obj(center + half)).
inline SphereOpt refine_max_circle(const std::function<double(double)>& obj, double center,
                                   double half, int max_iters = 120) {
  const double gold = 0.3819660112501051;
  double a = center - half, b = center + half;
  double x = center, w = center, v = center;
  int evals = 0;
  auto f = [&](double t) {
    ++evals;
    return obj(t);
  };
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  bool converged = false;
  for (int iter = 0; iter < max_iters; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = 1e-12 + 1e-11 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) {
      converged = true;
      break;
    }
    bool use_golden = true;
    if (std::abs(e) > tol1) {
      // parabolic fit through x, w, v
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u_try = x + d;
        if (u_try - a < tol2 || b - u_try < tol2) d = (m > x) ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    const double xn = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fn = f(xn);
    if (fn >= fx) {
      if (xn < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = xn; fx = fn;
    } else {
      if (xn < x) a = xn; else b = xn;
      if (fn >= fw || w == x) {
        v = w; fv = fw;
        w = xn; fw = fn;
      } else if (fn >= fv || v == x || v == w) {
        v = xn; fv = fn;
      }
    }
  }
  SphereOpt out;
  out.u = Eigen::Vector3d(std::cos(x), std::sin(x), 0.0);
  out.value = fx;
  out.converged = converged;
  out.evals = evals;
  return out;
}

/// Quadratic-model ascent on the sphere in tangent coordinates, with cross
/// term; shrinks the stencil as steps shrink.
inline SphereOpt refine_max_sphere(const std::function<double(const Eigen::Vector3d&)>& obj,
                                   Eigen::Vector3d u0, double step, int max_iters = 60) {
  int evals = 0;
  auto eval = [&](const Eigen::Vector3d& u) {
    ++evals;
    return obj(u);
  };
  u0.normalize();
  double f0 = eval(u0);
  double h = step;
  bool converged = false;
  int stall = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    // orthonormal tangent frame at u0
    Eigen::Vector3d t1 = u0.cross((std::abs(u0.z()) < 0.9) ? Eigen::Vector3d::UnitZ()
                                                           : Eigen::Vector3d::UnitX());
    t1.normalize();
    Eigen::Vector3d t2 = u0.cross(t1);
    auto at = [&](double s, double t) {
      return eval((u0 + s * t1 + t * t2).normalized());
    };
    const double fps = at(h, 0.0), fms = at(-h, 0.0);
    const double fpt = at(0.0, h), fmt = at(0.0, -h);
    const double fpp = at(h, h), fmm = at(-h, -h);
    const double gs = (fps - fms) / (2.0 * h);
    const double gt = (fpt - fmt) / (2.0 * h);
    const double hss = (fps - 2.0 * f0 + fms) / (h * h);
    const double htt = (fpt - 2.0 * f0 + fmt) / (h * h);
    const double hst = (fpp + fmm + 2.0 * f0 - fps - fms - fpt - fmt) / (2.0 * h * h);
    double ds, dt;
    const double det = hss * htt - hst * hst;
    if (hss < 0.0 && det > 0.0) {
      ds = -(htt * gs - hst * gt) / det;
      dt = -(hss * gt - hst * gs) / det;
    } else {
      // not concave at this scale: take a cautious gradient step
      const double gn = std::hypot(gs, gt);
      if (gn == 0.0) { ds = dt = 0.0; }
      else { ds = gs / gn * h; dt = gt / gn * h; }
    }
    const double dn = std::hypot(ds, dt);
    if (dn > 2.0 * h) {
      ds *= 2.0 * h / dn;
      dt *= 2.0 * h / dn;
    }
    Eigen::Vector3d u1 = (u0 + ds * t1 + dt * t2).normalized();
    const double f1 = eval(u1);
    const double best_stencil = std::max({fps, fms, fpt, fmt, fpp, fmm});
    if (f1 >= f0) {
      const double gain = f1 - f0;
      u0 = u1;
      f0 = f1;
      if (gain < 1e-13 * std::max(1.0, std::abs(f0))) ++stall; else stall = 0;
    } else if (best_stencil > f0) {
      // fall back to the best stencil point
      if (best_stencil == fps) u0 = (u0 + h * t1).normalized();
      else if (best_stencil == fms) u0 = (u0 - h * t1).normalized();
      else if (best_stencil == fpt) u0 = (u0 + h * t2).normalized();
      else if (best_stencil == fmt) u0 = (u0 - h * t2).normalized();
      else if (best_stencil == fpp) u0 = (u0 + h * (t1 + t2)).normalized();
      else u0 = (u0 - h * (t1 + t2)).normalized();
      f0 = best_stencil;
      stall = 0;
    } else {
      ++stall;
    }
    h = std::clamp(dn, h * 0.25, h);
    if (stall >= 2 || h < 1e-9) {
      converged = true;
      break;
    }
  }
  SphereOpt out;
  out.u = u0;
  out.value = f0;
  out.converged = converged;
  out.evals = evals;
  return out;
}

}  // namespace centroaffine::detail
