#pragma once

// Reference helpers for tests: values here are computed independently of the
// library code paths they are used to check.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature, absolute tolerance tol.
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Perimeter of the axis-aligned ellipse with semi-axes a, b.
inline double ellipse_perimeter(double a, double b) {
  return integrate_1d(
      [a, b](double t) {
        const double s = std::sin(t), c = std::cos(t);
        return std::sqrt(a * a * s * s + b * b * c * c);
      },
      0.0, 2.0 * kPi);
}

}  // namespace oracle
