#include "centroaffine/invariants.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace centroaffine {
namespace {

constexpr double kPExclusionTol = 1e-12;

/// Integral of g against the cone measure h f_K dsigma.
double cone_integral(const FieldTable& fields, const std::vector<double>& g) {
  const std::size_t m = fields.grid.node_count();
  std::vector<double> integrand(m);
  for (std::size_t i = 0; i < m; ++i) integrand[i] = g[i] * fields.cone_density[i];
  return integrate(fields.grid, integrand);
}

/// Mean of expm1(alpha * ln K0) under the normalized cone measure (use_q
/// false) or the normalized curvature-weighted cone measure (use_q true).
/// Working with expm1 keeps the small quantity at full relative precision
/// when alpha is tiny, which the large outer exponents would otherwise
/// amplify into the leading digits.
double expm1_moment(const FieldTable& fields, const std::vector<double>& log_k0,
                    double alpha, bool use_q) {
  const std::size_t m = fields.grid.node_count();
  std::vector<double> integrand(m);
  double mass = 0.0;
  std::vector<double> weight(m);
  for (std::size_t i = 0; i < m; ++i) {
    weight[i] = use_q ? fields.k0[i] * fields.cone_density[i] : fields.cone_density[i];
  }
  mass = integrate(fields.grid, weight);
  for (std::size_t i = 0; i < m; ++i) {
    integrand[i] = std::expm1(alpha * log_k0[i]) * weight[i];
  }
  return integrate(fields.grid, integrand) / mass;
}

/// ln of ((mean of K0^alpha) ^ beta) in the stable form beta * log1p(...).
double log_power_term(const FieldTable& fields, const std::vector<double>& log_k0,
                      double alpha, double beta, bool use_q) {
  return beta * std::log1p(expm1_moment(fields, log_k0, alpha, use_q));
}

}  // namespace

double omega_p(const FieldTable& fields, double p) {
  const double n = static_cast<double>(fields.dim);
  if (std::abs(p + n) < kPExclusionTol) {
    throw std::invalid_argument("omega_p: exponent p = -n is not admissible");
  }
  const double alpha = p / (n + p);
  const std::size_t m = fields.grid.node_count();
  std::vector<double> integrand(m);
  for (std::size_t i = 0; i < m; ++i) {
    integrand[i] = std::pow(fields.k0[i], alpha) * fields.cone_density[i];
  }
  return integrate(fields.grid, integrand);
}

double affine_isoperimetric_ratio(const FieldTable& fields) {
  const int n = fields.dim;
  const double o1 = omega_p(fields, 1.0);
  const double v = volume(fields);
  return std::pow(o1, n + 1) / std::pow(v, n - 1);
}

double omega_2n(const FieldTable& fields) {
  const int n = fields.dim;
  const std::size_t m = fields.grid.node_count();
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = fields.h[i] * std::sqrt(fields.k0[i]);
  const std::vector<double> s = (n == 2) ? mixed_curvature(fields.grid, f)
                                         : mixed_curvature(fields.grid, f, fields.h);
  std::vector<double> integrand(m);
  for (std::size_t i = 0; i < m; ++i) {
    integrand[i] = f[i] * s[i];
    if (!std::isfinite(integrand[i])) {
      throw ValidationError(
          "omega_2n: spectral differentiation of h sqrt(K0) produced a non-finite "
          "value; raise the grid resolution");
    }
  }
  const double vp = polar_volume(fields);
  const double half_nm1 = 0.5 * (n - 1);
  return half_nm1 * n * vp - half_nm1 * integrate(fields.grid, integrand);
}

double omega_2n(const Body& body, const Grid& grid) {
  return omega_2n(evaluate_fields(body, grid));
}

double entropy_omega_K(const FieldTable& fields) {
  const std::size_t m = fields.grid.node_count();
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = fields.k0[i] * std::log(fields.k0[i]);
  return std::exp(-cone_integral(fields, g) / polar_volume(fields));
}

double kl_divergence(const FieldTable& fields) {
  const double v = volume(fields);
  const double vp = polar_volume(fields);
  const double shift = std::log(v / vp);
  const std::size_t m = fields.grid.node_count();
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) {
    g[i] = fields.k0[i] * (std::log(fields.k0[i]) + shift);
  }
  return cone_integral(fields, g) / (fields.dim * vp);
}

double lambda_K(const FieldTable& fields) {
  const double v = volume(fields);
  const std::size_t m = fields.grid.node_count();
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = std::log(fields.k0[i]);
  return std::exp(cone_integral(fields, g) / (fields.dim * v));
}

LimitSequence limit_sequence(const FieldTable& fields, SequenceKind kind, int p_max) {
  if (p_max < 1 || p_max > 48) {
    throw std::invalid_argument("limit_sequence: p_max must lie in [1, 48]");
  }
  const double n = static_cast<double>(fields.dim);
  const std::size_t m = fields.grid.node_count();
  std::vector<double> log_k0(m);
  for (std::size_t i = 0; i < m; ++i) log_k0[i] = std::log(fields.k0[i]);

  LimitSequence seq;
  seq.kind = kind;
  std::vector<double> log_paper;
  std::vector<double> log_corrected;

  if (kind == SequenceKind::paouris) {
    // Terms (Omega_p / (n Vol polar))^{n+p} on the dyadic ladder p = 2^j.
    // The printed exponent already has the entropy quantity as its limit,
    // so both variants coincide.
    for (int j = 0; j <= p_max; ++j) {
      const double p = std::ldexp(1.0, j);
      const double lt = log_power_term(fields, log_k0, -n / (n + p), n + p, true);
      log_paper.push_back(lt);
      log_corrected.push_back(lt);
      seq.terms.push_back({static_cast<int>(p), std::exp(lt), std::exp(lt)});
    }
  } else {
    for (int p = 1; p <= p_max; ++p) {
      const double two_p = std::ldexp(1.0, p);
      double lp = 0.0, lc = 0.0;
      switch (kind) {
        case SequenceKind::alt1:
          // (Omega_{n(2^p-1)} / (n Vol polar))^{2^p}: the printed exponent
          // 2^p lands on the n-th root of the entropy value; the corrected
          // exponent n 2^p recovers it.
          lp = log_power_term(fields, log_k0, -1.0 / two_p, two_p, true);
          lc = n * lp;
          break;
        case SequenceKind::alt2:
          // Printed orientation (Omega_{-(n+2^p)}(polar) / (n Vol))^{2^p},
          // evaluated on this body through the exponent duality as
          // Omega_{-n^2/(n+2^p)} over the normalized cone measure.  The
          // corrected orientation keeps the body and divides by n Vol(polar);
          // its limit is the reciprocal of the entropy value, so the
          // corrected term is stored inverted.
          lp = log_power_term(fields, log_k0, -n / two_p, two_p, false);
          lc = -log_power_term(fields, log_k0, n / two_p, two_p, true);
          break;
        case SequenceKind::lambda:
          // (Omega_{-n/2^p} / (n Vol))^{2^p} tends to the reciprocal of the
          // geometric-mean curvature; the corrected term is the reciprocal.
          lp = log_power_term(fields, log_k0, -1.0 / (two_p - 1.0), two_p, false);
          lc = -lp;
          break;
        default:
          break;
      }
      log_paper.push_back(lp);
      log_corrected.push_back(lc);
      seq.terms.push_back({p, std::exp(lp), std::exp(lc)});
    }
  }

  // The log-domain error decays like c 2^{-p} along each ladder, so one
  // Richardson step on the last two terms cancels the leading tail.
  const std::size_t k = log_paper.size();
  if (k >= 2) {
    seq.paper_tail = std::exp(2.0 * log_paper[k - 1] - log_paper[k - 2]);
    seq.corrected_tail = std::exp(2.0 * log_corrected[k - 1] - log_corrected[k - 2]);
  } else {
    seq.paper_tail = std::exp(log_paper[0]);
    seq.corrected_tail = std::exp(log_corrected[0]);
  }
  return seq;
}

InvariantReport compute_report(const Body& body, const Grid& grid,
                               const std::vector<double>& p_list, int p_max) {
  const FieldTable fields = evaluate_fields(body, grid);
  InvariantReport rep;
  rep.body_label = body.label();
  rep.resolution = grid.resolution();
  rep.vol = volume(fields);
  rep.vol_polar = polar_volume(fields);
  rep.surface = surface_area(fields);
  for (double p : p_list) rep.omega_table.emplace_back(p, omega_p(fields, p));
  rep.omega_1 = omega_p(fields, 1.0);
  rep.omega_n = omega_p(fields, static_cast<double>(fields.dim));
  rep.omega_2n = omega_2n(fields);
  rep.isoperimetric_ratio = affine_isoperimetric_ratio(fields);
  const auto extrema = curvature_extrema(fields);
  rep.k0_min = extrema.first;
  rep.k0_max = extrema.second;
  rep.omega_K_entropy = entropy_omega_K(fields);
  rep.omega_K_paouris = limit_sequence(fields, SequenceKind::paouris, p_max).corrected_tail;
  rep.omega_K_alt1 = limit_sequence(fields, SequenceKind::alt1, p_max).corrected_tail;
  rep.omega_K_alt2 = limit_sequence(fields, SequenceKind::alt2, p_max).corrected_tail;
  rep.lambda_entropy = lambda_K(fields);
  rep.lambda_limit = limit_sequence(fields, SequenceKind::lambda, p_max).corrected_tail;
  rep.kl = kl_divergence(fields);
  return rep;
}

}  // namespace centroaffine
