#pragma once

#include "centroaffine/invariants.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace centroaffine {

/// Named hypothesis attached to a check: the measured diagnostic value and the
/// verdict.  A failed gating hypothesis turns the whole check not-applicable.
struct HypothesisFlag {
  std::string name;
  double value = 0.0;
  bool satisfied = true;
};

/// Direction in which the values of a stored chain are expected to run.
enum class ChainOrder { ascending, descending };

/// Outcome of one named inequality check.
///
/// `chain` holds the compared values in the order the statement reads; when a
/// check bundles several independent chains (one per exponent, or one per
/// stated sequence), `segment_starts` marks where each begins.  Adjacent gaps
/// are oriented by `order`, so a correct statement has every gap nonnegative,
/// and each gap is normalized by max(1, |left|, |right|) so that one tolerance
/// serves chains of mixed magnitude.  `slack` is the smallest normalized gap,
/// `max_gap` the largest; the equality flag requires the whole chain to sit
/// inside tolerance, not just the tightest link.
struct CheckResult {
  std::string id;
  std::string body_label;
  std::vector<int> resolution;
  ChainOrder order = ChainOrder::ascending;
  std::vector<double> chain;
  std::vector<std::size_t> segment_starts;
  double slack = 0.0;
  double max_gap = 0.0;
  double tol = 0.0;
  bool applicable = true;
  bool pass = false;
  bool equality_expected = false;
  bool equality_observed = false;
  std::vector<HypothesisFlag> hypotheses;
  std::vector<std::pair<std::string, double>> details;
  std::string note;
  /// Filled by run_suite: slack re-measured on the coarse grid and the
  /// stability verdict |slack_fine - slack_coarse| < 0.5 max(|fine|,|coarse|,tol).
  double slack_coarse = std::numeric_limits<double>::quiet_NaN();
  bool resolution_stable = true;
};

/// Volume-product lower bound Omega_n^2 / n^2 <= Vol * Vol(polar); equality
/// exactly on centered ellipsoids.
CheckResult check_holder_lower(const FieldTable& fields);

/// Mixed-curvature monotonicity bounds for a positive node function f with
/// ratio extrema m = min f/h, M = max f/h:
///   m n Vol <= integral f s(h,...,h)    <= M n Vol   and
///   m^2 n Vol <= integral f s(f,h,...,h) <= M^2 n Vol.
/// The quadratic chain assumes the support body of f (largest body fitting
/// under f) carries a continuous positive curvature function; the measured
/// proxy for that hypothesis is attached and gates applicability.
CheckResult check_monotonicity_bounds(const FieldTable& fields, std::span<const double> f);

/// 0 <= Omega_{2,n} <= (n(n-1)/2)(M - m) Vol with (m, M) the centro-affine
/// curvature extrema; the upper bound carries the same support-body
/// curvature hypothesis for f = h sqrt(K0).
CheckResult check_omega2_bounds(const FieldTable& fields);

/// Two-sided volume-product sandwich:
///   Omega_n^2/n^2 <= Vol Vol(polar)
///                 <= (2/(n(n-1))) min{Vol Omega_2n(K), Vol(polar) Omega_2n(polar)}
///                    + Omega_n^2/n^2.
/// Needs fields of the numerically constructed polar body for the second
/// variation on the polar side.
CheckResult check_volume_product_sandwich(const FieldTable& fields, const FieldTable& polar_fields);

/// Reverse volume-product bound under the golden-ratio condition
/// M/m <= (1+sqrt 5)/2 on the centro-affine curvature extrema:
///   Vol Vol(polar) <= (Omega_n^2/n^2) [1 - (M-m)/sqrt(Mm)]^{-1}.
/// Not applicable when the ratio condition (or the support-body curvature
/// hypothesis for f = h sqrt(K0)) fails.
CheckResult check_golden_ratio_bound(const FieldTable& fields);

/// Interpolation bound between Omega_p and Omega_1: for each exponent p,
///   Omega_p^{n+p} / Vol^{n-p}  vs  n^{p-1} (Vol Vol(polar))^{p-1} Omega_1^{n+1} / Vol^{n-1},
/// with <= for p > 1 and >= for p < 1 (p = -n excluded); p = 1 is an identity.
/// An empty p_list selects {-1/2, 0, 1/2, 2, n, 2n}.
CheckResult check_p_affine_interpolation(const FieldTable& fields,
                                         std::span<const double> p_list = {});

/// Two-sided bound on the affine isoperimetric ratio Omega_1^{n+1}/Vol^{n-1}
/// through the second variation: with D = (2/(n-1)) Omega_2n Vol + Omega_n^2/n,
///   Omega_n^{2n} / D^{n-1} <= Omega_1^{n+1}/Vol^{n-1} <= n^n D.
CheckResult check_affine_ratio_bounds(const FieldTable& fields);

/// Result of minimizing the surface area of T K over volume-preserving
/// symmetric transforms T = exp(Z), Z traceless symmetric.
struct SurfaceMinimum {
  Eigen::MatrixXd transform;  ///< determinant-one minimizer
  double surface = 0.0;       ///< surface area of (transform K)
  double stationarity = 0.0;  ///< max |central-difference slope| over the chart, scaled
  bool converged = true;      ///< best simplex run met its tolerance before the cap
  int evaluations = 0;        ///< total objective evaluations over all starts
};

/// Derivative-free multistart simplex descent of S(T K) over the traceless
/// symmetric chart (2 directions in the plane, 5 in space).
SurfaceMinimum minimize_surface_sl(const Body& body, const Grid& grid);

/// Isoperimetric-type lower bound on S^n(T K)/Vol^{n-1}(K) with T from
/// minimize_surface_sl (the bound holds for every volume-preserving T, so the
/// minimizer is the sharpest test): with R = Omega_1^{n+1}/Vol^{n-1},
///   S^n(TK)/Vol^{n-1} >= (n / omega_n^{2n-3}) max{Omega_n^{2n}/R, n^{n-n^2} R^{n-1}}.
/// Also re-derives the ball constant n^{n-1} Vol(B)^{3(n-1)}/S(B)^n =
/// omega_n^{2n-3}/n and attaches its round-off residual.  Meaningful for
/// bodies with centroid at (or numerically near) the origin.
CheckResult check_isoperimetric_like(const Body& body, const FieldTable& fields);

/// Upper bound of the entropy invariant by the affine isoperimetric ratio:
///   Omega_K <= Omega_1^{n+1} / (n Vol(polar))^{n+1}.
CheckResult check_paouris_upper(const FieldTable& fields);

/// Term-by-term monotone decrease of the three dyadic sequence chains built
/// from p-affine surface areas (ladder index p = 1..p_max):
///   shrinking exponents on K:       Omega_{n/(2^p-1)}(K)^{2^p}  / (n Vol)^{2^p-2},
///   growing exponents on the polar: Omega_{n(2^p-1)}(Ko)^{2^p}  / (n Vol)^{2^p-2},
///   growing exponents on K:         Omega_{n(2^p-1)}(K)^{2^p}   / (n Vol(polar))^{2^p-2}.
/// All three are constant exactly on centered ellipsoids.
CheckResult check_sequence_chains(const FieldTable& fields, const FieldTable& polar_fields,
                                  int p_max = 6);

/// Lower bounds of the growing-exponent chain by the entropy invariants, in
/// the corrected orientation witnessed by ellipsoid closed forms:
///   Omega_K^{1/n} (n Vol(polar))^2            <= every growing-exponent term, and
///   (Omega_K Omega_{Ko})^{1/n}                <= every paired-product term
///                                                (Omega_q(K) Omega_q(Ko))^{2^p} / (n^2 Vol Vol(polar))^{2^p}.
/// The stated orientation without the 1/n-th root is evaluated and attached
/// to the details for the corrections record.
CheckResult check_omega_K_sequence_bounds(const FieldTable& fields,
                                          const FieldTable& polar_fields, int p_max = 6);

/// Suite configuration: the two grid resolutions, the interpolation exponent
/// list (empty selects the default), the sequence ladder depth, and a
/// tolerance multiplier applied to the per-dimension base tolerance.
struct SuiteConfig {
  std::vector<int> coarse;
  std::vector<int> fine;
  std::vector<double> p_list;
  int p_max = 6;
  double tol_scale = 1.0;
};

/// Base tolerance on normalized slack: 1e-7 in the plane, 1e-4 in space.
double suite_base_tolerance(int dim);

/// Coarse/fine resolutions used when a config does not override them:
/// {128}/{256} in the plane, {12,24}/{16,32} in space.
SuiteConfig default_suite_config(int dim);

/// Run the whole catalogue at the coarse and the fine resolution; a check
/// passes only when it passes at both and the slack is resolution-stable.
/// Results carry the fine-grid numbers with the coarse slack attached;
/// equality_expected is set from the body.
std::vector<CheckResult> run_suite(const Body& body, const SuiteConfig& config);

}  // namespace centroaffine
