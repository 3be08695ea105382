#pragma once

#include "centroaffine/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace centroaffine {

/// p-affine surface area: integral of K0^{p/(n+p)} against the cone measure
/// h f_K dsigma (total mass n Vol).  p = -n is not admissible.
double omega_p(const FieldTable& fields, double p);

/// Omega_1^{n+1} / Vol^{n-1}, invariant under GL(n).
double affine_isoperimetric_ratio(const FieldTable& fields);

/// Second variation of volume under the centro-affine normal flow:
/// (n(n-1)/2) Vol(polar) - ((n-1)/2) integral of f s(f, h, ...) with
/// f = h sqrt(K0), always differentiated spectrally from node values.
double omega_2n(const FieldTable& fields);
double omega_2n(const Body& body, const Grid& grid);

/// Canonical entropy form: ln Omega_K = -(1/Vol(polar)) integral of
/// K0 ln K0 against the cone measure.
double entropy_omega_K(const FieldTable& fields);

/// Divergence of the normalized curvature measure from the normalized cone
/// measure: (1/(n Vol polar)) integral of K0 ln(K0 Vol/Vol polar) d(cone).
double kl_divergence(const FieldTable& fields);

/// Geometric mean of the centro-affine curvature over the cone measure.
double lambda_K(const FieldTable& fields);

/// The four limit constructions that approximate Omega_K (kinds paouris,
/// alt1, alt2) or Lambda (kind lambda) through p-affine surface areas.
enum class SequenceKind { paouris, alt1, alt2, lambda };

/// One ladder entry.  `paper` carries the exponent and orientation exactly as
/// the source statements read; `corrected` carries the variant whose limit
/// actually matches the entropy quantities (witnessed by ellipsoid closed
/// forms), already inverted where the corrected orientation is a reciprocal.
struct SequenceTerm {
  int p = 0;  ///< ladder parameter: the Omega subscript for paouris, else the dyadic index
  double paper = 0.0;
  double corrected = 0.0;
};

struct LimitSequence {
  SequenceKind kind = SequenceKind::paouris;
  std::vector<SequenceTerm> terms;
  double paper_tail = 0.0;      ///< one Richardson step in 2^{-p}, log domain
  double corrected_tail = 0.0;  ///< same, on the corrected terms
};

/// Evaluate the chosen sequence on a p-ladder up to p_max (<= 48); all
/// exponent arithmetic is carried out in the log domain.
LimitSequence limit_sequence(const FieldTable& fields, SequenceKind kind, int p_max);

/// Every scalar invariant of one body at one resolution.
struct InvariantReport {
  std::string body_label;
  std::vector<int> resolution;
  double vol = 0.0;
  double vol_polar = 0.0;
  double surface = 0.0;
  std::vector<std::pair<double, double>> omega_table;  ///< (p, Omega_p)
  double omega_1 = 0.0;
  double omega_n = 0.0;
  double omega_2n = 0.0;
  double isoperimetric_ratio = 0.0;
  double k0_min = 0.0;
  double k0_max = 0.0;
  double omega_K_entropy = 0.0;
  double omega_K_paouris = 0.0;  ///< corrected tails of the three constructions
  double omega_K_alt1 = 0.0;
  double omega_K_alt2 = 0.0;
  double lambda_entropy = 0.0;
  double lambda_limit = 0.0;
  double kl = 0.0;
};

InvariantReport compute_report(const Body& body, const Grid& grid,
                               const std::vector<double>& p_list, int p_max);

}  // namespace centroaffine
