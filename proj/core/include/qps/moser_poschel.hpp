#pragma once

#include <span>
#include <utility>

#include "qps/reducibility.hpp"

namespace qps {

/// First-order perturbation matrix P(theta) of the triangularized cocycle,
///   P = ((z11 z12 - c z11^2,  -c z11 z12 + z12^2), (-z11^2,  -z11 z12)),
/// from the first row of Z; trace P = 0 identically. The perturbed family it
/// conjugates is A_{a, V - alpha W}: positive alpha moves along +W in the
/// energy direction (for W = 1 this is literally the energy a + alpha).
Mat2 perturbation_matrix(const Conjugation& z, double theta);

struct MPAverages {
  double avg11 = 0;    // [W z11^2]
  double avg1112 = 0;  // [W z11 z12]
  double avg12 = 0;    // [W z12^2]
};

/// Trapezoid averages of W times the squared first-row entries of Z.
MPAverages mp_averages(const Conjugation& z, const Potential& w, int grid_size = 1024);

enum class GapSide { None, Left, Right };

struct MPReport {
  double c = 0;
  double avg11 = 0, avg1112 = 0, avg12 = 0;
  double d_tilde = 0;  // det of the averaged traceless matrix (c = 0 branch)
  bool condition_c_ne0 = false;   // c != 0 and [W z11^2] != 0
  bool condition_c_eq0 = false;   // c == 0 and det D~ < 0 (hyperbolic)
  bool condition_alpha = false;   // c alpha [W z11^2] < 0 throughout the range
  bool dichotomy_predicted = false;
  GapSide predicted_gap_side = GapSide::None;  // side of a where ids is locally constant
  double predicted_gamma = 0;      // sqrt|c [W z11^2]|, per sqrt|alpha|
  double predicted_rot_coeff = 0;  // same constant on the rotation side (angle units)
};

/// Leading-order dichotomy and gap-side prediction for the perturbed family
/// over alpha in [alpha_lo, alpha_hi] (one-signed range).
MPReport mp_analyze(double c, const MPAverages& av, double alpha_lo, double alpha_hi,
                    double zero_tol = 1e-10);

struct DegenerateFit : std::runtime_error {
  DegenerateFit() : std::runtime_error("sqrt_fit: values underflow the fit tolerance") {}
};

struct SqrtFit {
  double exponent = 0;
  double coefficient = 0;
  double r2 = 0;
};

/// log-log least squares of |value| against alpha; exponent ~ 0.5 checks the
/// square-root law. Needs >= 5 samples spanning >= 2 decades.
SqrtFit sqrt_fit(std::span<const std::pair<double, double>> samples, double floor = 1e-300);

struct CollapsedGapOptions {
  long cocycle_steps = 2000000;
  double theta0 = 0.0;
  double zero_floor = 2e-6;  // |rot differences| below this count as constant
  double r2_min = 0.8;
};

struct CollapsedGapResult {
  enum class Kind { DifferentiableRot, SqrtEdge, Undetermined };
  Kind kind = Kind::Undetermined;
  double value = 0;  // |slope| for DifferentiableRot, sqrt coefficient for SqrtEdge
  double exponent = 0;
  double r2 = 0;
};

/// Fit |rot(a0 + h) - rot(a0)| against h: exponent ~ 1 means the rotation
/// number is differentiable at a0 (collapsed gap), ~ 1/2 means a sqrt edge.
CollapsedGapResult collapsed_gap_test(double a0, const Potential& v, const Frequency& omega,
                                      std::span<const double> h_seq,
                                      const CollapsedGapOptions& opts = {});

struct DegenerateNormalization : std::runtime_error {
  DegenerateNormalization()
      : std::runtime_error("gap_opening_shift: [y1] vanishes; renormalize Z first") {}
};

struct GapOpeningShiftResult {
  double alpha_shift = 0;  // -[W y1] / [y1]
  double det_y2 = 0;       // -[W y1][y2] + [W y2][y1]
  double det_y3 = 0;       // -[W y1][y3] + [W y3][y1]
  bool generic = false;    // either determinant nonzero -> shifted W opens the gap
};

/// Corollary-style shift for collapsed gaps: y1 = (z11^2 + z12^2)/2,
/// y2 = (z11^2 - z12^2)/2, y3 = z11 z12.
GapOpeningShiftResult gap_opening_shift(const Conjugation& z, const Potential& w,
                                        int grid_size = 1024, double tol = 1e-10);

}  // namespace qps
