#pragma once

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qps/duality.hpp"

namespace qps {

struct Mat2c {
  std::complex<double> a11, a12, a21, a22;
  std::complex<double> det() const { return a11 * a22 - a12 * a21; }
  double frobenius() const {
    return std::sqrt(std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22));
  }
};

/// Trigonometric polynomial sum_{|k| <= degree} c_k e^{i k theta}.
class FourierSeries {
public:
  FourierSeries() = default;
  explicit FourierSeries(int degree)
      : degree_(degree), c_(static_cast<size_t>(2 * degree + 1), {0.0, 0.0}) {}

  int degree() const { return degree_; }
  std::complex<double>& at(int k) { return c_[static_cast<size_t>(k + degree_)]; }
  std::complex<double> at(int k) const {
    if (k < -degree_ || k > degree_) return {0.0, 0.0};
    return c_[static_cast<size_t>(k + degree_)];
  }
  std::complex<double> eval(double theta) const;

  /// Trig interpolation: coefficients of degree <= (M-1)/2 from M equispaced
  /// samples (plain DFT; exact when the data is a polynomial of that degree).
  static FourierSeries from_samples(std::span<const std::complex<double>> samples, int degree);

private:
  int degree_ = 0;
  std::vector<std::complex<double>> c_{{0.0, 0.0}};
};

enum class ConjKind { Raw, Rotation, Triangular };

/// theta-dependent change of variables with constant Floquet matrix:
///   A(theta) Z(theta) = Z(theta + 2 pi omega) B.
/// Entries are stored as Fourier coefficients so every theta-shift is
/// evaluated by coefficient sums, never by grid interpolation.
struct Conjugation {
  ConjKind kind = ConjKind::Raw;
  int grid_size = 0;  // sampling grid used for residual and determinant stats
  std::array<FourierSeries, 4> entries;  // z11, z12, z21, z22
  Mat2c floquet{};
  double residual = 0;
  std::complex<double> det_mean{};
  double det_variation = 0;  // max |det - mean| / |mean| over the grid
  double c = 0;              // upper-triangular entry when kind == Triangular
  double phi = 0;            // Floquet exponent when kind != Triangular

  // cocycle this conjugation reduces, kept so stats can be recomputed
  double energy = 0;
  Potential potential;
  Frequency omega = Frequency::golden();

  Mat2c z_at(double theta) const;
  /// Real evaluation for Rotation/Triangular kinds (imaginary parts checked
  /// at construction).
  Mat2 z_real_at(double theta) const;
};

struct DegenerateY : std::runtime_error {
  explicit DegenerateY(double d)
      : std::runtime_error("degenerate Y: |det| = " + std::to_string(d) +
                           "; v and conj(v) look linearly dependent"),
        abs_det(d) {}
  double abs_det;
};

struct SmallDivisorOverflow : std::runtime_error {
  SmallDivisorOverflow(int mode, double div)
      : std::runtime_error("small divisor |e^{2 pi i k w} - 1| = " + std::to_string(div) +
                           " at k = " + std::to_string(mode)),
        k(mode), divisor(div) {}
  int k;
  double divisor;
};

struct VanishingV : std::runtime_error {
  VanishingV(double m, bool anti)
      : std::runtime_error(anti ? "v solves v(theta+2 pi w) = -A v (frequency-halving case, "
                                  "not constructed here)"
                                : "v vanishes on the torus: min |v| = " + std::to_string(m)),
        min_norm(m), antiperiodic(anti) {}
  double min_norm;
  bool antiperiodic;
};

/// Y(theta) = (v | conj v) with v = (f(theta + 2 pi w), e^{-i phi} f(theta))^T
/// built from a Bloch wave; B = diag(e^{i phi}, e^{-i phi}).
Conjugation build_y(const BlochWave& w, const Potential& v, const Frequency& omega,
                    int grid_size = 1024, double dep_tol = 1e-8);

struct DependenceResult {
  bool dependent = false;
  int k = 0, j = 0;       // phi = pi j + pi k w within tol when dependent
  double distance = 0;    // best |phi - pi j - pi k w|
  double min_abs_det_y = 0;  // cross-check: small iff dependent
};

DependenceResult dependence_test(const BlochWave& w, const Frequency& omega,
                                 double tol = 1e-8, int kmax = 200);

/// Rescale det Y to -i/2 (conjugating the pair if needed) and compose with
/// ((1, -i), (1, i)); the result is real, det 1, with a rotation Floquet
/// matrix of angle +-phi.
Conjugation realify(const Conjugation& raw);

/// Real quasi-periodic 2-vector as Fourier data, v(theta) in R^2.
struct QpVec2 {
  FourierSeries c1, c2;
  Vec2 at(double theta) const {
    return {c1.eval(theta).real(), c2.eval(theta).real()};
  }
};

/// Turn a gap-edge Bloch wave (phi ~ 0 or pi mod 2 pi) into the real solution
/// v(theta + 2 pi w) = A(theta) v(theta). Other resonant phases need the
/// frequency-halving construction and are rejected with that report.
QpVec2 real_solution_from_bloch(const BlochWave& w, const Frequency& omega,
                                double parity_tol = 1e-6);

struct ResonantReduceOptions {
  int kcut = 256;          // Fourier cutoff of the cohomological solve
  double div_tol = 1e-10;  // divisor floor
  double v_tol = 1e-8;     // min |v| gate
  double input_tol = 1e-6; // residual gate on the input solution
  double negligible = 1e-13;  // numerator floor under which a bad divisor is ignored
};

struct ResonantReduction {
  Conjugation conj;  // kind Triangular, det Z = +1
  double c = 0;
};

/// Triangularize along v, then remove the oscillatory part of the (1,2)
/// entry with the cohomological equation solved in Fourier modes |k| <= kcut.
ResonantReduction resonant_reduce(const QpVec2& v_sol, const Potential& v,
                                  const Frequency& omega, double a, int grid_size = 1024,
                                  const ResonantReduceOptions& opts = {});

struct ResidualReport {
  double max_res = 0;
  double mean_res = 0;
};

/// Recompute the conjugation identity on a doubled grid.
ResidualReport verify_conjugation(const Conjugation& z, const Potential& v, double a,
                                  const Frequency& omega);

/// Winding degree of theta -> first column of Z (real kinds only).
int winding_degree_first_column(const Conjugation& z, int samples = 4096);

}  // namespace qps
