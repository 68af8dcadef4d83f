#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qps/cocycle.hpp"

namespace qps {

/// Finite restriction of (K_{W,V,omega,phi} x)_n = sum_k W_k x_{n-k} + V(2 pi w n + phi) x_n
/// to n in [-N, N] with zero boundary conditions. Requires real hopping
/// coefficients (even W) so the matrix is real symmetric banded.
class TruncatedOperator {
public:
  TruncatedOperator(int n_half, int band);

  int n_half() const { return n_half_; }
  int band() const { return band_; }
  int size() const { return 2 * n_half_ + 1; }

  double diag(int i) const { return diag_[static_cast<size_t>(i)]; }
  double& diag(int i) { return diag_[static_cast<size_t>(i)]; }
  /// entry (i, i+b) for 1 <= b <= band, 0 <= i < size - b
  double off(int b, int i) const { return off_[static_cast<size_t>(b - 1)][static_cast<size_t>(i)]; }
  double& off(int b, int i) { return off_[static_cast<size_t>(b - 1)][static_cast<size_t>(i)]; }
  double entry(int i, int j) const;

  /// max_i sum_j |T_ij|; all eigenvalues lie in [-bound, bound].
  double gershgorin_bound() const;

private:
  int n_half_, band_;
  std::vector<double> diag_;
  std::vector<std::vector<double>> off_;
};

/// Build the [-N, N] truncation. The band is the smallest b with dropped
/// hopping mass sum_{|k|>b} |W_k| <= band_tol; rejects a tolerance that would
/// silently truncate all of a nonzero hopping.
TruncatedOperator truncate(const Potential& w, const Potential& v, const Frequency& omega,
                           double phi, int n_half, double band_tol = 0.0);

/// Number of eigenvalues <= a, by Sturm sequences (tridiagonal) or banded
/// symmetric-indefinite LDL^T inertia; pivot breakdown is absorbed by a
/// documented 1e-12-scale shift.
int eigen_count(const TruncatedOperator& t, double a);

/// Everything needed to evaluate the finite-size IDS away from a stored scan.
struct ScanContext {
  Potential w, v;
  Frequency omega;
  std::vector<double> phis{0.5, 1.5, 2.5, 3.5};
  int n_half = 500;
  double band_tol = 0.0;
};

struct IdsEstimate {
  double value = 0;
  double err = 0;  // phi spread plus N-halving drift (heuristic, not a bound)
};

IdsEstimate ids(const ScanContext& ctx, double a);
IdsEstimate ids(const Potential& w, const Potential& v, const Frequency& omega,
                std::span<const double> phis, int n_half, double a);

struct ScanOptions {
  std::vector<double> phis{0.5, 1.5, 2.5, 3.5};
  bool cocycle_quantities = false;  // lyapunov/rotation columns; needs W = 2cos
  long cocycle_steps = 100000;
  double cocycle_theta0 = 0.0;
  int threads = 1;
  double band_tol = 0.0;
};

struct SpectralScan {
  std::vector<double> grid;
  std::vector<double> ids;
  std::vector<double> ids_err;
  std::vector<double> lyap;  // empty unless requested
  std::vector<double> rot;   // empty unless requested
  ScanContext meta;
};

SpectralScan scan(const Potential& w, const Potential& v, const Frequency& omega,
                  std::span<const double> grid, int n_half, const ScanOptions& opts = {});

struct Gap {
  double lo = 0, hi = 0;
  double ids_value = 0;
  std::optional<int> label;  // minimal |k| with ids ~ k w (mod 1, orientation folded)
  bool collapsed = false;
};

struct FindGapsOptions {
  bool refine = true;
  int bisect_iters = 48;
  int n_escalation = 2;          // extra refinement pass at doubled N
  double collapse_factor = 1.0;  // collapsed when width < factor * grid step
  bool attach_labels = true;
  int label_kmax = 20;
  double label_tol = 2e-3;
};

/// Maximal plateaus of the scan flanked by strictly larger variation, with
/// endpoints refined by bisection on the finite-size ids.
std::vector<Gap> find_gaps(const SpectralScan& s, double plateau_tol,
                           const FindGapsOptions& opts = {});

/// Minimal |k| <= kmax with |ids - (k w mod 1)| <= tol or |ids - (1 - (k w mod 1))| <= tol.
std::optional<int> gap_label(double ids_value, const Frequency& omega, int kmax, double tol);

/// |(ids(a1) - ids(a2)) / (a1 - a2)|, the finite-difference density quotient.
double ids_slope(double a1, double a2, const ScanContext& ctx);

enum class EnergyClass { GapInterior, GapEdgeSqrt, SmoothPoint, Undetermined };

struct EnergyClassification {
  EnergyClass kind = EnergyClass::Undetermined;
  double exponent = 0;  // fitted growth exponent of delta(a, a +- h) in h
  double r2 = 0;
  std::vector<double> h;
  std::vector<double> delta;
};

struct ClassifyOptions {
  double zero_floor_factor = 1.5;  // times the count quantum 1/(2N+1)
  double fit_r2_min = 0.8;
  double sqrt_exponent_max = -0.3;   // exponent below this => sqrt edge
  double smooth_exponent_abs = 0.3;  // |exponent| below this => smooth point
};

EnergyClassification classify_energy(double a, const ScanContext& ctx,
                                     std::span<const double> h_seq,
                                     const ClassifyOptions& opts = {});
/// Schrodinger convenience overload (W = 2cos).
EnergyClassification classify_energy(double a, const Potential& v, const Frequency& omega,
                                     std::span<const double> h_seq, int n_half,
                                     const ClassifyOptions& opts = {});

}  // namespace qps
