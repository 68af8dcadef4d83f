#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qps/spectrum.hpp"

namespace qps {

/// Aubry-dual long-range operator L_{V,omega,phi}: hopping V_k, diagonal
/// 2 cos(2 pi w n + phi). Equals truncate(W = V, V = 2cos, ...).
TruncatedOperator dual_operator(const Potential& v, const Frequency& omega, double phi,
                                int n_half, double band_tol = 0.0);

struct JacobiOptions {
  int max_sweeps = 40;
  double off_tol_factor = 1e-13;  // stop when off-norm <= factor * frobenius
  int dense_cap = 2001;
};

struct JacobiNonConvergence : std::runtime_error {
  explicit JacobiNonConvergence(double off)
      : std::runtime_error("jacobi: sweep cap hit, off-diagonal mass " + std::to_string(off)),
        off_mass(off) {}
  double off_mass;
};

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
struct EigenSystem {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column-major, size x size, orthonormal
  int size = 0;
  double max_residual = 0;  // max_j ||T v_j - lambda_j v_j||
  double norm = 0;          // Gershgorin bound used to scale the residual gate

  std::span<const double> vector(int j) const {
    return {vectors.data() + static_cast<size_t>(j) * size, static_cast<size_t>(size)};
  }
};

EigenSystem eigenpairs(const TruncatedOperator& t, const JacobiOptions& opts = {});

/// Bloch wave x_n = e^{i phi n} f(2 pi w n + phi) at energy a; f_coeffs are
/// the Fourier coefficients psi_n of f over n in [-N, N], max-normalized.
struct BlochWave {
  double a = 0;
  double phi = 0;
  int n_half = 0;
  std::vector<std::complex<double>> f_coeffs;  // index n + n_half
  double decay_rate = 0;
  double decay_r2 = 0;
  double residual = -1.0;  // filled when the eigenvalue-equation check runs

  std::complex<double> f_at(double theta) const;
};

struct LocalizeOptions {
  double decay_threshold = 0.2;
  double r2_min = 0.9;
  double interior_mass_min = 0.99;  // l2 mass required inside |n| <= N/2
  double support_floor = 1e-12;     // relative envelope floor for the fit
  bool allow_resonant = false;      // admit phi on the lattice pi j + pi k w
  double phase_tol = 1e-9;
  int phase_window = 1000;  // resonant-phase scan window
  double residual_max = 1e-6;
  bool check_residual = true;
  JacobiOptions jacobi{};
};

/// Eigenvectors of the dual operator that pass the exponential-envelope fit,
/// the interior-mass gate and the Bloch residual gate, packaged as Bloch
/// waves at their eigenvalues. Empty result signals that nothing localizes
/// at this window size (or the smallness hypothesis fails).
std::vector<BlochWave> localized_states(const Potential& v, const Frequency& omega,
                                        double phi, int n_half,
                                        const LocalizeOptions& opts = {});

/// max over interior n of |x_{n+1} + x_{n-1} + V(2 pi w n + phi) x_n - a x_n| / max |x|
/// with x_n evaluated from the Fourier coefficients.
double bloch_residual(const BlochWave& w, const Potential& v, const Frequency& omega);

struct DualityReport {
  double max_diff = 0;
  std::vector<double> grid, ids_h, ids_l;
};

/// max over the grid of |k^H(a) - k^L(a)| at finite size; the duality theorem
/// says the infinite-volume difference vanishes.
DualityReport ids_duality_check(const Potential& v, const Frequency& omega,
                                std::span<const double> grid, int n_half,
                                std::span<const double> phis);

}  // namespace qps
