#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace qps {

/// Real analytic potential on the torus stored as a finite Fourier series,
///   V(theta) = sum_{|k| <= band} V_k e^{i k theta},  V_{-k} = conj(V_k).
///
/// The reality condition is enforced at construction; evaluation returns the
/// real value after discarding the (checked) vanishing imaginary part.
class Potential {
public:
  Potential() = default;
  /// coeffs holds V_k for k = -band..band in order; must be conjugate-symmetric.
  Potential(std::vector<std::complex<double>> coeffs, double rho);

  int band() const { return band_; }
  double rho() const { return rho_; }
  std::complex<double> coeff(int k) const;
  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
  bool is_zero() const;

  double operator()(double theta) const;

private:
  std::vector<std::complex<double>> coeffs_;  // index i <-> k = i - band_
  int band_ = 0;
  double rho_ = 1.0;
};

/// Build a potential from sparse (k, amplitude) terms; duplicate k accumulate.
/// Rejects non-conjugate-symmetric input and non-finite amplitudes.
Potential make_potential(const std::vector<std::pair<int, std::complex<double>>>& terms,
                         double rho = 1.0);

/// sum_j amps[j].second * cos(amps[j].first * theta), the real cosine shorthand.
Potential cosine_series(const std::vector<std::pair<int, double>>& amps, double rho = 1.0);

/// b * cos(theta), the almost Mathieu potential.
Potential amo_potential(double b, double rho = 1.0);

/// 2 * cos(theta), the hopping symbol of the discrete Schrodinger operator.
Potential schrodinger_hopping(double rho = 1.0);

double eval_potential(const Potential& v, double theta);

/// Coefficientwise combination a + s * b (rho of the result is min of the two).
Potential axpy_potential(const Potential& a, double s, const Potential& b);

/// Certified upper bound sum_k |V_k| e^{|k| rho} for sup over the strip
/// |Im theta| < rho. Monotone nondecreasing in rho; equals the strip sup
/// when the coefficient phases align.
double norm_rho(const Potential& v, double rho);

}  // namespace qps
