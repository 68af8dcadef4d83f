#include "qps/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qps {

namespace {

void check_reality(const std::vector<std::complex<double>>& coeffs, int band) {
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * (1.0 + scale);
  for (int k = 0; k <= band; ++k) {
    const auto& plus = coeffs[static_cast<size_t>(band + k)];
    const auto& minus = coeffs[static_cast<size_t>(band - k)];
    if (!std::isfinite(plus.real()) || !std::isfinite(plus.imag()))
      throw std::invalid_argument("potential: non-finite Fourier amplitude");
    if (std::abs(minus - std::conj(plus)) > tol)
      throw std::invalid_argument("potential: coefficients violate V_{-k} = conj(V_k) at k=" +
                                  std::to_string(k));
  }
}

}  // namespace

Potential::Potential(std::vector<std::complex<double>> coeffs, double rho)
    : coeffs_(std::move(coeffs)), rho_(rho) {
  if (coeffs_.empty()) coeffs_.push_back({0.0, 0.0});
  if (coeffs_.size() % 2 == 0)
    throw std::invalid_argument("potential: coefficient array must have odd length");
  if (!(rho_ > 0.0)) throw std::invalid_argument("potential: rho must be positive");
  band_ = static_cast<int>(coeffs_.size() / 2);
  check_reality(coeffs_, band_);
  // force V_0 exactly real after the check
  coeffs_[static_cast<size_t>(band_)] = {coeffs_[static_cast<size_t>(band_)].real(), 0.0};
}

std::complex<double> Potential::coeff(int k) const {
  if (k < -band_ || k > band_) return {0.0, 0.0};
  return coeffs_[static_cast<size_t>(k + band_)];
}

bool Potential::is_zero() const {
  for (const auto& c : coeffs_)
    if (std::abs(c) != 0.0) return false;
  return true;
}

double Potential::operator()(double theta) const {
  // real form: V0 + 2 sum_{k>0} (Re V_k cos k theta - Im V_k sin k theta)
  double out = coeffs_[static_cast<size_t>(band_)].real();
  for (int k = 1; k <= band_; ++k) {
    const auto& c = coeffs_[static_cast<size_t>(band_ + k)];
    out += 2.0 * (c.real() * std::cos(k * theta) - c.imag() * std::sin(k * theta));
  }
  return out;
}

Potential make_potential(const std::vector<std::pair<int, std::complex<double>>>& terms,
                         double rho) {
  int band = 0;
  for (const auto& [k, c] : terms) band = std::max(band, std::abs(k));
  std::vector<std::complex<double>> coeffs(static_cast<size_t>(2 * band + 1), {0.0, 0.0});
  for (const auto& [k, c] : terms) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("potential: non-finite Fourier amplitude");
    coeffs[static_cast<size_t>(k + band)] += c;
  }
  return Potential(std::move(coeffs), rho);
}

Potential cosine_series(const std::vector<std::pair<int, double>>& amps, double rho) {
  std::vector<std::pair<int, std::complex<double>>> terms;
  terms.reserve(2 * amps.size());
  for (const auto& [k, b] : amps) {
    if (k == 0) {
      terms.emplace_back(0, std::complex<double>{b, 0.0});
    } else {
      terms.emplace_back(k, std::complex<double>{b / 2.0, 0.0});
      terms.emplace_back(-k, std::complex<double>{b / 2.0, 0.0});
    }
  }
  return make_potential(terms, rho);
}

Potential amo_potential(double b, double rho) { return cosine_series({{1, b}}, rho); }

Potential schrodinger_hopping(double rho) { return cosine_series({{1, 2.0}}, rho); }

double eval_potential(const Potential& v, double theta) { return v(theta); }

Potential axpy_potential(const Potential& a, double s, const Potential& b) {
  const int band = std::max(a.band(), b.band());
  std::vector<std::complex<double>> coeffs(static_cast<size_t>(2 * band + 1));
  for (int k = -band; k <= band; ++k)
    coeffs[static_cast<size_t>(k + band)] = a.coeff(k) + s * b.coeff(k);
  return Potential(std::move(coeffs), std::min(a.rho(), b.rho()));
}

double norm_rho(const Potential& v, double rho) {
  if (rho < 0.0) throw std::invalid_argument("norm_rho: rho must be >= 0");
  double out = 0.0;
  for (int k = -v.band(); k <= v.band(); ++k)
    out += std::abs(v.coeff(k)) * std::exp(std::abs(k) * rho);
  return out;
}

}  // namespace qps
