#include "qps/frequency.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qps {

namespace {

constexpr double kPi = std::numbers::pi;

// |sin(2 pi k w)| with the argument reduced mod 1 before the libm call.
double abs_sin_two_pi(double k_times_omega) {
  const double m = std::remainder(k_times_omega, 1.0);  // in [-1/2, 1/2]
  return std::abs(std::sin(2.0 * kPi * m));
}

double dist_to_integers(double x) { return std::abs(std::remainder(x, 1.0)); }

}  // namespace

double eval_continued_fraction(const std::vector<int>& quotients) {
  double x = 0.0;
  for (auto it = quotients.rbegin(); it != quotients.rend(); ++it) {
    x = 1.0 / (static_cast<double>(*it) + x);
  }
  return x;
}

std::vector<int> continued_fraction_of(double value, int max_terms) {
  std::vector<int> out;
  double x = value;
  for (int i = 0; i < max_terms; ++i) {
    if (x < 1e-15) break;
    const double inv = 1.0 / x;
    if (inv > 1e15) break;  // below double resolution; treat as terminating
    const double a = std::floor(inv);
    out.push_back(static_cast<int>(a));
    x = inv - a;
  }
  return out;
}

Frequency Frequency::golden() {
  Frequency f;
  f.value_ = (std::sqrt(5.0) - 1.0) / 2.0;
  f.cf_.assign(44, 1);
  return f;
}

Frequency Frequency::silver() {
  Frequency f;
  f.value_ = std::sqrt(2.0) - 1.0;
  f.cf_.assign(26, 2);
  return f;
}

Frequency Frequency::from_value(double value, int kcheck) {
  if (!(value > 0.0) || !(value < 1.0))
    throw std::invalid_argument("frequency: value must lie in (0,1)");
  for (int k = 1; k <= kcheck; ++k) {
    if (abs_sin_two_pi(k * value) == 0.0)
      throw std::invalid_argument("frequency: resonance |sin 2 pi k w| = 0 at k=" +
                                  std::to_string(k));
  }
  Frequency f;
  f.value_ = value;
  f.cf_ = continued_fraction_of(value);
  return f;
}

double diophantine_margin(const Frequency& omega, double tau, int kmax) {
  if (kmax < 1) throw std::invalid_argument("diophantine_margin: kmax must be >= 1");
  if (!(tau > 1.0)) throw std::invalid_argument("diophantine_margin: tau must be > 1");
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kmax; ++k) {
    const double m = abs_sin_two_pi(k * omega.value()) * std::pow(k, tau);
    margin = std::min(margin, m);
  }
  return margin;
}

std::vector<int> resonant_phase_violations(double phi, const Frequency& omega,
                                           double tau, int kmax) {
  if (kmax < 1) throw std::invalid_argument("resonant_phase_violations: kmax must be >= 1");
  std::vector<int> bad;
  for (int k = -kmax; k <= kmax; ++k) {
    if (k == 0) continue;
    // |sin(phi + pi k w)| < exp(-|k|^(1/(2 tau)))
    const double arg = phi / (2.0 * kPi) + 0.5 * k * omega.value();
    const double s = std::abs(std::sin(2.0 * kPi * std::remainder(arg, 1.0)));
    const double bound = std::exp(-std::pow(std::abs(k), 1.0 / (2.0 * tau)));
    if (s < bound) bad.push_back(k);
  }
  return bad;
}

PhaseResonance nearest_phase_resonance(double phi, const Frequency& omega, int kmax,
                                       double tol) {
  PhaseResonance out;
  double best = std::numeric_limits<double>::infinity();
  for (int ak = 0; ak <= kmax; ++ak) {
    for (int k : {ak, -ak}) {
      const double x = (phi - kPi * k * omega.value()) / kPi;
      const int j = static_cast<int>(std::lround(x));
      const double d = std::abs(phi - kPi * j - kPi * k * omega.value());
      if (d < best) {
        best = d;
        out.k = k;
        out.j = j;
      }
      if (d <= tol) {
        out.k = k;
        out.j = j;
        out.distance = d;
        out.resonant = true;
        return out;
      }
      if (ak == 0) break;
    }
  }
  out.distance = best;
  return out;
}

RotationClass classify_rotation(double alpha, const Frequency& omega, double tol,
                                int kmax, double sigma) {
  if (kmax < 1) throw std::invalid_argument("classify_rotation: kmax must be >= 1");
  RotationClass out;
  out.sigma = sigma;
  const double two_alpha = 2.0 * alpha;

  // scan |k| ascending so the minimal |k| resonance wins
  double best_dist = std::numeric_limits<double>::infinity();
  for (int ak = 0; ak <= kmax; ++ak) {
    for (int k : {ak, -ak}) {
      if (ak != 0 && k == 0) continue;
      const double x = two_alpha - k * omega.value();
      const double d = dist_to_integers(x);
      if (d < best_dist) best_dist = d;
      if (d <= tol) {
        out.kind = RotationClass::Kind::Resonant;
        out.k = k;
        out.j = static_cast<int>(std::lround(x));
        out.worst_distance = d;
        return out;
      }
      if (ak == 0) break;
    }
  }
  out.worst_distance = best_dist;

  double witness = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kmax; ++k) {
    // sin(pi(2a - k w)) has the same magnitude at +-k offsets of the integer part
    const double m1 = std::abs(std::sin(kPi * std::remainder(two_alpha - k * omega.value(), 1.0)));
    const double m2 = std::abs(std::sin(kPi * std::remainder(two_alpha + k * omega.value(), 1.0)));
    witness = std::min(witness, std::min(m1, m2) * std::pow(k, sigma));
  }
  out.witness = witness;
  out.kind = witness < tol ? RotationClass::Kind::Undetermined
                           : RotationClass::Kind::DiophantineWitness;
  return out;
}

}  // namespace qps
