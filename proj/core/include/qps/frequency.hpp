#pragma once

#include <vector>

namespace qps {

/// Rotation frequency in (0,1) together with its leading continued-fraction
/// partial quotients. Golden and silver means get exact constructors so the
/// canonical test cases are reproducible bit for bit.
class Frequency {
public:
  /// (sqrt(5)-1)/2 = [0; 1, 1, 1, ...]
  static Frequency golden();
  /// sqrt(2)-1 = [0; 2, 2, 2, ...]
  static Frequency silver();
  /// kcheck > 0 demands min_{1<=k<=kcheck} |sin 2 pi k w| > 0 (nonresonance
  /// witness) and rejects the value otherwise; kcheck = 0 skips the test so
  /// resonant values can be constructed for negative controls.
  static Frequency from_value(double value, int kcheck = 64);

  double value() const { return value_; }
  const std::vector<int>& cf() const { return cf_; }

private:
  double value_ = 0.0;
  std::vector<int> cf_;
};

/// Evaluate [0; q1, q2, ...] back to a real number.
double eval_continued_fraction(const std::vector<int>& quotients);
std::vector<int> continued_fraction_of(double value, int max_terms = 48);

/// min_{1<=k<=kmax} |sin(2 pi k w)| * k^tau, an empirical lower estimate of
/// the Diophantine constant c. Zero signals a resonance inside the window.
double diophantine_margin(const Frequency& omega, double tau, int kmax);

/// All k with 1 <= |k| <= kmax violating |sin(phi + pi k w)| >= exp(-|k|^(1/(2 tau))).
/// An empty list is numerical evidence that phi avoids the bad phase set
/// within the window.
std::vector<int> resonant_phase_violations(double phi, const Frequency& omega,
                                           double tau, int kmax);

struct PhaseResonance {
  bool resonant = false;  // distance within tol of the lattice pi j + pi k w
  int k = 0;
  int j = 0;
  double distance = 0.0;
};

/// Nearest point of the resonant phase lattice phi = pi j + pi k w, |k| <= kmax.
PhaseResonance nearest_phase_resonance(double phi, const Frequency& omega, int kmax,
                                       double tol = 1e-9);

struct RotationClass {
  enum class Kind { Resonant, DiophantineWitness, Undetermined };
  Kind kind = Kind::Undetermined;
  int k = 0;               // resonant pair: 2 alpha = k w + j within tol
  int j = 0;
  double witness = 0.0;    // measured K = min |sin(pi(2 alpha - k w))| |k|^sigma
  double sigma = 0.0;
  double worst_distance = 0.0;  // min_k dist(2 alpha - k w, Z)
};

/// Classify a fibered rotation number as resonant or Diophantine with respect
/// to omega. Everything is taken mod 1, so classify(alpha + 1) == classify(alpha).
RotationClass classify_rotation(double alpha, const Frequency& omega, double tol,
                                int kmax, double sigma = 2.0);

}  // namespace qps
