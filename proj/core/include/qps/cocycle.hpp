#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qps/frequency.hpp"
#include "qps/potential.hpp"

namespace qps {

struct Vec2 {
  double x = 0, y = 0;
};

struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, s, -s, c};
  }
  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
}

/// Schrodinger cocycle (A_{a,V}, omega) over theta -> theta + 2 pi omega.
struct Cocycle {
  double a = 0;
  Potential v;
  Frequency omega;

  /// ((a - V(theta), -1), (1, 0)); determinant is exactly 1.
  Mat2 matrix(double theta) const { return {a - v(theta), -1.0, 1.0, 0.0}; }
};

struct OrbitStats {
  long n = 0;
  double lyap = 0;     // nats per step, >= 0 up to estimator noise
  double rot = 0;      // cycles per step, folded into [0, 1/2]
  double err_est = 0;  // max |value(N) - value(N/2)|
};

/// Fold a raw winding average (cycles/step) mod 1 into [0, 1/2].
inline double fold_rotation(double raw_cycles) {
  double r = raw_cycles - std::floor(raw_cycles);
  return r <= 0.5 ? r : 1.0 - r;
}

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline void check_orbit_length(long n) {
  if (n < 1000) throw std::invalid_argument("cocycle orbit: need N >= 1000");
}

inline double advance_theta(double theta, double step) {
  theta += step;
  if (theta >= kTwoPi) theta -= kTwoPi;
  return theta;
}

}  // namespace detail

/// (1/N) log || A(theta_{N-1}) ... A(theta_0) || with periodic renormalization
/// so the product never overflows. Deterministic for fixed inputs.
template <class MapFn>
double lyapunov_of(MapFn&& map, double omega_value, double theta0, long n,
                   int renorm_every = 32) {
  detail::check_orbit_length(n);
  const double step = detail::kTwoPi * omega_value;
  double theta = std::remainder(theta0, detail::kTwoPi);
  if (theta < 0) theta += detail::kTwoPi;
  Mat2 p = Mat2::identity();
  double log_sum = 0.0;
  int since = 0;
  for (long i = 0; i < n; ++i) {
    p = map(theta) * p;
    if (++since == renorm_every) {
      const double s = p.frobenius();
      log_sum += std::log(s);
      p = {p.a11 / s, p.a12 / s, p.a21 / s, p.a22 / s};
      since = 0;
    }
    theta = detail::advance_theta(theta, step);
  }
  log_sum += std::log(p.frobenius());
  return log_sum / static_cast<double>(n);
}

/// Average angular advance of the unit-vector iteration in cycles per step,
/// folded into [0, 1/2]. The winding is counted through the section
/// {second component = 0}: each sign change of y_n is half a turn. This
/// realizes the lift increments-in-(-pi, pi] convention without the branch
/// ambiguity of per-step angle differences, which flips sign randomly when a
/// step reverses a vector (negative-hyperbolic energies).
template <class MapFn>
double rotation_number_of(MapFn&& map, double omega_value, double theta0, long n) {
  detail::check_orbit_length(n);
  const double step = detail::kTwoPi * omega_value;
  double theta = std::remainder(theta0, detail::kTwoPi);
  if (theta < 0) theta += detail::kTwoPi;
  double vx = 1.0, vy = 0.0;
  long flips = 0;
  int last_sign = 0;
  for (long i = 0; i < n; ++i) {
    const Mat2 m = map(theta);
    const double wx = m.a11 * vx + m.a12 * vy;
    const double wy = m.a21 * vx + m.a22 * vy;
    const int s = (wy > 0.0) - (wy < 0.0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++flips;
      last_sign = s;
    }
    const double norm = std::hypot(wx, wy);
    vx = wx / norm;
    vy = wy / norm;
    theta = detail::advance_theta(theta, step);
  }
  return static_cast<double>(flips) / (2.0 * static_cast<double>(n));
}

double lyapunov(const Cocycle& c, double theta0, long n, int renorm_every = 32);
double rotation_number(const Cocycle& c, double theta0, long n);
OrbitStats orbit_stats(const Cocycle& c, double theta0, long n);

/// Phase-averaged variants over `phases` equispaced starting angles.
double lyapunov_avg(const Cocycle& c, long n, int phases = 16);
double rotation_number_avg(const Cocycle& c, long n, int phases = 16);

}  // namespace qps
