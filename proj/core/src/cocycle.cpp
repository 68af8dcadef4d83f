#include "qps/cocycle.hpp"

namespace qps {

double lyapunov(const Cocycle& c, double theta0, long n, int renorm_every) {
  return lyapunov_of([&c](double th) { return c.matrix(th); }, c.omega.value(), theta0, n,
                     renorm_every);
}

double rotation_number(const Cocycle& c, double theta0, long n) {
  return rotation_number_of([&c](double th) { return c.matrix(th); }, c.omega.value(),
                            theta0, n);
}

OrbitStats orbit_stats(const Cocycle& c, double theta0, long n) {
  detail::check_orbit_length(n);
  OrbitStats s;
  s.n = n;
  const long half = n / 2;
  const double lyap_half = lyapunov(c, theta0, half);
  const double rot_half = rotation_number(c, theta0, half);
  s.lyap = lyapunov(c, theta0, n);
  s.rot = rotation_number(c, theta0, n);
  s.err_est = std::max(std::abs(s.lyap - lyap_half), std::abs(s.rot - rot_half));
  return s;
}

double lyapunov_avg(const Cocycle& c, long n, int phases) {
  double sum = 0.0;
  for (int i = 0; i < phases; ++i)
    sum += lyapunov(c, detail::kTwoPi * i / phases, n);
  return sum / phases;
}

double rotation_number_avg(const Cocycle& c, long n, int phases) {
  double sum = 0.0;
  for (int i = 0; i < phases; ++i)
    sum += rotation_number(c, detail::kTwoPi * i / phases, n);
  return sum / phases;
}

}  // namespace qps
