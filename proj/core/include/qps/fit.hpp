#pragma once

#include <cmath>
#include <span>

namespace qps {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int n = 0;
};

/// Ordinary least squares y = slope * x + intercept with the coefficient of
/// determination. Degenerate inputs (n < 2 or zero x-variance) give r2 = 0.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  LineFit f;
  const int n = static_cast<int>(xs.size());
  f.n = n;
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy <= 0) {
    f.r2 = 1.0;  // exactly constant data is fit perfectly by the mean line
  } else {
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
      const double e = ys[i] - (f.slope * xs[i] + f.intercept);
      ss_res += e * e;
    }
    f.r2 = 1.0 - ss_res / syy;
  }
  return f;
}

}  // namespace qps
