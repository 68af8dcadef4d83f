#include "qps/moser_poschel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qps/fit.hpp"

namespace qps {

namespace {
constexpr double kTwoPi = detail::kTwoPi;
}

Mat2 perturbation_matrix(const Conjugation& z, double theta) {
  if (z.kind != ConjKind::Triangular)
    throw std::invalid_argument("perturbation_matrix: needs a triangular conjugation");
  const Mat2 zt = z.z_real_at(theta);
  const double z11 = zt.a11, z12 = zt.a12, c = z.c;
  return {z11 * z12 - c * z11 * z11, -c * z11 * z12 + z12 * z12, -z11 * z11, -z11 * z12};
}

MPAverages mp_averages(const Conjugation& z, const Potential& w, int grid_size) {
  if (grid_size < 256) throw std::invalid_argument("mp_averages: need >= 256 grid points");
  MPAverages av;
  for (int i = 0; i < grid_size; ++i) {
    const double theta = kTwoPi * i / grid_size;
    const Mat2 zt = z.z_real_at(theta);
    const double wv = w(theta);
    av.avg11 += wv * zt.a11 * zt.a11;
    av.avg1112 += wv * zt.a11 * zt.a12;
    av.avg12 += wv * zt.a12 * zt.a12;
  }
  av.avg11 /= grid_size;
  av.avg1112 /= grid_size;
  av.avg12 /= grid_size;
  return av;
}

MPReport mp_analyze(double c, const MPAverages& av, double alpha_lo, double alpha_hi,
                    double zero_tol) {
  MPReport r;
  r.c = c;
  r.avg11 = av.avg11;
  r.avg1112 = av.avg1112;
  r.avg12 = av.avg12;
  r.d_tilde = -av.avg1112 * av.avg1112 + av.avg12 * av.avg11;

  const bool c_zero = std::abs(c) <= zero_tol;
  r.condition_c_ne0 = !c_zero && std::abs(av.avg11) > zero_tol;
  // traceless 2x2 is hyperbolic iff its determinant is negative; this direct
  // test replaces the printed inequality, whose sign is not self-consistent
  r.condition_c_eq0 = c_zero && r.d_tilde < -zero_tol;

  const bool range_ok = alpha_lo != 0.0 && alpha_hi != 0.0 &&
                        ((alpha_lo > 0) == (alpha_hi > 0));
  if (r.condition_c_ne0 && range_ok) {
    const bool lo_ok = c * alpha_lo * av.avg11 < 0;
    const bool hi_ok = c * alpha_hi * av.avg11 < 0;
    r.condition_alpha = lo_ok && hi_ok;
  }
  r.dichotomy_predicted = (r.condition_c_ne0 && r.condition_alpha) || r.condition_c_eq0;
  if (!c_zero) {
    r.predicted_gap_side = c > 0 ? GapSide::Left : GapSide::Right;
    r.predicted_gamma = std::sqrt(std::abs(c * av.avg11));
    r.predicted_rot_coeff = r.predicted_gamma;
  }
  return r;
}

SqrtFit sqrt_fit(std::span<const std::pair<double, double>> samples, double floor) {
  if (samples.size() < 5) throw std::invalid_argument("sqrt_fit: need >= 5 samples");
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  std::vector<double> lx, ly;
  for (const auto& [alpha, value] : samples) {
    if (!(alpha > 0)) throw std::invalid_argument("sqrt_fit: alpha must be positive");
    amin = std::min(amin, alpha);
    amax = std::max(amax, alpha);
    if (std::abs(value) <= floor) continue;
    lx.push_back(std::log(alpha));
    ly.push_back(std::log(std::abs(value)));
  }
  if (amax < 100.0 * amin)
    throw std::invalid_argument("sqrt_fit: samples must span >= 2 decades of alpha");
  if (lx.size() < 5) throw DegenerateFit();
  const LineFit f = fit_line(lx, ly);
  SqrtFit out;
  out.exponent = f.slope;
  out.coefficient = std::exp(f.intercept);
  out.r2 = f.r2;
  return out;
}

CollapsedGapResult collapsed_gap_test(double a0, const Potential& v, const Frequency& omega,
                                      std::span<const double> h_seq,
                                      const CollapsedGapOptions& opts) {
  if (h_seq.size() < 3) throw std::invalid_argument("collapsed_gap_test: need >= 3 steps");
  for (size_t i = 1; i < h_seq.size(); ++i)
    if (h_seq[i] >= h_seq[i - 1])
      throw std::invalid_argument("collapsed_gap_test: h sequence must decrease");

  const double rot0 = rotation_number(Cocycle{a0, v, omega}, opts.theta0, opts.cocycle_steps);
  std::vector<double> lx, ly;
  CollapsedGapResult out;
  bool all_flat = true;
  std::vector<double> deltas;
  for (double h : h_seq) {
    const double rp = rotation_number(Cocycle{a0 + h, v, omega}, opts.theta0, opts.cocycle_steps);
    const double rm = rotation_number(Cocycle{a0 - h, v, omega}, opts.theta0, opts.cocycle_steps);
    const double d = std::max(std::abs(rp - rot0), std::abs(rm - rot0));
    deltas.push_back(d);
    if (d > opts.zero_floor) all_flat = false;
    if (d > opts.zero_floor) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(d));
    }
  }
  if (all_flat) {
    // rot constant through a0: interior of a gap, slope zero
    out.kind = CollapsedGapResult::Kind::DifferentiableRot;
    out.value = 0.0;
    out.exponent = 0.0;
    out.r2 = 1.0;
    return out;
  }
  const LineFit f = fit_line(lx, ly);
  out.exponent = f.slope;
  out.r2 = f.r2;
  if (f.n < 3 || f.r2 < opts.r2_min) {
    out.kind = CollapsedGapResult::Kind::Undetermined;
    return out;
  }
  if (f.slope > 0.8 && f.slope < 1.25) {
    out.kind = CollapsedGapResult::Kind::DifferentiableRot;
    out.value = std::exp(f.intercept);  // |drot/da| at a0
  } else if (f.slope > 0.35 && f.slope < 0.65) {
    out.kind = CollapsedGapResult::Kind::SqrtEdge;
    out.value = std::exp(f.intercept);
  } else {
    out.kind = CollapsedGapResult::Kind::Undetermined;
  }
  return out;
}

GapOpeningShiftResult gap_opening_shift(const Conjugation& z, const Potential& w,
                                        int grid_size, double tol) {
  double y1 = 0, y2 = 0, y3 = 0, wy1 = 0, wy2 = 0, wy3 = 0;
  for (int i = 0; i < grid_size; ++i) {
    const double theta = kTwoPi * i / grid_size;
    const Mat2 zt = z.z_real_at(theta);
    const double z11 = zt.a11, z12 = zt.a12;
    const double f1 = 0.5 * (z11 * z11 + z12 * z12);
    const double f2 = 0.5 * (z11 * z11 - z12 * z12);
    const double f3 = z11 * z12;
    const double wv = w(theta);
    y1 += f1;
    y2 += f2;
    y3 += f3;
    wy1 += wv * f1;
    wy2 += wv * f2;
    wy3 += wv * f3;
  }
  y1 /= grid_size;
  y2 /= grid_size;
  y3 /= grid_size;
  wy1 /= grid_size;
  wy2 /= grid_size;
  wy3 /= grid_size;
  if (std::abs(y1) <= tol) throw DegenerateNormalization();
  GapOpeningShiftResult out;
  out.alpha_shift = -wy1 / y1;
  out.det_y2 = -wy1 * y2 + wy2 * y1;
  out.det_y3 = -wy1 * y3 + wy3 * y1;
  out.generic = std::abs(out.det_y2) > tol || std::abs(out.det_y3) > tol;
  return out;
}

}  // namespace qps
