#include "qps/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qps/fit.hpp"

namespace qps {

TruncatedOperator dual_operator(const Potential& v, const Frequency& omega, double phi,
                                int n_half, double band_tol) {
  return truncate(v, schrodinger_hopping(), omega, phi, n_half, band_tol);
}

namespace {

// One cyclic Jacobi sweep over the upper triangle with the classical
// threshold schedule; a and vecs are n x n row-major / column-major.
void jacobi_rotate(std::vector<double>& a, std::vector<double>& vecs, int n, int p, int q) {
  const size_t np = static_cast<size_t>(n);
  double& apq = a[static_cast<size_t>(p) * np + q];
  if (apq == 0.0) return;
  const double app = a[static_cast<size_t>(p) * np + p];
  const double aqq = a[static_cast<size_t>(q) * np + q];
  const double h = aqq - app;
  double t;
  if (std::abs(h) + 100.0 * std::abs(apq) == std::abs(h)) {
    t = apq / h;
  } else {
    const double theta = 0.5 * h / apq;
    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const double tau = s / (1.0 + c);
  const double delta = t * apq;
  a[static_cast<size_t>(p) * np + p] = app - delta;
  a[static_cast<size_t>(q) * np + q] = aqq + delta;
  apq = 0.0;
  auto rot = [&](size_t ip, size_t iq) {
    const double g = a[ip], hh = a[iq];
    a[ip] = g - s * (hh + g * tau);
    a[iq] = hh + s * (g - hh * tau);
  };
  for (int j = 0; j < p; ++j) rot(static_cast<size_t>(j) * np + p, static_cast<size_t>(j) * np + q);
  for (int j = p + 1; j < q; ++j)
    rot(static_cast<size_t>(p) * np + j, static_cast<size_t>(j) * np + q);
  for (int j = q + 1; j < n; ++j)
    rot(static_cast<size_t>(p) * np + j, static_cast<size_t>(q) * np + j);
  // accumulate V (column-major): columns p and q mix
  double* vp = vecs.data() + static_cast<size_t>(p) * np;
  double* vq = vecs.data() + static_cast<size_t>(q) * np;
  for (int j = 0; j < n; ++j) {
    const double g = vp[j], hh = vq[j];
    vp[j] = g - s * (hh + g * tau);
    vq[j] = hh + s * (g - hh * tau);
  }
}

double offdiag_abs_sum(const std::vector<double>& a, int n) {
  double sm = 0.0;
  for (int p = 0; p < n - 1; ++p)
    for (int q = p + 1; q < n; ++q) sm += std::abs(a[static_cast<size_t>(p) * n + q]);
  return sm;
}

}  // namespace

EigenSystem eigenpairs(const TruncatedOperator& t, const JacobiOptions& opts) {
  const int n = t.size();
  if (n > opts.dense_cap)
    throw std::invalid_argument("eigenpairs: size exceeds the dense cap; use a smaller window");

  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    a[static_cast<size_t>(i) * n + i] = t.diag(i);
    for (int b = 1; b <= t.band() && i + b < n; ++b) {
      a[static_cast<size_t>(i) * n + (i + b)] = t.off(b, i);
      a[static_cast<size_t>(i + b) * n + i] = t.off(b, i);
    }
  }
  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);

  std::vector<double> vecs(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vecs[static_cast<size_t>(i) * n + i] = 1.0;

  const double target = std::max(opts.off_tol_factor * frob, 1e-300);
  bool converged = (n == 1);
  double sm = 0.0;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    sm = offdiag_abs_sum(a, n);
    if (sm <= target) {
      converged = true;
      break;
    }
    const double thresh = (sweep < 3) ? 0.2 * sm / (static_cast<double>(n) * n) : 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double& apq = a[static_cast<size_t>(p) * n + q];
        const double g = 100.0 * std::abs(apq);
        const double app = std::abs(a[static_cast<size_t>(p) * n + p]);
        const double aqq = std::abs(a[static_cast<size_t>(q) * n + q]);
        if (sweep > 3 && app + g == app && aqq + g == aqq) {
          apq = 0.0;
        } else if (std::abs(apq) > thresh) {
          jacobi_rotate(a, vecs, n, p, q);
        }
      }
    }
  }
  if (!converged) {
    sm = offdiag_abs_sum(a, n);
    if (sm > target) throw JacobiNonConvergence(sm);
  }

  EigenSystem es;
  es.size = n;
  es.norm = t.gershgorin_bound();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return a[static_cast<size_t>(i) * n + i] < a[static_cast<size_t>(j) * n + j];
  });
  es.values.resize(static_cast<size_t>(n));
  es.vectors.resize(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    es.values[static_cast<size_t>(j)] = a[static_cast<size_t>(order[static_cast<size_t>(j)]) * n +
                                          order[static_cast<size_t>(j)]];
    std::copy_n(vecs.data() + static_cast<size_t>(order[static_cast<size_t>(j)]) * n, n,
                es.vectors.data() + static_cast<size_t>(j) * n);
  }

  // residual gate ||T v - lambda v|| per pair, using the banded structure
  double worst = 0.0;
  std::vector<double> tv(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double* vj = es.vectors.data() + static_cast<size_t>(j) * n;
    for (int i = 0; i < n; ++i) {
      double acc = t.diag(i) * vj[i];
      for (int b = 1; b <= t.band(); ++b) {
        if (i + b < n) acc += t.off(b, i) * vj[i + b];
        if (i - b >= 0) acc += t.off(b, i - b) * vj[i - b];
      }
      tv[static_cast<size_t>(i)] = acc - es.values[static_cast<size_t>(j)] * vj[i];
    }
    double r = 0.0;
    for (double x : tv) r += x * x;
    worst = std::max(worst, std::sqrt(r));
  }
  es.max_residual = worst;
  return es;
}

std::complex<double> BlochWave::f_at(double theta) const {
  // f(theta) = sum_n psi_n e^{i n theta}, Horner in e^{+-i theta}
  const std::complex<double> u{std::cos(theta), std::sin(theta)};
  const std::complex<double> uc = std::conj(u);
  std::complex<double> pos{0.0, 0.0}, neg{0.0, 0.0};
  for (int n = n_half; n >= 1; --n) {
    pos = (pos + f_coeffs[static_cast<size_t>(n_half + n)]) * u;
    neg = (neg + f_coeffs[static_cast<size_t>(n_half - n)]) * uc;
  }
  return pos + neg + f_coeffs[static_cast<size_t>(n_half)];
}

namespace {

struct EnvelopeFit {
  double decay = 0;
  double r2 = 0;
  bool ok = false;
};

EnvelopeFit envelope_fit(std::span<const double> abs_psi, int center, double floor_rel) {
  EnvelopeFit out;
  const int n = static_cast<int>(abs_psi.size());
  double peak = 0.0;
  for (double x : abs_psi) peak = std::max(peak, x);
  if (peak <= 0.0) return out;
  const double floor_abs = floor_rel * peak;

  int radius = 0;
  for (int i = 0; i < n; ++i)
    if (abs_psi[static_cast<size_t>(i)] >= floor_abs)
      radius = std::max(radius, std::abs(i - center));

  // ultra-localized: the support dies before a regression makes sense
  std::vector<double> xs, ys;
  const int inner = (radius + 1) / 2;
  for (int i = 0; i < n; ++i) {
    const int d = std::abs(i - center);
    if (d < inner || d == 0) continue;
    const double val = abs_psi[static_cast<size_t>(i)];
    if (val < floor_abs) continue;
    xs.push_back(static_cast<double>(d));
    ys.push_back(std::log(val / peak));
  }
  if (radius <= 4 || xs.size() < 6) {
    out.decay = -std::log(floor_rel) / std::max(radius, 1);
    out.r2 = 1.0;
    out.ok = true;
    return out;
  }
  const LineFit f = fit_line(xs, ys);
  out.decay = -f.slope;
  out.r2 = f.r2;
  out.ok = true;
  return out;
}

}  // namespace

std::vector<BlochWave> localized_states(const Potential& v, const Frequency& omega,
                                        double phi, int n_half, const LocalizeOptions& opts) {
  if (!opts.allow_resonant) {
    const auto res = nearest_phase_resonance(phi, omega, opts.phase_window, opts.phase_tol);
    if (res.resonant)
      throw std::invalid_argument(
          "localized_states: phi sits on the resonant lattice pi j + pi k w (k=" +
          std::to_string(res.k) + ", j=" + std::to_string(res.j) +
          "); pass allow_resonant for gap-edge phases");
  }
  const auto op = dual_operator(v, omega, phi, n_half);
  const auto es = eigenpairs(op, opts.jacobi);
  const int n = es.size;

  std::vector<BlochWave> accepted;
  std::vector<double> abs_psi(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto vec = es.vector(j);
    int center = 0;
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
      abs_psi[static_cast<size_t>(i)] = std::abs(vec[static_cast<size_t>(i)]);
      if (abs_psi[static_cast<size_t>(i)] > peak) {
        peak = abs_psi[static_cast<size_t>(i)];
        center = i;
      }
    }
    double interior_mass = 0.0;
    for (int i = 0; i < n; ++i) {
      const int site = i - n_half;
      if (2 * std::abs(site) <= n_half)
        interior_mass += vec[static_cast<size_t>(i)] * vec[static_cast<size_t>(i)];
    }
    if (interior_mass < opts.interior_mass_min) continue;

    const auto fit = envelope_fit(abs_psi, center, opts.support_floor);
    if (!fit.ok || fit.decay < opts.decay_threshold || fit.r2 < opts.r2_min) continue;

    BlochWave w;
    w.a = es.values[static_cast<size_t>(j)];
    w.phi = phi;
    w.n_half = n_half;
    w.decay_rate = fit.decay;
    w.decay_r2 = fit.r2;
    w.f_coeffs.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      w.f_coeffs[static_cast<size_t>(i)] = {vec[static_cast<size_t>(i)] / peak, 0.0};
    if (opts.check_residual) {
      w.residual = bloch_residual(w, v, omega);
      if (w.residual > opts.residual_max) continue;
    }
    accepted.push_back(std::move(w));
  }
  return accepted;
}

double bloch_residual(const BlochWave& w, const Potential& v, const Frequency& omega) {
  const int n_half = w.n_half;
  const int margin = v.band() + 2;
  const int lo = -n_half + margin, hi = n_half - margin;
  if (lo > hi) throw std::invalid_argument("bloch_residual: window too small");

  // x_n = e^{i phi n} f(2 pi w n + phi); the three-term operator is applied
  // exactly through the Fourier representation of f.
  const double step = detail::kTwoPi * omega.value();
  std::vector<std::complex<double>> x(static_cast<size_t>(hi - lo + 3));
  for (int n = lo - 1; n <= hi + 1; ++n) {
    const double theta = step * n + w.phi;
    const std::complex<double> phase{std::cos(w.phi * n), std::sin(w.phi * n)};
    x[static_cast<size_t>(n - lo + 1)] = phase * w.f_at(theta);
  }
  double xmax = 0.0;
  for (const auto& xv : x) xmax = std::max(xmax, std::abs(xv));
  if (xmax == 0.0) return 0.0;

  double worst = 0.0;
  for (int n = lo; n <= hi; ++n) {
    const size_t i = static_cast<size_t>(n - lo + 1);
    const std::complex<double> r =
        x[i + 1] + x[i - 1] + (v(step * n + w.phi) - w.a) * x[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst / xmax;
}

DualityReport ids_duality_check(const Potential& v, const Frequency& omega,
                                std::span<const double> grid, int n_half,
                                std::span<const double> phis) {
  DualityReport rep;
  rep.grid.assign(grid.begin(), grid.end());
  const Potential hop = schrodinger_hopping();
  for (double a : grid) {
    const double kh = ids(hop, v, omega, phis, n_half, a).value;
    const double kl = ids(v, hop, omega, phis, n_half, a).value;
    rep.ids_h.push_back(kh);
    rep.ids_l.push_back(kl);
    rep.max_diff = std::max(rep.max_diff, std::abs(kh - kl));
  }
  return rep;
}

}  // namespace qps
