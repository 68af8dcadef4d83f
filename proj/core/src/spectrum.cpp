#include "qps/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "qps/fit.hpp"

namespace qps {

namespace {

constexpr double kTwoPi = detail::kTwoPi;

void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace

TruncatedOperator::TruncatedOperator(int n_half, int band) : n_half_(n_half), band_(band) {
  if (n_half < 1) throw std::invalid_argument("truncate: N must be >= 1");
  if (band < 0 || band > 2 * n_half)
    throw std::invalid_argument("truncate: band out of range");
  diag_.assign(static_cast<size_t>(size()), 0.0);
  off_.resize(static_cast<size_t>(band));
  for (int b = 1; b <= band; ++b)
    off_[static_cast<size_t>(b - 1)].assign(static_cast<size_t>(size() - b), 0.0);
}

double TruncatedOperator::entry(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int b = j - i;
  if (b == 0) return diag(i);
  if (b <= band_) return off(b, i);
  return 0.0;
}

double TruncatedOperator::gershgorin_bound() const {
  double bound = 0.0;
  for (int i = 0; i < size(); ++i) {
    double row = std::abs(diag(i));
    for (int b = 1; b <= band_; ++b) {
      if (i + b < size()) row += std::abs(off(b, i));
      if (i - b >= 0) row += std::abs(off(b, i - b));
    }
    bound = std::max(bound, row);
  }
  return bound;
}

TruncatedOperator truncate(const Potential& w, const Potential& v, const Frequency& omega,
                           double phi, int n_half, double band_tol) {
  // hopping must be real (even potential) for a real symmetric matrix
  double scale = 0.0;
  for (int k = 0; k <= w.band(); ++k) scale = std::max(scale, std::abs(w.coeff(k)));
  for (int k = 1; k <= w.band(); ++k) {
    if (std::abs(w.coeff(k).imag()) > 1e-12 * (1.0 + scale))
      throw std::invalid_argument(
          "truncate: hopping W must have real Fourier coefficients (even potential)");
  }

  // smallest band with dropped mass <= band_tol
  int band = w.band();
  double dropped = 0.0;
  while (band > 0 && dropped + 2.0 * std::abs(w.coeff(band)) <= band_tol) {
    dropped += 2.0 * std::abs(w.coeff(band));
    --band;
  }
  bool hopping_present = false;
  for (int k = 1; k <= w.band(); ++k)
    if (std::abs(w.coeff(k)) > 0.0) hopping_present = true;
  if (hopping_present && band == 0)
    throw std::invalid_argument("truncate: band_tol would truncate the entire hopping");
  band = std::min(band, 2 * n_half);

  TruncatedOperator t(n_half, band);
  const int n = t.size();
  for (int i = 0; i < n; ++i) {
    const int site = i - n_half;
    t.diag(i) = v(kTwoPi * omega.value() * site + phi) + w.coeff(0).real();
  }
  for (int b = 1; b <= band; ++b) {
    const double hop = w.coeff(b).real();
    for (int i = 0; i + b < n; ++i) t.off(b, i) = hop;
  }
  return t;
}

namespace {

// Sturm/LDL^T inertia for the tridiagonal case: counts eigenvalues <= a.
// A pivot inside [-pivmin, pivmin] is replaced by -pivmin (LAPACK dstebz
// convention), which counts exact ties as <=.
int count_tridiagonal(const TruncatedOperator& t, double a, double pivmin) {
  const int n = t.size();
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < n; ++i) {
    double x = t.diag(i) - a;
    if (i > 0) {
      const double e = t.off(1, i - 1);
      x -= e * e / q;
    }
    if (std::abs(x) < pivmin) x = -pivmin;
    if (x < 0) ++count;
    q = x;
  }
  return count;
}

// Banded symmetric elimination without pivoting; inertia of (T - a I).
int count_banded(const TruncatedOperator& t, double a, double pivmin) {
  const int n = t.size();
  const int band = t.band();
  // working band: w[i][b] = entry(i, i+b), updated in place
  std::vector<std::vector<double>> w(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(band + 1), 0.0));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)][0] = t.diag(i) - a;
    for (int b = 1; b <= band && i + b < n; ++b)
      w[static_cast<size_t>(i)][static_cast<size_t>(b)] = t.off(b, i);
  }
  int count = 0;
  for (int j = 0; j < n; ++j) {
    double d = w[static_cast<size_t>(j)][0];
    if (std::abs(d) < pivmin) d = -pivmin;  // tie counts as <=
    if (d < 0) ++count;
    const int last = std::min(j + band, n - 1);
    for (int r = j + 1; r <= last; ++r) {
      const double l = w[static_cast<size_t>(j)][static_cast<size_t>(r - j)] / d;
      if (l == 0.0) continue;
      for (int c = r; c <= last; ++c) {
        w[static_cast<size_t>(r)][static_cast<size_t>(c - r)] -=
            l * w[static_cast<size_t>(j)][static_cast<size_t>(c - j)];
      }
    }
  }
  return count;
}

}  // namespace

int eigen_count(const TruncatedOperator& t, double a) {
  const double pivmin = 1e-12 * (1.0 + std::abs(a) + t.gershgorin_bound());
  if (t.band() == 0) {
    int count = 0;
    for (int i = 0; i < t.size(); ++i)
      if (t.diag(i) <= a) ++count;
    return count;
  }
  if (t.band() == 1) return count_tridiagonal(t, a, pivmin);
  return count_banded(t, a, pivmin);
}

IdsEstimate ids(const Potential& w, const Potential& v, const Frequency& omega,
                std::span<const double> phis, int n_half, double a) {
  ScanContext ctx{w, v, omega, {phis.begin(), phis.end()}, n_half};
  return ids(ctx, a);
}

IdsEstimate ids(const ScanContext& ctx, double a) {
  if (ctx.n_half < 8) throw std::invalid_argument("ids: N must be >= 8");
  if (ctx.phis.empty()) throw std::invalid_argument("ids: need at least one phase");
  const int n_small = std::max(4, ctx.n_half / 2);
  double lo = 1.0, hi = 0.0, sum = 0.0, sum_small = 0.0;
  for (double phi : ctx.phis) {
    const auto t = truncate(ctx.w, ctx.v, ctx.omega, phi, ctx.n_half, ctx.band_tol);
    const double val = static_cast<double>(eigen_count(t, a)) / t.size();
    const auto ts = truncate(ctx.w, ctx.v, ctx.omega, phi, n_small, ctx.band_tol);
    sum_small += static_cast<double>(eigen_count(ts, a)) / ts.size();
    sum += val;
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  IdsEstimate e;
  e.value = sum / static_cast<double>(ctx.phis.size());
  const double small = sum_small / static_cast<double>(ctx.phis.size());
  e.err = (hi - lo) + std::abs(e.value - small);
  return e;
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

bool is_schrodinger_hopping(const Potential& w) {
  if (w.band() != 1) return false;
  return std::abs(w.coeff(0)) <= 1e-12 && std::abs(w.coeff(1) - std::complex<double>(1.0, 0.0)) <= 1e-12;
}

}  // namespace

SpectralScan scan(const Potential& w, const Potential& v, const Frequency& omega,
                  std::span<const double> grid, int n_half, const ScanOptions& opts) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("scan: grid must be sorted");
  if (opts.cocycle_quantities && !is_schrodinger_hopping(w))
    throw std::invalid_argument("scan: cocycle quantities need the Schrodinger hopping 2cos");

  SpectralScan s;
  s.grid.assign(grid.begin(), grid.end());
  s.meta = ScanContext{w, v, omega, opts.phis, n_half, opts.band_tol};
  const int n = static_cast<int>(grid.size());
  s.ids.assign(n, 0.0);
  s.ids_err.assign(n, 0.0);
  if (opts.cocycle_quantities) {
    s.lyap.assign(n, 0.0);
    s.rot.assign(n, 0.0);
  }
  parallel_for(n, opts.threads, [&](int i) {
    const auto e = ids(s.meta, grid[i]);
    s.ids[static_cast<size_t>(i)] = e.value;
    s.ids_err[static_cast<size_t>(i)] = e.err;
    if (opts.cocycle_quantities) {
      Cocycle c{grid[i], v, omega};
      s.lyap[static_cast<size_t>(i)] = lyapunov(c, opts.cocycle_theta0, opts.cocycle_steps);
      s.rot[static_cast<size_t>(i)] = rotation_number(c, opts.cocycle_theta0, opts.cocycle_steps);
    }
  });
  return s;
}

namespace {

// Bisect the entry point into the plateau level: predicate(x) = |ids(x) - level| <= tol.
double bisect_edge(const ScanContext& ctx, double level, double tol, double outside,
                   double inside, int iters) {
  double a = outside, b = inside;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (a + b);
    const bool in = std::abs(ids(ctx, mid).value - level) <= tol;
    (in ? b : a) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

std::optional<int> gap_label(double ids_value, const Frequency& omega, int kmax, double tol) {
  for (int k = 0; k <= kmax; ++k) {
    double frac = k * omega.value();
    frac -= std::floor(frac);
    if (std::abs(ids_value - frac) <= tol || std::abs(ids_value - (1.0 - frac)) <= tol)
      return k;
  }
  return std::nullopt;
}

std::vector<Gap> find_gaps(const SpectralScan& s, double plateau_tol,
                           const FindGapsOptions& opts) {
  const int n = static_cast<int>(s.grid.size());
  if (n < 3) throw std::invalid_argument("find_gaps: scan too short");
  std::vector<Gap> gaps;
  const double grid_step = (s.grid.back() - s.grid.front()) / (n - 1);

  int i = 0;
  while (i < n - 1) {
    if (s.ids[static_cast<size_t>(i + 1)] - s.ids[static_cast<size_t>(i)] > plateau_tol) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n - 1 &&
           s.ids[static_cast<size_t>(j + 1)] - s.ids[static_cast<size_t>(j)] <= plateau_tol)
      ++j;
    // run [i, j]; keep it when total drift stays within the plateau tolerance
    // and it is flanked by strictly larger variation (or touches the scan ends)
    const double drift = s.ids[static_cast<size_t>(j)] - s.ids[static_cast<size_t>(i)];
    const bool left_ok =
        i == 0 || s.ids[static_cast<size_t>(i)] - s.ids[static_cast<size_t>(i - 1)] > plateau_tol;
    const bool right_ok =
        j == n - 1 || s.ids[static_cast<size_t>(j + 1)] - s.ids[static_cast<size_t>(j)] > plateau_tol;
    if (drift <= plateau_tol && left_ok && right_ok && j > i) {
      Gap g;
      g.ids_value = s.ids[static_cast<size_t>((i + j) / 2)];
      g.lo = s.grid[static_cast<size_t>(i)];
      g.hi = s.grid[static_cast<size_t>(j)];
      if (opts.refine) {
        ScanContext ctx = s.meta;
        const double tol = std::max(plateau_tol, 2.0 / (2.0 * ctx.n_half + 1.0));
        if (i > 0)
          g.lo = bisect_edge(ctx, g.ids_value, tol, s.grid[static_cast<size_t>(i - 1)], g.lo,
                             opts.bisect_iters);
        if (j < n - 1)
          g.hi = bisect_edge(ctx, g.ids_value, tol, s.grid[static_cast<size_t>(j + 1)], g.hi,
                             opts.bisect_iters);
        if (opts.n_escalation > 1) {
          ctx.n_half *= opts.n_escalation;
          const double tol2 = std::max(plateau_tol, 2.0 / (2.0 * ctx.n_half + 1.0));
          const double level = ids(ctx, 0.5 * (g.lo + g.hi)).value;
          if (i > 0)
            g.lo = bisect_edge(ctx, level, tol2, g.lo - grid_step, g.lo + 0.25 * (g.hi - g.lo),
                               opts.bisect_iters);
          if (j < n - 1)
            g.hi = bisect_edge(ctx, level, tol2, g.hi + grid_step, g.hi - 0.25 * (g.hi - g.lo),
                               opts.bisect_iters);
          g.ids_value = level;
        }
      }
      g.collapsed = (i > 0 && j < n - 1) && (g.hi - g.lo) < opts.collapse_factor * grid_step;
      if (opts.attach_labels)
        g.label = gap_label(g.ids_value, s.meta.omega, opts.label_kmax, opts.label_tol);
      gaps.push_back(g);
    }
    i = j;
  }
  return gaps;
}

double ids_slope(double a1, double a2, const ScanContext& ctx) {
  if (a1 == a2) throw std::invalid_argument("ids_slope: a1 and a2 must differ");
  const double k1 = ids(ctx, a1).value;
  const double k2 = ids(ctx, a2).value;
  return std::abs((k1 - k2) / (a1 - a2));
}

EnergyClassification classify_energy(double a, const ScanContext& ctx,
                                     std::span<const double> h_seq,
                                     const ClassifyOptions& opts) {
  if (h_seq.size() < 2) throw std::invalid_argument("classify_energy: need >= 2 step sizes");
  for (size_t i = 1; i < h_seq.size(); ++i)
    if (h_seq[i] >= h_seq[i - 1])
      throw std::invalid_argument("classify_energy: h sequence must decrease");

  EnergyClassification out;
  const double base = ids(ctx, a).value;
  const double quantum = 1.0 / (2.0 * ctx.n_half + 1.0);
  const double floor = opts.zero_floor_factor * quantum;
  bool all_flat = true;
  for (double h : h_seq) {
    const double dp = std::abs(ids(ctx, a + h).value - base);
    const double dm = std::abs(ids(ctx, a - h).value - base);
    const double d = std::max(dp, dm);
    if (d > floor) all_flat = false;
    out.h.push_back(h);
    out.delta.push_back(d / h);
  }
  if (all_flat) {
    out.kind = EnergyClass::GapInterior;
    out.r2 = 1.0;
    return out;
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < out.h.size(); ++i) {
    if (out.delta[i] <= 0.0) continue;
    lx.push_back(std::log(out.h[i]));
    ly.push_back(std::log(out.delta[i]));
  }
  const LineFit f = fit_line(lx, ly);
  out.exponent = f.slope;
  out.r2 = f.r2;
  // r2 gates only the sqrt branch: flat data has no trend to correlate with
  if (f.n >= 2 && f.slope <= opts.sqrt_exponent_max && f.r2 >= opts.fit_r2_min) {
    out.kind = EnergyClass::GapEdgeSqrt;
  } else if (f.n >= 2 && std::abs(f.slope) <= opts.smooth_exponent_abs) {
    out.kind = EnergyClass::SmoothPoint;
  } else {
    out.kind = EnergyClass::Undetermined;
  }
  return out;
}

EnergyClassification classify_energy(double a, const Potential& v, const Frequency& omega,
                                     std::span<const double> h_seq, int n_half,
                                     const ClassifyOptions& opts) {
  ScanContext ctx;
  ctx.w = schrodinger_hopping();
  ctx.v = v;
  ctx.omega = omega;
  ctx.n_half = n_half;
  return classify_energy(a, ctx, h_seq, opts);
}

}  // namespace qps
