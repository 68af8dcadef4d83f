#include "qps/reducibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qps {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = detail::kTwoPi;

Mat2c mul(const Mat2c& a, const Mat2c& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

Mat2c to_complex(const Mat2& m) {
  return {{m.a11, 0.0}, {m.a12, 0.0}, {m.a21, 0.0}, {m.a22, 0.0}};
}

Mat2c sub(const Mat2c& a, const Mat2c& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

// residual and determinant statistics of A(theta) Z(theta) - Z(theta + 2 pi w) B
void conjugation_stats(Conjugation& z, int grid) {
  const double step = kTwoPi * z.omega.value();
  double worst = 0.0;
  std::complex<double> det_sum{0.0, 0.0};
  std::vector<std::complex<double>> dets(static_cast<size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double theta = kTwoPi * i / grid;
    const Mat2c zt = z.z_at(theta);
    const Mat2c zs = z.z_at(theta + step);
    const Mat2 at = Cocycle{z.energy, z.potential, z.omega}.matrix(theta);
    const Mat2c lhs = mul(to_complex(at), zt);
    const Mat2c rhs = mul(zs, z.floquet);
    worst = std::max(worst, sub(lhs, rhs).frobenius() / at.frobenius());
    dets[static_cast<size_t>(i)] = zt.det();
    det_sum += dets[static_cast<size_t>(i)];
  }
  z.residual = worst;
  z.det_mean = det_sum / static_cast<double>(grid);
  double dev = 0.0;
  for (const auto& d : dets) dev = std::max(dev, std::abs(d - z.det_mean));
  z.det_variation = std::abs(z.det_mean) > 0 ? dev / std::abs(z.det_mean) : dev;
}

}  // namespace

std::complex<double> FourierSeries::eval(double theta) const {
  const std::complex<double> u{std::cos(theta), std::sin(theta)};
  const std::complex<double> uc = std::conj(u);
  std::complex<double> pos{0.0, 0.0}, neg{0.0, 0.0};
  for (int k = degree_; k >= 1; --k) {
    pos = (pos + at(k)) * u;
    neg = (neg + at(-k)) * uc;
  }
  return pos + neg + at(0);
}

FourierSeries FourierSeries::from_samples(std::span<const std::complex<double>> samples,
                                          int degree) {
  const int m = static_cast<int>(samples.size());
  if (2 * degree + 1 > m)
    throw std::invalid_argument("FourierSeries: degree too high for the sample count");
  FourierSeries f(degree);
  for (int k = -degree; k <= degree; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
      const double ang = -kTwoPi * k * i / m;
      acc += samples[static_cast<size_t>(i)] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    f.at(k) = acc / static_cast<double>(m);
  }
  return f;
}

Mat2c Conjugation::z_at(double theta) const {
  return {entries[0].eval(theta), entries[1].eval(theta), entries[2].eval(theta),
          entries[3].eval(theta)};
}

Mat2 Conjugation::z_real_at(double theta) const {
  const Mat2c z = z_at(theta);
  return {z.a11.real(), z.a12.real(), z.a21.real(), z.a22.real()};
}

Conjugation build_y(const BlochWave& w, const Potential& v, const Frequency& omega,
                    int grid_size, double dep_tol) {
  const double res = w.residual >= 0 ? w.residual : bloch_residual(w, v, omega);
  if (res > 1e-6)
    throw std::invalid_argument("build_y: Bloch residual gate failed (" + std::to_string(res) +
                                ")");
  const int deg = w.n_half;
  if (grid_size < 2 * deg + 2)
    throw std::invalid_argument("build_y: grid must resolve the Bloch coefficients");

  Conjugation y;
  y.kind = ConjKind::Raw;
  y.grid_size = grid_size;
  y.phi = w.phi;
  y.energy = w.a;
  y.potential = v;
  y.omega = omega;
  // v(theta) = (f(theta), e^{-i phi} f(theta - 2 pi w)): with this frame the
  // dual eigenvalue identity turns into A(theta) v(theta) = e^{i phi} v(theta + 2 pi w)
  // exactly (the lattice relation pins the V argument to the first component)
  FourierSeries v1(deg), v2(deg), v1c(deg), v2c(deg);
  const std::complex<double> em{std::cos(w.phi), -std::sin(w.phi)};  // e^{-i phi}
  for (int n = -deg; n <= deg; ++n) {
    const std::complex<double> psi = w.f_coeffs[static_cast<size_t>(n + deg)];
    const double ang = -kTwoPi * omega.value() * n;
    v1.at(n) = psi;
    v2.at(n) = em * psi * std::complex<double>{std::cos(ang), std::sin(ang)};
  }
  for (int n = -deg; n <= deg; ++n) {
    v1c.at(n) = std::conj(v1.at(-n));
    v2c.at(n) = std::conj(v2.at(-n));
  }
  y.entries = {v1, v1c, v2, v2c};
  y.floquet = {{std::cos(w.phi), std::sin(w.phi)},
               {0.0, 0.0},
               {0.0, 0.0},
               {std::cos(w.phi), -std::sin(w.phi)}};
  conjugation_stats(y, grid_size);
  if (std::abs(y.det_mean) < dep_tol) throw DegenerateY(std::abs(y.det_mean));
  return y;
}

DependenceResult dependence_test(const BlochWave& w, const Frequency& omega, double tol,
                                 int kmax) {
  DependenceResult out;
  const PhaseResonance res = nearest_phase_resonance(w.phi, omega, kmax, tol);
  out.dependent = res.resonant;
  out.k = res.k;
  out.j = res.j;
  out.distance = res.distance;

  // cross-check against |det Y| = 2 |Im(v1 conj(v2))|
  const std::complex<double> em{std::cos(w.phi), -std::sin(w.phi)};
  double min_det = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i) {
    const double theta = kTwoPi * i / 64;
    const std::complex<double> v1 = w.f_at(theta);
    const std::complex<double> v2 = em * w.f_at(theta - kTwoPi * omega.value());
    min_det = std::min(min_det, 2.0 * std::abs(std::imag(v1 * std::conj(v2))));
  }
  out.min_abs_det_y = min_det;
  return out;
}

Conjugation realify(const Conjugation& raw) {
  if (raw.kind != ConjKind::Raw)
    throw std::invalid_argument("realify: input must be a raw Bloch conjugation");
  const std::complex<double> d = raw.det_mean;
  if (std::abs(d.imag()) < 1e-12) throw DegenerateY(std::abs(d));

  Conjugation out;
  out.kind = ConjKind::Rotation;
  out.grid_size = raw.grid_size;
  out.energy = raw.energy;
  out.potential = raw.potential;
  out.omega = raw.omega;
  FourierSeries y1 = raw.entries[0], y2 = raw.entries[1];
  FourierSeries y3 = raw.entries[2], y4 = raw.entries[3];
  double phi = raw.phi;
  double im = d.imag();
  if (im > 0) {  // swap the conjugate pair so det can be scaled to -i/2
    std::swap(y1, y2);
    std::swap(y3, y4);
    phi = -phi;
    im = -im;
  }
  const double s = std::sqrt(-0.5 / im);  // det scales by s^2 under Y -> sY
  const int deg = y1.degree();
  FourierSeries z11(deg), z12(deg), z21(deg), z22(deg);
  const std::complex<double> mi{0.0, -1.0}, pli{0.0, 1.0};
  for (int k = -deg; k <= deg; ++k) {
    const auto a = y1.at(k) * s, b = y2.at(k) * s;
    const auto c = y3.at(k) * s, e = y4.at(k) * s;
    z11.at(k) = a + b;  // column v + conj v
    z12.at(k) = mi * a + pli * b;
    z21.at(k) = c + e;
    z22.at(k) = mi * c + pli * e;
  }
  // reality check on coefficients: c_{-k} must equal conj(c_k)
  double scale = 0.0, asym = 0.0;
  for (const auto* f : {&z11, &z12, &z21, &z22}) {
    for (int k = 0; k <= deg; ++k) {
      scale = std::max(scale, std::abs(f->at(k)));
      asym = std::max(asym, std::abs(f->at(-k) - std::conj(f->at(k))));
    }
  }
  if (asym > 1e-10 * (1.0 + scale)) throw DegenerateY(std::abs(d));

  out.entries = {z11, z12, z21, z22};
  out.phi = phi;
  out.floquet = to_complex(Mat2::rotation(phi));
  conjugation_stats(out, out.grid_size);
  return out;
}

QpVec2 real_solution_from_bloch(const BlochWave& w, const Frequency& omega,
                                double parity_tol) {
  // phi must be 0 or pi mod 2 pi; other resonant phases live on the doubled torus
  const double mod = w.phi - kTwoPi * std::floor(w.phi / kTwoPi + 0.5);
  const bool phase_zero = std::abs(mod) <= parity_tol;
  const bool phase_pi = std::abs(std::abs(mod) - kPi) <= parity_tol;
  if (!phase_zero && !phase_pi)
    throw std::invalid_argument(
        "real_solution_from_bloch: Floquet exponent is not 0 or pi (mod 2 pi); this "
        "resonant case needs the frequency-halving construction, which is reported, "
        "not built");

  const int deg = w.n_half;
  // split psi into even and odd parts; the reflection-symmetric dual operator
  // has definite-parity eigenvectors, except that exponentially close twin
  // states (localization centers at +-n0) may reach us mixed, so project on
  // the dominant parity (the projection is an eigenvector up to the twin
  // splitting, which the downstream residual gates verify)
  FourierSeries even(deg), odd(deg);
  double even_norm = 0, odd_norm = 0;
  for (int n = -deg; n <= deg; ++n) {
    const auto p = w.f_coeffs[static_cast<size_t>(n + deg)];
    const auto q = w.f_coeffs[static_cast<size_t>(-n + deg)];
    even.at(n) = 0.5 * (p + q);
    odd.at(n) = std::complex<double>{0.0, -0.5} * (p - q);
    even_norm += std::norm(even.at(n));
    odd_norm += std::norm(odd.at(n));
  }
  const bool use_even = even_norm >= odd_norm;
  const double majority = use_even ? even_norm : odd_norm;
  if (majority <= 0.0)
    throw std::invalid_argument("real_solution_from_bloch: zero eigenvector");
  FourierSeries f = use_even ? even : odd;
  const double scale = 1.0 / std::sqrt(majority);
  for (int k = -deg; k <= deg; ++k) f.at(k) = f.at(k) * scale;

  QpVec2 out;
  out.c1 = FourierSeries(deg);
  out.c2 = FourierSeries(deg);
  const double sgn = phase_zero ? 1.0 : -1.0;  // e^{-i phi} at phi = 0 or pi
  for (int k = -deg; k <= deg; ++k) {
    const double ang = -kTwoPi * omega.value() * k;
    out.c1.at(k) = f.at(k);
    out.c2.at(k) = sgn * f.at(k) * std::complex<double>{std::cos(ang), std::sin(ang)};
  }
  // phi = pi gives the antiperiodic relation v(theta + 2 pi w) = -A v (the
  // minus-identity Floquet family); resonant_reduce detects and reports it
  return out;
}

ResonantReduction resonant_reduce(const QpVec2& v_sol, const Potential& v,
                                  const Frequency& omega, double a, int grid_size,
                                  const ResonantReduceOptions& opts) {
  const int m = grid_size;
  const double step = kTwoPi * omega.value();

  double min_norm = std::numeric_limits<double>::infinity(), max_norm = 0.0;
  double plus = 0.0, minus = 0.0;  // residuals of v+ = A v and v+ = -A v
  for (int i = 0; i < m; ++i) {
    const double theta = kTwoPi * i / m;
    const Vec2 vt = v_sol.at(theta);
    const Vec2 vs = v_sol.at(theta + step);
    const Mat2 at = Cocycle{a, v, omega}.matrix(theta);
    const Vec2 av = at * vt;
    min_norm = std::min(min_norm, std::hypot(vt.x, vt.y));
    max_norm = std::max(max_norm, std::hypot(vt.x, vt.y));
    plus = std::max(plus, std::hypot(vs.x - av.x, vs.y - av.y));
    minus = std::max(minus, std::hypot(vs.x + av.x, vs.y + av.y));
  }
  if (max_norm == 0.0) throw VanishingV(0.0, false);
  if (plus > opts.input_tol * max_norm) {
    if (minus <= opts.input_tol * max_norm) throw VanishingV(min_norm, true);
    throw std::invalid_argument("resonant_reduce: v is not a quasi-periodic solution");
  }
  if (min_norm <= opts.v_tol * max_norm) throw VanishingV(min_norm, false);

  // S = (v | v_perp / |v|^2), det 1; T = S(theta + 2 pi w)^{-1} A S = ((1, c~), (0, 1))
  std::vector<double> ctilde(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double theta = kTwoPi * i / m;
    const Vec2 vt = v_sol.at(theta);
    const Vec2 vs = v_sol.at(theta + step);
    const Mat2 at = Cocycle{a, v, omega}.matrix(theta);
    const double n2t = vt.x * vt.x + vt.y * vt.y;
    const double n2s = vs.x * vs.x + vs.y * vs.y;
    const Mat2 st{vt.x, -vt.y / n2t, vt.y, vt.x / n2t};
    const Mat2 ss_inv{vs.x / n2s, vs.y / n2s, -vs.y, vs.x};  // adjugate, det S = 1
    const Mat2 t = ss_inv * (at * st);
    ctilde[static_cast<size_t>(i)] = t.a12;
  }
  double c = 0.0;
  for (double x : ctilde) c += x;
  c /= m;

  // cohomological equation u(theta + 2 pi w) - u(theta) = c~(theta) - c,
  // coefficient division by e^{2 pi i k w} - 1 up to the hard cutoff
  const int kcut = std::min(opts.kcut, m / 2 - 1);
  double cscale = 0.0;
  for (double x : ctilde) cscale = std::max(cscale, std::abs(x));
  FourierSeries u(kcut);
  for (int k = 1; k <= kcut; ++k) {
    std::complex<double> hat{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
      const double ang = -kTwoPi * k * i / m;
      hat += ctilde[static_cast<size_t>(i)] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    hat /= static_cast<double>(m);
    const double ang = kTwoPi * k * omega.value();
    const std::complex<double> div{std::cos(ang) - 1.0, std::sin(ang)};
    if (std::abs(div) < opts.div_tol) {
      if (std::abs(hat) > opts.negligible * (1.0 + cscale))
        throw SmallDivisorOverflow(k, std::abs(div));
      continue;
    }
    u.at(k) = hat / div;
    u.at(-k) = std::conj(u.at(k));
  }

  // Z = S E with E = ((1, u), (0, 1)); sample and trig-interpolate the entries
  std::vector<std::complex<double>> s11(static_cast<size_t>(m)), s12(static_cast<size_t>(m)),
      s21(static_cast<size_t>(m)), s22(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double theta = kTwoPi * i / m;
    const Vec2 vt = v_sol.at(theta);
    const double n2 = vt.x * vt.x + vt.y * vt.y;
    const double ut = u.eval(theta).real();
    s11[static_cast<size_t>(i)] = {vt.x, 0.0};
    s12[static_cast<size_t>(i)] = {vt.x * ut - vt.y / n2, 0.0};
    s21[static_cast<size_t>(i)] = {vt.y, 0.0};
    s22[static_cast<size_t>(i)] = {vt.y * ut + vt.x / n2, 0.0};
  }
  const int deg = m / 2 - 1;
  ResonantReduction out;
  out.c = c;
  out.conj.kind = ConjKind::Triangular;
  out.conj.grid_size = m;
  out.conj.c = c;
  out.conj.energy = a;
  out.conj.potential = v;
  out.conj.omega = omega;
  out.conj.entries = {FourierSeries::from_samples(s11, deg), FourierSeries::from_samples(s12, deg),
                      FourierSeries::from_samples(s21, deg), FourierSeries::from_samples(s22, deg)};
  out.conj.floquet = {{1.0, 0.0}, {c, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  conjugation_stats(out.conj, m);
  return out;
}

ResidualReport verify_conjugation(const Conjugation& z, const Potential& v, double a,
                                  const Frequency& omega) {
  const int grid = 2 * std::max(z.grid_size, 16);
  const double step = kTwoPi * omega.value();
  ResidualReport rep;
  double sum = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double theta = kTwoPi * i / grid;
    const Mat2 at = Cocycle{a, v, omega}.matrix(theta);
    const Mat2c lhs = mul(to_complex(at), z.z_at(theta));
    const Mat2c rhs = mul(z.z_at(theta + step), z.floquet);
    const double r = sub(lhs, rhs).frobenius() / at.frobenius();
    rep.max_res = std::max(rep.max_res, r);
    sum += r;
  }
  rep.mean_res = sum / grid;
  return rep;
}

int winding_degree_first_column(const Conjugation& z, int samples) {
  if (z.kind == ConjKind::Raw)
    throw std::invalid_argument("winding degree needs a realified conjugation");
  double total = 0.0;
  const Mat2 z0 = z.z_real_at(0.0);
  Vec2 prev{z0.a11, z0.a21};
  for (int i = 1; i <= samples; ++i) {
    const double theta = kTwoPi * i / samples;
    const Mat2 zt = z.z_real_at(theta);
    const Vec2 cur{zt.a11, zt.a21};
    total += std::atan2(prev.x * cur.y - prev.y * cur.x, prev.x * cur.x + prev.y * cur.y);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace qps
