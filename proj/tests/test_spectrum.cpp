#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qps/duality.hpp"
#include "qps/spectrum.hpp"

using namespace qps;

namespace {

constexpr double kPi = std::numbers::pi;

double free_ids(double a) {
  if (a <= -2.0) return 0.0;
  if (a >= 2.0) return 1.0;
  return 1.0 - std::acos(a / 2.0) / kPi;
}

ScanContext free_context(int n_half) {
  ScanContext ctx;
  ctx.w = schrodinger_hopping();
  ctx.v = make_potential({});
  ctx.omega = Frequency::golden();
  ctx.n_half = n_half;
  return ctx;
}

}  // namespace

TEST_CASE("truncate: free case is tridiagonal with unit offdiagonal") {
  const auto t = truncate(schrodinger_hopping(), make_potential({}), Frequency::golden(),
                          0.0, 1);
  CHECK(t.size() == 3);
  CHECK(t.band() == 1);
  for (int i = 0; i < 3; ++i) CHECK(t.diag(i) == 0.0);
  CHECK(t.off(1, 0) == 1.0);
  CHECK(t.off(1, 1) == 1.0);
}

TEST_CASE("truncate: AMO diagonal carries V(2 pi w n + phi)") {
  const auto g = Frequency::golden();
  const auto t = truncate(schrodinger_hopping(), amo_potential(1.0), g, 0.0, 1);
  CHECK(t.diag(0) == doctest::Approx(std::cos(-2 * kPi * g.value())));
  CHECK(t.diag(1) == doctest::Approx(1.0));
  CHECK(t.diag(2) == doctest::Approx(std::cos(2 * kPi * g.value())));
}

TEST_CASE("truncate: dual-style hopping stays tridiagonal with b/2 offdiagonal") {
  const auto g = Frequency::golden();
  const double b = 0.7;
  const auto t = truncate(amo_potential(b), schrodinger_hopping(), g, 0.3, 2);
  CHECK(t.band() == 1);
  CHECK(t.off(1, 0) == doctest::Approx(b / 2.0));
  CHECK(t.diag(2) == doctest::Approx(2.0 * std::cos(0.3)));
}

TEST_CASE("truncate rejects a tolerance that kills the whole hopping") {
  CHECK_THROWS_AS(
      truncate(amo_potential(0.5), make_potential({}), Frequency::golden(), 0.0, 4, 10.0),
      std::invalid_argument);
}

TEST_CASE("eigen_count: free 3x3 and Gershgorin extremes") {
  const auto t = truncate(schrodinger_hopping(), make_potential({}), Frequency::golden(),
                          0.0, 1);
  // eigenvalues -sqrt2, 0, sqrt2
  CHECK(eigen_count(t, 0.0) == 2);   // ties count as <=
  CHECK(eigen_count(t, -1.5) == 0);
  CHECK(eigen_count(t, 1.0) == 2);
  CHECK(eigen_count(t, 1.5) == 3);
  CHECK(eigen_count(t, -t.gershgorin_bound() - 0.1) == 0);
  CHECK(eigen_count(t, t.gershgorin_bound() + 0.1) == t.size());
}

TEST_CASE("eigen_count agrees exactly with the dense Jacobi oracle (tridiagonal)") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::uniform_int_distribution<int> half(1, 5);  // sizes 3..11
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_half = half(rng);
    TruncatedOperator t(n_half, 1);
    for (int i = 0; i < t.size(); ++i) t.diag(i) = entry(rng);
    for (int i = 0; i + 1 < t.size(); ++i) t.off(1, i) = entry(rng);
    const auto es = eigenpairs(t);
    const double a = entry(rng);
    int dense = 0;
    for (double lam : es.values)
      if (lam <= a) ++dense;
    CHECK(eigen_count(t, a) == dense);
  }
}

TEST_CASE("eigen_count agrees with the dense oracle on banded matrices") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    TruncatedOperator t(4, 2);  // 9x9 pentadiagonal
    for (int i = 0; i < t.size(); ++i) t.diag(i) = entry(rng);
    for (int b = 1; b <= 2; ++b)
      for (int i = 0; i + b < t.size(); ++i) t.off(b, i) = entry(rng);
    const auto es = eigenpairs(t);
    const double a = entry(rng);
    int dense = 0;
    for (double lam : es.values)
      if (lam <= a) ++dense;
    CHECK(eigen_count(t, a) == dense);
  }
}

TEST_CASE("ids: free closed forms") {
  const auto ctx = free_context(500);
  CHECK(ids(ctx, 0.0).value == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(ids(ctx, 2.1).value == 1.0);
  CHECK(ids(ctx, 1.0).value == doctest::Approx(2.0 / 3.0).epsilon(5e-3));
  CHECK(ids(ctx, -3.0).value == 0.0);
}

TEST_CASE("ids is nondecreasing and shift-equivariant") {
  auto ctx = free_context(60);
  double prev = 0.0;
  for (int i = 0; i <= 30; ++i) {
    const double a = -2.5 + 5.0 * i / 30;
    const double v = ids(ctx, a).value;
    CHECK(v >= prev);
    prev = v;
  }
  // diagonal shift: ids(V + s, a + s) = ids(V, a) exactly
  ScanContext shifted = ctx;
  shifted.v = make_potential({{0, {0.7, 0.0}}});
  for (double a : {-1.0, 0.2, 1.4}) {
    CHECK(ids(shifted, a + 0.7).value == ids(ctx, a).value);
  }
}

TEST_CASE("scan + find_gaps: free case has exactly the two unbounded plateaus") {
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(-3.0 + 6.0 * i / 60);
  const auto s = scan(schrodinger_hopping(), make_potential({}), Frequency::golden(), grid,
                      200, {});
  const auto gaps = find_gaps(s, 2e-3);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps.front().ids_value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(gaps.back().ids_value == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(gaps.front().label.has_value());
  CHECK(*gaps.front().label == 0);
  CHECK(*gaps.back().label == 0);
  // refined band edges approach +-2
  CHECK(gaps.front().hi == doctest::Approx(-2.0).epsilon(2e-2));
  CHECK(gaps.back().lo == doctest::Approx(2.0).epsilon(2e-2));
}

TEST_CASE("scan reduces to the free case at zero coupling") {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-2.5 + 5.0 * i / 40);
  const auto s0 = scan(schrodinger_hopping(), amo_potential(0.0), Frequency::golden(), grid,
                       100, {});
  const auto sf = scan(schrodinger_hopping(), make_potential({}), Frequency::golden(), grid,
                       100, {});
  for (size_t i = 0; i < grid.size(); ++i) CHECK(s0.ids[i] == sf.ids[i]);
}

TEST_CASE("AMO b=1 golden: main gap carries label k=1 at ids ~ omega") {
  std::vector<double> grid;
  for (int i = 0; i <= 600; ++i) grid.push_back(-3.0 + 6.0 * i / 600);
  ScanOptions opts;
  const auto s = scan(schrodinger_hopping(), amo_potential(1.0), Frequency::golden(), grid,
                      300, opts);
  const auto gaps = find_gaps(s, 3e-3);
  REQUIRE(gaps.size() >= 3);
  // the spectrum is symmetric under a -> -a, so the k = 1 gap appears twice,
  // at ids ~ omega and at ids ~ 1 - omega, with equal widths
  const double w = Frequency::golden().value();
  const Gap* upper = nullptr;
  const Gap* lower = nullptr;
  for (const auto& g : gaps) {
    if (std::abs(g.ids_value - w) < 5e-3) upper = &g;
    if (std::abs(g.ids_value - (1.0 - w)) < 5e-3) lower = &g;
  }
  REQUIRE(upper != nullptr);
  REQUIRE(lower != nullptr);
  REQUIRE(upper->label.has_value());
  CHECK(*upper->label == 1);
  CHECK(*lower->label == 1);
  CHECK(std::abs((upper->hi - upper->lo) - (lower->hi - lower->lo)) < 2e-2);
  CHECK_FALSE(upper->collapsed);
}

TEST_CASE("gap_label folds both orientations") {
  const auto g = Frequency::golden();
  CHECK(gap_label(0.0, g, 20, 2e-3).value() == 0);
  CHECK(gap_label(g.value(), g, 20, 2e-3).value() == 1);
  CHECK(gap_label(1.0 - g.value(), g, 20, 2e-3).value() == 1);
  const double two = 2 * g.value() - 1.0;  // frac(2w) ~ 0.236
  CHECK(gap_label(two, g, 20, 2e-3).value() == 2);
  CHECK_FALSE(gap_label(0.5, g, 20, 1e-4).has_value());
}

TEST_CASE("ids_slope: constant inside a gap, density in the band") {
  const auto ctx = free_context(800);
  CHECK(ids_slope(2.3, 2.5, ctx) == 0.0);
  // free density 1/(pi sqrt(4 - a^2)) around a = 0
  const double slope = ids_slope(-0.1, 0.1, ctx);
  CHECK(slope == doctest::Approx(1.0 / (2 * kPi)).epsilon(0.05));
}

TEST_CASE("classify_energy: free band center is a smooth point, gaps are flat") {
  const auto ctx = free_context(1500);
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  const auto smooth = classify_energy(0.0, ctx, hs);
  CHECK(smooth.kind == EnergyClass::SmoothPoint);

  const auto interior = classify_energy(2.8, ctx, std::vector<double>{0.3, 0.15, 0.075});
  CHECK(interior.kind == EnergyClass::GapInterior);
}

TEST_CASE("classify_energy: free band edge shows the sqrt law") {
  const auto ctx = free_context(2000);
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05, 0.025};
  const auto edge = classify_energy(2.0, ctx, hs);
  CHECK(edge.kind == EnergyClass::GapEdgeSqrt);
  CHECK(edge.exponent == doctest::Approx(-0.5).epsilon(0.35));
}

TEST_CASE("gap plateau values are stable under N-doubling") {
  std::vector<double> grid;
  for (int i = 0; i <= 300; ++i) grid.push_back(-3.0 + 6.0 * i / 300);
  FindGapsOptions fg;
  fg.attach_labels = false;
  const auto s1 = scan(schrodinger_hopping(), amo_potential(1.0), Frequency::golden(), grid,
                       150, {});
  const auto s2 = scan(schrodinger_hopping(), amo_potential(1.0), Frequency::golden(), grid,
                       300, {});
  const auto g1 = find_gaps(s1, 3e-3, fg);
  const auto g2 = find_gaps(s2, 3e-3, fg);
  // match the widest interior plateau across the two resolutions
  auto widest = [](const std::vector<Gap>& gs) {
    const Gap* w = nullptr;
    for (const auto& g : gs) {
      if (g.ids_value < 1e-3 || g.ids_value > 1 - 1e-3) continue;
      if (!w || g.hi - g.lo > w->hi - w->lo) w = &g;
    }
    return w;
  };
  const Gap* w1 = widest(g1);
  const Gap* w2 = widest(g2);
  REQUIRE(w1 != nullptr);
  REQUIRE(w2 != nullptr);
  CHECK(std::abs(w1->ids_value - w2->ids_value) <= 2e-3);
}
