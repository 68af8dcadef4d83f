#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qps/duality.hpp"

using namespace qps;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("dual_operator: AMO gives the rescaled almost Mathieu matrix") {
  const auto g = Frequency::golden();
  const double b = 0.8;
  const auto l = dual_operator(amo_potential(b), g, 0.4, 3);
  CHECK(l.band() == 1);
  for (int i = 0; i + 1 < l.size(); ++i) CHECK(l.off(1, i) == doctest::Approx(b / 2));
  for (int i = 0; i < l.size(); ++i) {
    const int site = i - 3;
    CHECK(l.diag(i) == doctest::Approx(2.0 * std::cos(2 * kPi * g.value() * site + 0.4)));
  }
}

TEST_CASE("dual_operator: V = 0 is diagonal, two harmonics are pentadiagonal") {
  const auto g = Frequency::golden();
  CHECK(dual_operator(make_potential({}), g, 0.1, 4).band() == 0);
  const auto two = cosine_series({{1, 0.1}, {2, 0.04}});
  CHECK(dual_operator(two, g, 0.1, 4).band() == 2);
}

TEST_CASE("eigenpairs: closed forms") {
  // free 3x3: eigenvalues -sqrt2, 0, sqrt2
  const auto t = truncate(schrodinger_hopping(), make_potential({}), Frequency::golden(),
                          0.0, 1);
  const auto es = eigenpairs(t);
  CHECK(es.values[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(es.values[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(es.values[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // diagonal operator: eigenvalues are the sorted diagonal
  const auto diag = dual_operator(make_potential({}), Frequency::golden(), 0.7, 5);
  const auto ed = eigenpairs(diag);
  std::vector<double> expect;
  for (int i = 0; i < diag.size(); ++i) expect.push_back(diag.diag(i));
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < diag.size(); ++i)
    CHECK(ed.values[static_cast<size_t>(i)] == doctest::Approx(expect[static_cast<size_t>(i)]));

  // 3x3 with a swap block: eigenvalues -1, 1 plus the decoupled diagonal
  TruncatedOperator swp(1, 1);
  swp.diag(2) = 5.0;
  swp.off(1, 0) = 1.0;
  const auto esw = eigenpairs(swp);
  CHECK(esw.values[0] == doctest::Approx(-1.0));
  CHECK(esw.values[1] == doctest::Approx(1.0));
  CHECK(esw.values[2] == doctest::Approx(5.0));
  // the swap eigenvectors are (1, -+1)/sqrt2
  CHECK(std::abs(esw.vector(0)[0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(esw.vector(0)[1]) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("eigenpairs: residual and orthonormality gates on a random matrix") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  TruncatedOperator t(20, 2);
  for (int i = 0; i < t.size(); ++i) t.diag(i) = entry(rng);
  for (int b = 1; b <= 2; ++b)
    for (int i = 0; i + b < t.size(); ++i) t.off(b, i) = entry(rng);
  const auto es = eigenpairs(t);
  CHECK(es.max_residual <= 1e-10 * std::max(1.0, es.norm));
  for (int trial = 0; trial < 50; ++trial) {
    const int i = rng() % t.size();
    const int j = rng() % t.size();
    const auto vi = es.vector(i);
    const auto vj = es.vector(j);
    double dot = 0;
    for (int r = 0; r < t.size(); ++r) dot += vi[static_cast<size_t>(r)] * vj[static_cast<size_t>(r)];
    CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-10);
  }
}

TEST_CASE("localized_states: V = 0 accepts every delta eigenvector in the core") {
  // each eigenvector is an exact delta; the interior-mass gate keeps the
  // N/2 + 1 deltas centered inside |n| <= N/2 and every one of them passes
  const auto states = localized_states(make_potential({}), Frequency::golden(), 1.0, 40, {});
  CHECK(states.size() == 41);
  for (const auto& w : states) {
    CHECK(w.decay_rate > 5.0);
    CHECK(w.residual <= 1e-12);
  }
}

TEST_CASE("localized_states: resonant phase is guarded") {
  const auto g = Frequency::golden();
  CHECK_THROWS_AS(localized_states(amo_potential(0.5), g, kPi * g.value(), 30, {}),
                  std::invalid_argument);
  LocalizeOptions allow;
  allow.allow_resonant = true;
  CHECK_NOTHROW(localized_states(amo_potential(0.5), g, kPi * g.value(), 30, allow));
}

TEST_CASE("localized_states: AMO b=0.5 decay matches the dual Lyapunov oracle") {
  const auto g = Frequency::golden();
  const double b = 0.5;
  const auto states = localized_states(amo_potential(b), g, 1.0, 150, {});
  CHECK(states.size() >= 50);
  // oracle: eigenvector decay of L equals the Lyapunov exponent of the dual
  // cocycle (coupling 4/b at energy 2a/b), computed by brute force
  const Potential dual_v = amo_potential(4.0 / b);
  int checked = 0;
  double median_decay = 0;
  std::vector<double> decays;
  for (const auto& w : states) decays.push_back(w.decay_rate);
  std::sort(decays.begin(), decays.end());
  median_decay = decays[decays.size() / 2];
  CHECK(median_decay == doctest::Approx(std::log(4.0)).epsilon(0.15));
  for (size_t i = 0; i < states.size(); i += states.size() / 6) {
    const auto& w = states[i];
    const double gamma = lyapunov(Cocycle{2.0 * w.a / b, dual_v, g}, 0.3, 200000);
    CHECK(w.decay_rate == doctest::Approx(gamma).epsilon(0.2));
    ++checked;
  }
  CHECK(checked >= 5);
}

TEST_CASE("localized_states: tiny coupling localizes sharply") {
  const auto states =
      localized_states(cosine_series({{1, 1e-3}}), Frequency::golden(), 1.0, 100, {});
  CHECK(!states.empty());
  for (const auto& w : states) CHECK(w.decay_rate >= 3.0);
}

TEST_CASE("bloch_residual: delta eigenvector solves the free dual identity") {
  const auto g = Frequency::golden();
  BlochWave w;
  w.phi = 0.9;
  w.n_half = 30;
  w.f_coeffs.assign(61, {0.0, 0.0});
  const int m = 7;  // delta at site m
  w.f_coeffs[static_cast<size_t>(30 + m)] = {1.0, 0.0};
  w.a = 2.0 * std::cos(2 * kPi * g.value() * m + w.phi);
  CHECK(bloch_residual(w, make_potential({}), g) <= 1e-12);
}

TEST_CASE("bloch_residual: random coefficients are a negative control") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  BlochWave w;
  w.phi = 0.9;
  w.n_half = 30;
  w.a = 0.3;
  for (int i = 0; i < 61; ++i) w.f_coeffs.push_back({entry(rng), entry(rng)});
  CHECK(bloch_residual(w, amo_potential(0.5), Frequency::golden()) > 1e-2);
}

TEST_CASE("ids duality: AMO and the degenerate free case") {
  const auto g = Frequency::golden();
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-3.0 + 6.0 * i / 40);
  const std::vector<double> phis{0.5, 1.5, 2.5, 3.5};

  const auto amo = ids_duality_check(amo_potential(1.0), g, grid, 150, phis);
  CHECK(amo.max_diff <= 2e-2);

  const auto free0 = ids_duality_check(make_potential({}), g, grid, 150, phis);
  CHECK(free0.max_diff <= 2e-2);

  const auto amo2 = ids_duality_check(amo_potential(1.0), g, grid, 300, phis);
  CHECK(amo2.max_diff <= amo.max_diff + 1e-12);
}

TEST_CASE("localized energies are stable under window growth") {
  const auto g = Frequency::golden();
  const auto a1 = localized_states(amo_potential(0.5), g, 1.0, 150, {});
  const auto a2 = localized_states(amo_potential(0.5), g, 1.0, 200, {});
  REQUIRE(!a1.empty());
  int matched = 0;
  for (size_t i = 0; i < a1.size(); i += std::max<size_t>(1, a1.size() / 10)) {
    const double e1 = a1[i].a;
    double best = 1e9;
    for (const auto& w : a2) best = std::min(best, std::abs(w.a - e1));
    if (best <= 1e-6) ++matched;
  }
  CHECK(matched >= 8);
}

TEST_CASE("gershgorin bound dominates the dual spectrum") {
  const auto g = Frequency::golden();
  const auto v = cosine_series({{1, 0.3}, {2, 0.1}});
  const auto l = dual_operator(v, g, 0.2, 30);
  const auto es = eigenpairs(l);
  const double bound = 2.0 + 2.0 * (0.15 + 0.05);  // 2 + 2 sum_{k>0} |V_k| + |V_0|
  for (double lam : es.values) CHECK(std::abs(lam) <= bound + 1e-12);
}
