#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "segal/regularization.hpp"

using namespace segal;
using doctest::Approx;

namespace {
std::vector<std::pair<double, double>> pairs(const SpectralDensity& d) {
  std::vector<std::pair<double, double>> out;
  for (const Atom& a : d.atoms) out.emplace_back(a.value, a.weight);
  return out;
}
const double kE = std::exp(1.0);
}  // namespace

TEST_CASE("scalar f_{m,M}") {
  const RegularizationParams p(0.01, 100);
  CHECK(f_mM_scalar(1, p) == 0.0);
  CHECK(f_mM_scalar(0, p) == 0.0);
  // t log((M+1)(m+t)/((m+1)(M+t))) in long double
  const oracle::Real t = kE;
  const double expected = static_cast<double>(t * std::log(101.0L * (0.01L + t) / (1.01L * (100.0L + t))));
  CHECK(f_mM_scalar(kE, p) == Approx(expected).epsilon(1e-14));
  CHECK(expected == Approx(2.65535935909109).epsilon(1e-13));
  CHECK_THROWS_AS(RegularizationParams(2, 1), LabError);
}

TEST_CASE("tau_f closed form against the quadrature oracles") {
  const RegularizationParams p(0.01, 100);
  CHECK(tau_f_mM(make_density({{1, 7}}), p) == 0.0);
  CHECK(tau_f_mM_quadrature_oracle(make_density({{1, 1}}), p) == Approx(0).scale(1));
  const auto e = make_density({{kE, 1}});
  CHECK(std::abs(tau_f_mM(e, p) - tau_f_mM_quadrature_oracle(e, p)) <= 1e-8);
  CHECK(std::abs(tau_f_mM(e, p) - static_cast<double>(oracle::regularized(pairs(e), 0.01, 100))) <= 1e-10);

  const auto two = make_density({{2, 0.5}, {0.5, 1}});
  for (auto [m, M] : {std::pair{0.01, 10.0}, {0.5, 2.0}}) {
    const RegularizationParams q(m, M);
    const double closed = tau_f_mM(two, q);
    CHECK(std::abs(closed - tau_f_mM_quadrature_oracle(two, q)) <= 1e-8);
    CHECK(std::abs(closed - static_cast<double>(oracle::regularized(pairs(two), m, M))) <= 1e-10);
  }
  CHECK(tau_f_mM(two, RegularizationParams(0.01, 10)) == Approx(0.282785579987166).epsilon(1e-12));
  CHECK_THROWS_AS(tau_f_mM_quadrature_oracle(make_density({}, geometric_over_square(1, 0.5)), p), LabError);
}

TEST_CASE("random densities: closed form equals both oracles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lt(std::log(1e-4), std::log(1e4)), w(0.01, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Atom> atoms;
    for (int i = 0; i < 1 + trial % 20; ++i) atoms.push_back({std::exp(lt(rng)), w(rng)});
    const auto d = make_density(atoms);
    for (auto [m, M] : {std::pair{1e-2, 1e2}, {1e-3, 1e3}}) {
      const RegularizationParams p(m, M);
      const double closed = tau_f_mM(d, p);
      CHECK(std::abs(closed - tau_f_mM_quadrature_oracle(d, p)) <= 1e-8);
      CHECK(std::abs(closed - static_cast<double>(oracle::regularized(pairs(d), m, M))) <= 1e-8);
    }
  }
}

TEST_CASE("tail regularization agrees with a long double partial sum") {
  // geometric tail: points (2^n/n^2, 2^-n)
  const auto d = make_density({}, geometric_over_square(1, 0.5));
  for (double M : {10.0, 100.0, 1e4}) {
    const double m = 1 / M;
    oracle::Real s = 0;
    for (int n = 1200; n >= 1; --n) {
      const oracle::Real t = std::pow(2.0L, n) / ((oracle::Real)n * n), w = std::pow(0.5L, n);
      s += w * t * std::log((M + 1.0L) * (m + t) / ((m + 1.0L) * (M + t)));
    }
    // n > 1200: t >> M, each term is log((M+1)/(m+1)) / n^2
    const oracle::Real N = 1200;
    s += std::log((M + 1.0L) / (m + 1.0L)) * (1 / N - 1 / (2 * N * N) + 1 / (6 * N * N * N));
    CHECK(tau_f_mM(d, RegularizationParams(m, M)) == Approx(static_cast<double>(s)).epsilon(1e-11));
  }
  CHECK(tau_f_mM(d, RegularizationParams(1e-12, 1e12)) == Approx(1.98455123791).epsilon(1e-10));
}

TEST_CASE("Lipschitz modulus") {
  CHECK(lipschitz_modulus(RegularizationParams(0.5, 2)) == Approx(std::log(8.0)).epsilon(1e-15));
  const double numeric = static_cast<double>(
      oracle::integrate([](oracle::Real s) { return 1 / (s + 1) + 1 / s; }, 0.5L, 2.0L));
  CHECK(std::abs(numeric - std::log(8.0)) <= 1e-10);
  CHECK(lipschitz_modulus(RegularizationParams(0.5, 0.5 * (1 + 1e-9))) < 1e-8);
  CHECK(lipschitz_modulus(RegularizationParams(0.01, 100)) == Approx(std::log(100.0) + std::log(1e4)));
}

TEST_CASE("scalar sandwich") {
  for (double M : {2.0, 10.0, 1e3}) {
    for (int i = 0; i <= 2000; ++i) {
      const double t = std::pow(10.0, -6 + 12.0 * i / 2000);
      const double q = (M * t + 1) / (M + t);
      if (t <= 1) {
        CHECK(t <= q * (1 + 1e-15));
        CHECK(q <= 1 + 1e-15);
      } else {
        CHECK(1 <= q * (1 + 1e-15));
        CHECK(q <= t * (1 + 1e-15));
      }
    }
  }
}

TEST_CASE("Lipschitz property on aligned pairs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lt(std::log(1e-3), std::log(1e3)), w(0.05, 2), mm(0.05, 0.9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Atom> a, b;
    for (int i = 0; i < 1 + trial % 8; ++i) {
      const double wi = w(rng) + 2 * i;
      a.push_back({std::exp(lt(rng)), wi});
      b.push_back({std::exp(lt(rng)), wi});
    }
    const double m = mm(rng);
    const RegularizationParams p(m, 1 / m);
    const auto d1 = make_density(a), d2 = make_density(b);
    CHECK(std::abs(tau_f_mM(d1, p) - tau_f_mM(d2, p)) <= lipschitz_modulus(p) * l1_distance(d1, d2) + 1e-9);
  }
}

TEST_CASE("sweep") {
  const auto e = lemma1_sweep(make_density({{kE, 1}}), {10, 100, 1000, 1e4});
  REQUIRE(e.rows.size() == 4);
  for (std::size_t i = 1; i < e.rows.size(); ++i) CHECK(e.rows[i].gap < e.rows[i - 1].gap);
  CHECK(e.rows.back().gap < 1e-3);
  CHECK(e.verdict == SweepVerdict::converging);

  const auto one = lemma1_sweep(make_density({{1, 1}}), {3, 30});
  for (const auto& r : one.rows) CHECK(r.tau_f == 0.0);
  CHECK(one.verdict == SweepVerdict::converging);

  const auto g = make_density({}, geometric_over_square(1, 0.5));
  SweepSettings grid_only;
  grid_only.extend = false;
  CHECK(lemma1_sweep(g, {10, 1e12}, grid_only).verdict == SweepVerdict::inconclusive);
  const auto ext = lemma1_sweep(g, {10, 1e12});
  CHECK(ext.verdict == SweepVerdict::diverging_up);
  REQUIRE(ext.witness.available);
  CHECK(ext.witness.lower_bound > 1e3);
  // the witness is the first integer log log M that certifies the threshold
  CHECK(regularized_lower_bound(g, ext.witness.log_log_M - 1) <= 1e3);
  CHECK_THROWS_AS(lemma1_sweep(g, {10, 5}), LabError);
}

TEST_CASE("the certified lower bound never exceeds the computed value") {
  const auto g = make_density({}, geometric_over_square(1, 0.5));
  for (double lambda : {1.0, 2.0, 3.0, 3.3}) {
    const double M = std::exp(std::exp(lambda));
    CHECK(regularized_lower_bound(g, lambda) <= tau_f_mM(g, RegularizationParams(1 / M, M)) + 1e-12);
  }
}

TEST_CASE("monotone gaps on finite-entropy densities") {
  const std::vector<SpectralDensity> ds = {
      make_density({{kE, 1}}), make_density({{2, 0.5}, {0.5, 1}}),
      make_density({{0.001, 10}, {1, 1}, {1000, 0.00001}}),
      make_density({{2, 0.25}}, make_tail(TailKind::custom_pair_sequence, {{"t.coef", "1"}, {"t.pow", "-3"}, {"w.coef", "1"}}))};
  for (const auto& d0 : ds) {
    SpectralDensity d = d0;
    derive_declarations(d.tail);
    const auto r = lemma1_sweep(d, {10, 100, 1e3, 1e4, 1e5, 1e6});
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].gap <= r.rows[i - 1].gap + 1e-12);
  }
}
