#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "segal/constructions.hpp"

using namespace segal;
using doctest::Approx;

TEST_CASE("lemma13 selection with alpha_n = 2^-n") {
  const Lemma13Sequence seq(ResolutionOfIdentity::geometric(1, 0.5));
  for (int n = 1; n <= 30; ++n) {
    CHECK(seq.k(n) == n);
    CHECK(seq.lambda(n) == Approx(std::pow(2.0, n) / (n * n)));
  }
  // every projection is selected, so sum alpha_n lambda_n = sum 1/n^2
  const oracle::Real direct =
      oracle::partial_sum([](long long n) { return 1.0L / ((oracle::Real)n * n); }, 100'000'000) + 1e-8L;
  CHECK(std::abs(seq.weighted_sum() - static_cast<double>(direct)) < 1e-8);
  CHECK(std::abs(seq.weighted_sum() - kPiSquaredOverSix) < 1e-12);

  const oracle::Real s6 = oracle::partial_sum(
      [](long long n) {
        const oracle::Real x = (oracle::Real)n;
        return (x * std::log(2.0L) - 2 * std::log(x)) / (x * x);
      },
      1'000'000);
  CHECK(seq.divergent_partial_sum(1'000'000) == Approx(static_cast<double>(s6)).epsilon(1e-12));
  CHECK(seq.divergent_partial_sum(1'000'000) == Approx(8.1012110709).epsilon(1e-10));

  for (double B : {10.0, 100.0, 1000.0}) {
    const DivergenceIndex idx = seq.divergence_index(B);
    CHECK(idx.partial_sum > B);
    CHECK(idx.monotone);
  }
  // S(1e6) ~ 8.1, so B = 5 is reached by direct summation; check minimality
  const DivergenceIndex five = seq.divergence_index(5);
  REQUIRE(five.exact);
  CHECK(seq.divergent_partial_sum(five.N) > 5);
  CHECK(seq.divergent_partial_sum(five.N - 1) <= 5);
  CHECK_FALSE(seq.divergence_index(10).exact);
}

TEST_CASE("lemma13 selection with alpha_n = 1/n^2") {
  ResolutionOfIdentity r;
  r.log_weight = Plg::from_factors(1, -2, 0, 1);
  const Lemma13Sequence seq(r);
  // first index after k_{n-1} with 1/k^2 <= 2^-n
  long long prev = 0;
  for (int n = 1; n <= 40; ++n) {
    long long k = prev + 1;
    while ((long double)k * k < std::pow(2.0L, n)) ++k;
    CHECK(seq.k(n) == k);
    prev = k;
  }
  CHECK(seq.k(8) == 16);
  CHECK(seq.lambda(7) == 1.0);  // 7 is never selected
  CHECK(seq.weighted_sum() <= seq.total() + kPiSquaredOverSix);
  CHECK(seq.divergence_index(100).partial_sum > 100);
}

TEST_CASE("lemma13 selection needs a summable resolution") {
  ResolutionOfIdentity r;
  r.log_weight = Plg::from_factors(1, -1, 0, 1);
  CHECK_THROWS_AS(Lemma13Sequence{r}, LabError);
}

TEST_CASE("thm12 truncation") {
  const auto d = make_density({{0.001, 10}, {1, 1}, {1000, 0.00001}});
  const TruncationResult r = thm12_truncation(d, 0.02);
  REQUIRE(r.h_prime.atoms.size() == 1);
  CHECK(r.h_prime.atoms[0].value == 1.0);
  CHECK(r.distance == Approx(0.02));
  CHECK(r.distance == Approx(l1_distance(d, r.h_prime)));

  const auto inside = make_density({{1.1, 1}, {1.9, 2}});
  CHECK(thm12_truncation(inside, 0.01).distance == 0.0);

  // tail points below m are dropped; the trace below m is checked by direct summation
  const auto il = make_density({{1, 1}}, inverse_log_square(1));
  const TruncationResult t = thm12_truncation(il, 0.1);
  CHECK(t.h_prime.tail.empty());
  CHECK(entropy(t.h_prime).value.verdict() == Verdict::finite);
  oracle::Real below = 0, kept = 0;
  for (long long n = 2; n < 2'000'000; ++n) {
    const oracle::Real x = 1.0L / (n * std::log((oracle::Real)n) * std::log((oracle::Real)n));
    (x < t.m ? below : kept) += x;
  }
  below += 1.0L / std::log(2'000'000.0L);
  CHECK(std::abs(t.trace_below - static_cast<double>(below)) < 1e-6);
  CHECK(t.trace_below < 0.1);
  CHECK(t.distance < 0.2);
}

TEST_CASE("thm12 on random densities") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lt(-12, 12), w(0.001, 2);
  int cases = 0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Atom> atoms;
    for (int i = 0; i < 1 + trial % 10; ++i) atoms.push_back({std::exp(lt(rng)), w(rng)});
    TailFamily tail;
    // tails scaled so that the upper cut stays representable at eps = 1e-4
    if (trial % 3 == 1) tail = geometric_over_square(0.5 + w(rng), 0.95, 1e-3 + w(rng) / 4);
    if (trial % 3 == 2) tail = geometric_over_square(0.5 + w(rng), 0.9, 1e-3 + w(rng) / 4);
    const auto d = make_density(atoms, tail);
    REQUIRE(validate(d).ok);
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const TruncationResult r = thm12_truncation(d, eps);
      CHECK(r.distance < 2 * eps);
      CHECK(entropy(r.h_prime).value.verdict() == Verdict::finite);
      ++cases;
    }
  }
  CHECK(cases == 100);
}

TEST_CASE("thm14 counterexample") {
  const auto d = thm14_counterexample(ResolutionOfIdentity::geometric(1, 0.5));
  CHECK(d.tail.kind == TailKind::geometric_over_square);
  CHECK(trace(d) == Approx(kPiSquaredOverSix).epsilon(1e-12));
  CHECK(entropy(d).value.verdict() == Verdict::plus_infinity);
  const auto n = thm14_counterexample(ResolutionOfIdentity::geometric(1, 0.5), true);
  CHECK(trace(n) == Approx(1).epsilon(1e-12));
  CHECK(entropy(n).value.verdict() == Verdict::plus_infinity);
  CHECK(validate(n).ok);

  ResolutionOfIdentity finite = ResolutionOfIdentity::geometric(1, 0.5);
  finite.length = 40;
  CHECK_THROWS_AS(thm14_counterexample(finite), LabError);

  ResolutionOfIdentity other;
  other.log_weight = Plg::from_factors(0.3, -3, 0, 1);
  const auto o = thm14_counterexample(other);
  CHECK(validate(o).ok);
  CHECK(std::isfinite(trace(o)));
  CHECK(entropy(o).value.verdict() == Verdict::plus_infinity);
}

TEST_CASE("thm15 case table") {
  const std::vector<SpectralDensity> ds = {make_density({{std::exp(1.0), 1}}),
                                           make_density({{0.001, 10}, {1, 1}, {1000, 0.00001}}),
                                           make_density({{0.5, 1}}, geometric_over_square(1, 0.5))};
  ResolutionOfIdentity constant;
  constant.log_weight = Plg::from_factors(1, 0, 0, 1);
  ResolutionOfIdentity up;
  up.log_weight = Plg::from_factors(1, 0, 0, 2);
  const std::vector<std::tuple<Thm15Case, ResolutionOfIdentity, Verdict>> table = {
      {{Thm15Case::Kind::case1, 1, 1}, constant, Verdict::minus_infinity},
      {{Thm15Case::Kind::case2}, ResolutionOfIdentity::geometric(1, 0.5), Verdict::plus_infinity},
      {{Thm15Case::Kind::case3}, up, Verdict::minus_infinity}};
  for (const auto& d : ds) {
    for (const auto& [c, r, v] : table) {
      for (double eps : {0.1, 0.01}) {
        const Thm15Result res = thm15_approximant(d, eps, c, r);
        CHECK(res.distance_bound < 3 * eps);
        CHECK(res.h1_trace < eps);
        CHECK(res.entropy.verdict() == v);
        CHECK(entropy(res.h_prime).value.verdict() == v);
        // h'_1 lives outside [m, M]
        const double m = res.truncation.m, M = res.truncation.M;
        CHECK(trace_below(res.h1_prime, m) + trace_above(res.h1_prime, M) ==
              Approx(res.h1_trace).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("thm15 case 1 diverges like -sum 1/(n log n)") {
  // lambda_n = kappa / (n log^2 n), so lambda log lambda ~ -kappa / (n log n) and the
  // partial sums fall like -kappa log log N: compare two direct blocks with that rate.
  const Thm15Result res = thm15_approximant(make_density({{2, 1}}), 0.05, {Thm15Case::Kind::case1, 1, 1},
                                            ResolutionOfIdentity{Plg::from_factors(1, 0, 0, 1)});
  CHECK(res.entropy_h1.verdict() == Verdict::minus_infinity);
  const oracle::Real kappa = res.lambda_scale;
  auto block = [&](long long a, long long b) {
    oracle::Real s = 0;
    for (long long n = a; n < b; ++n) {
      const oracle::Real x = n, l = kappa / (x * std::log(x) * std::log(x));
      s += l * std::log(l);
    }
    return s;
  };
  for (auto [a, b] : {std::pair{1'000'000LL, 10'000'000LL}, {100'000LL, 1'000'000LL}}) {
    const oracle::Real rate = -kappa * (std::log(std::log((oracle::Real)b)) - std::log(std::log((oracle::Real)a)));
    const oracle::Real s = block(a, b);
    CHECK(s < 0);
    CHECK(static_cast<double>(s / rate) > 1.0);  // the extra -2 log log n term only adds
  }
}

TEST_CASE("thm15 preconditions") {
  const auto finite = SpectralDensity{{{1, 1}}, {}, 2.0};
  ResolutionOfIdentity constant{Plg::from_factors(1, 0, 0, 1)};
  try {
    thm15_approximant(finite, 0.1, {Thm15Case::Kind::case1, 1, 1}, constant);
    FAIL("expected insufficient trace");
  } catch (const LabError& e) {
    CHECK(e.code() == ErrorCode::insufficient_trace);
  }
  CHECK_THROWS_AS(thm15_approximant(make_density({{1, 1}}), 0.1, {Thm15Case::Kind::case2}, constant), LabError);
  CHECK_THROWS_AS(thm15_approximant(make_density({{1, 1}}), 0.1, {Thm15Case::Kind::case1, 2, 3}, constant),
                  LabError);
}
