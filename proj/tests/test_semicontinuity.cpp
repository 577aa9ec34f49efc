#include <doctest.h>

#include "oracles.hpp"
#include "segal/semicontinuity.hpp"

using namespace segal;
using doctest::Approx;

namespace {

ExperimentSpec spec(std::vector<Atom> atoms, SemicontinuityMode mode, double eps, SequenceRule seq = {},
                    double T = kInf) {
  ExperimentSpec x;
  x.h0 = SpectralDensity{std::move(atoms), {}, T};
  x.mode = mode;
  x.epsilon = eps;
  x.sequence = seq;
  return x;
}

double min_slack(const SemicontinuityExperiment& x) {
  double s = kInf;
  for (const auto& r : run_experiment(x)) s = std::min(s, r.slack);
  return s;
}

SequenceRule additive(double a, double p) { return {SequenceRule::Kind::additive, a, p}; }

}  // namespace

TEST_CASE("r(eps)") {
  CHECK(r_eps(1.0) == 0.0);
  CHECK(r_eps(0.5) == 0.0);
  const double r = r_eps(0.1);
  CHECK(r == Approx(static_cast<double>(oracle::r_eps(0.1L))).epsilon(1e-6));
  CHECK(r == Approx(3.43063112140789e15).epsilon(1e-9));
  double prev = kInf;
  for (int i = 1; i <= 20; ++i) {
    const double eps = 0.05 * i;
    const double ri = r_eps(eps);
    CHECK(ri <= prev);
    prev = ri;
    if (ri > 0) {
      for (int j = 0; j <= 200; ++j) {
        const double u = ri * (1 + 1e-6) * std::pow(1e3, j / 200.0);
        CHECK(std::log1p(u) <= std::pow(u, eps));
      }
      CHECK(std::log1p(ri * (1 - 1e-6)) > std::pow(ri * (1 - 1e-6), eps));
    }
  }
}

TEST_CASE("moments and the tail mass inequality") {
  CHECK(moment(make_density({{1, 3}}), 1.7) == 3.0);
  CHECK(moment(make_density({{2, 0.5}, {0.5, 1}}), 2) == Approx(2.25));
  CHECK(moment(make_density({{4, 1}}), 0.5) == Approx(2));
  CHECK(std::isinf(moment(make_density({}, geometric_over_square(1, 0.5)), 1.5)));

  const auto a = tail_mass_inequality_check(make_density({{1, 1}}), 1, 0.5);
  CHECK(a.lhs == Approx(1));
  CHECK(a.slack == Approx(0).scale(1));
  const auto b = tail_mass_inequality_check(make_density({{2, 0.5}, {0.5, 1}}), 1, 0.5);
  CHECK(b.lhs == Approx(0.5));
  CHECK(b.rhs == Approx(std::sqrt(2.0) * 0.5 + std::sqrt(0.5)));
  const auto c = tail_mass_inequality_check(make_density({{4, 1}}), 2, 0.5);
  CHECK(c.lhs == Approx(std::sqrt(2.0)));
  CHECK(c.rhs == Approx(2));
  for (double a2 : {0.01, 0.3, 1.0, 7.0, 1e3})
    CHECK(tail_mass_inequality_check(make_density({{1, 1}}, geometric_over_square(1, 0.5)), a2, 0.3).slack >= -1e-9);
}

TEST_CASE("upper chain") {
  const double e = std::exp(1.0);
  ExperimentSpec s = spec({{e, 1}}, SemicontinuityMode::upper, 0.5);
  s.c = std::pow(e, 1.5);
  s.n_max = 5;
  const SemicontinuityExperiment x(s);
  const auto row = usc_bound_check(x, 0.01, 100, 1);
  CHECK(row.lhs == Approx(e));
  CHECK(row.slack >= 0);

  ExperimentSpec moving = spec({{e, 1}}, SemicontinuityMode::upper, 0.5, additive(1, 1));
  const SemicontinuityExperiment y(moving);
  CHECK(y.h(4).atoms[0].value == Approx(e + 0.25));
  CHECK(min_slack(y) >= -1e-9);

  ExperimentSpec unit = spec({{1, 1}}, SemicontinuityMode::upper, 0.5);
  unit.n_max = 3;
  const SemicontinuityExperiment z(unit);
  const auto u = usc_bound_check(z, 0.01, 100, 2);
  CHECK(u.lhs == 0.0);
  CHECK(u.rhs == Approx(std::log(1.01) + z.c() * (std::sqrt(z.r()) + 1) / 10));
}

TEST_CASE("lower chain") {
  ExperimentSpec s = spec({{0.5, 1}}, SemicontinuityMode::lower, 0.5);
  s.c = std::sqrt(0.5);
  s.ms = {0.1};
  s.Ms = {10};
  s.n_max = 5;
  CHECK(min_slack(SemicontinuityExperiment(s)) >= 0);

  CHECK(min_slack(SemicontinuityExperiment(spec({{0.5, 1}}, SemicontinuityMode::lower, 0.5, additive(1, 2)))) >= -1e-9);

  ExperimentSpec unit = spec({{1, 1}}, SemicontinuityMode::lower, 0.5);
  unit.n_max = 2;
  for (const auto& r : run_experiment(SemicontinuityExperiment(unit))) {
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs <= 0.0);
  }
  CHECK(log1m_grid_check() >= 0.0);
}

TEST_CASE("lower chain on a finite algebra") {
  ExperimentSpec s = spec({{0.5, 1}}, SemicontinuityMode::lower_finite, 0.5, {}, 1.0);
  s.ms = {0.1};
  s.Ms = {10};
  s.n_max = 3;
  CHECK(min_slack(SemicontinuityExperiment(s)) >= 0);

  const SemicontinuityExperiment zero(spec({{0, 1}}, SemicontinuityMode::lower_finite, 0.5, additive(1, 1), 1.0));
  CHECK(zero.h(10).atoms[0].value == Approx(0.1));
  CHECK(min_slack(zero) >= -1e-9);

  ExperimentSpec unit = spec({{1, 1}}, SemicontinuityMode::lower_finite, 0.5, {}, 1.0);
  unit.n_max = 2;
  for (const auto& r : run_experiment(SemicontinuityExperiment(unit))) {
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == Approx(-r.m + std::log1p(r.m) - 2 * std::log(2.0) / (r.M + 1)));
    CHECK(r.rhs < 0);
  }
  CHECK_THROWS_AS(SemicontinuityExperiment(spec({{0.5, 1}}, SemicontinuityMode::lower_finite, 0.5)), LabError);
}

TEST_CASE("experiment preconditions") {
  ExperimentSpec bad = spec({{100, 1}}, SemicontinuityMode::upper, 0.5);
  bad.c = 0.1;
  try {
    SemicontinuityExperiment x(bad);
    FAIL("moment violation not detected");
  } catch (const LabError& e) {
    CHECK(e.code() == ErrorCode::moment_violation);
  }
  CHECK_THROWS_AS(SemicontinuityExperiment(spec({{1, 1}}, SemicontinuityMode::upper, 1.0)), LabError);
  ExperimentSpec small_M = spec({{1, 1}}, SemicontinuityMode::lower, 0.5);
  small_M.Ms = {0.5};
  small_M.ms = {0.1};
  CHECK_THROWS_AS(SemicontinuityExperiment{small_M}, LabError);
}

TEST_CASE("rows are ordered and converge") {
  const SemicontinuityExperiment x(spec({{0.3, 2}, {2, 1}}, SemicontinuityMode::upper, 0.4, additive(1, 1)));
  const auto rows = run_experiment(x);
  CHECK(rows.size() == 3 * 3 * 1000);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    CHECK(std::tie(a.m, a.M, a.n) < std::tie(b.m, b.M, b.n));
  }
  CHECK(x.convergence_index() == 10'000'000);
  const LimitTrend t = limit_trend(x);
  CHECK(t.delta_decreasing);
  for (const auto& r : t.rows) CHECK(r.observed <= r.bound);
}
