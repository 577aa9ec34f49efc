#include <doctest.h>

#include <sstream>

#include "segal/io.hpp"

using namespace segal;
using doctest::Approx;

namespace {
SpectralDensity parse(const std::string& text) {
  std::istringstream in(text);
  return parse_density(in);
}
ErrorCode parse_code(const std::string& text) {
  try {
    parse(text);
  } catch (const LabError& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::invalid_argument;
}
}  // namespace

TEST_CASE("density format") {
  const auto d = parse("# c\n!trace 4\n2\t0.5\n0.5\t1\n");
  CHECK(d.total_algebra_trace == 4.0);
  REQUIRE(d.atoms.size() == 2);
  CHECK(d.atoms[0].value == 0.5);  // sorted
  CHECK(parse("1\t1\n").total_algebra_trace == kInf);
  const auto dup = parse("1\t1\n1\t2\n");
  CHECK(validate(dup).code == ErrorCode::duplicate_values);

  CHECK(parse_code("!trace 1\n!trace 2\n") == ErrorCode::parse_error);
  CHECK(parse_code("!bogus\n") == ErrorCode::parse_error);
  CHECK(parse_code("1 1\n") == ErrorCode::parse_error);
  CHECK(parse_code("1\t1\t1\n") == ErrorCode::parse_error);
  CHECK(parse_code("1\tx\n") == ErrorCode::parse_error);
  CHECK(parse_code("inf\t1\n") == ErrorCode::parse_error);
  CHECK(parse_code("!tail geometric_over_square beta=1 gamma=0.5\n") == ErrorCode::parse_error);
  CHECK(parse_code("!tail geometric_over_square beta=1 gamma=2 declared_trace=1 declared_entropy=finite\n") ==
        ErrorCode::parse_error);
  CHECK(parse_code("!tail geometric_over_square beta=1 gamma=0.5 colour=red declared_trace=1 declared_entropy=finite\n") ==
        ErrorCode::parse_error);
  CHECK(parse_code("!tail nonsense declared_trace=1 declared_entropy=finite\n") == ErrorCode::parse_error);
}

TEST_CASE("density round trip keeps tails and declarations") {
  PairRule p;
  p.log_value = Plg::from_factors(2, -3, 1, 1);
  p.log_weight = Plg::from_factors(0.5, 0, 0, 0.9);
  SelectionRule s{Plg::from_factors(1, 0, 0, 0.5), true, 0.25, 3};
  const std::vector<SpectralDensity> ds = {
      make_density({{0.1, 2}, {3, 0.25}}, geometric_over_square(1, 0.5, 0.3, 2), 40.0),
      make_density({{1, 1}}, inverse_log_square(0.7, 5)),
      make_density({}, custom_tail({TailBranch{p, 2}, TailBranch{s, 1}}))};
  for (const auto& d : ds) {
    std::ostringstream out;
    write_density(out, d, "header line\nsecond");
    std::istringstream in(out.str());
    const auto back = parse_density(in);
    CHECK(validate(back).ok);
    CHECK(back.atoms.size() == d.atoms.size());
    CHECK(back.tail.params == d.tail.params);
    CHECK(back.tail.declared_trace == d.tail.declared_trace);
    CHECK(back.tail.declared_class == d.tail.declared_class);
    CHECK(trace(back) == trace(d));
    CHECK(back.total_algebra_trace == d.total_algebra_trace);
  }
}

TEST_CASE("experiment format") {
  std::istringstream in(
      "# e\n!experiment name=x mode=lower_finite epsilon=0.25 c=auto sequence=multiplicative a=2 p=0.5 "
      "nmax=7 m=0.1,0.2 M=10\n!trace 3\n1\t1\n");
  const ExperimentSpec x = parse_experiment(in);
  CHECK(x.name == "x");
  CHECK(x.mode == SemicontinuityMode::lower_finite);
  CHECK(x.epsilon == 0.25);
  CHECK(!x.c);
  CHECK(x.sequence.kind == SequenceRule::Kind::multiplicative);
  CHECK(x.n_max == 7);
  CHECK(x.ms == std::vector<double>{0.1, 0.2});
  CHECK(x.Ms == std::vector<double>{10});
  CHECK(x.h0.total_algebra_trace == 3.0);

  for (const char* bad : {"1\t1\n", "!experiment mode=upper epsilon=0.5\n", "!experiment mode=up epsilon=0.5 sequence=constant\n",
                          "!experiment mode=upper epsilon=0.5 sequence=constant nmax=1.5\n",
                          "!experiment mode=upper epsilon=0.5 sequence=constant speed=3\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_experiment(b), LabError);
  }
}

TEST_CASE("matrix format") {
  std::istringstream in(
      "# m\n!algebra dim=2 weight=0.5\n1 2-3i\n2+3i -1e-3\n!algebra dim=1 weight=2\n4i\n");
  const MatrixInput m = parse_matrix(in);
  REQUIRE(m.algebra.blocks.size() == 2);
  CHECK(m.algebra.blocks[0].weight == 0.5);
  CHECK(m.element[0](0, 1) == Complex(2, -3));
  CHECK(m.element[0](1, 0) == Complex(2, 3));
  CHECK(m.element[0](1, 1) == Complex(-1e-3, 0));
  CHECK(m.element[1](0, 0) == Complex(0, 4));

  std::ostringstream out;
  write_matrix(out, m.algebra, m.element);
  std::istringstream again(out.str());
  const MatrixInput back = parse_matrix(again);
  CHECK(max_abs(back.element - m.element) == 0.0);

  for (const char* bad : {"1 2\n", "!algebra dim=2 weight=1\n1 2 3\n", "!algebra dim=0 weight=1\n",
                          "!algebra dim=1\n1\n", "!algebra dim=1 weight=1\n1+i\n", "!matrix\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_matrix(b), LabError);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3) == "0.333333333333");
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(kNaN) == "nan");
  CHECK(format_number(-0.0) == "0");
}
