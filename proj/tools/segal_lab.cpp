// segal-lab: command-line front end for the spectral and matrix models.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "segal/constructions.hpp"
#include "segal/io.hpp"
#include "segal/parallel.hpp"

using namespace segal;

namespace {

enum Exit { kOk = 0, kInputError = 1, kContractViolation = 2 };

std::string num(double x) { return format_number(x, 12); }

struct Global {
  std::string format = "csv";
  double quad_tol = 1e-10;
  std::size_t quad_max = std::size_t{1} << 16;
  bool kv() const { return format == "kv"; }
};

// A flat record printed as one CSV row under a header or as key=value lines.
class Record {
 public:
  Record& add(const std::string& k, const std::string& v) {
    fields_.emplace_back(k, v);
    return *this;
  }
  Record& add(const std::string& k, double v) { return add(k, num(v)); }
  void print(std::ostream& out, bool kv, bool header = true) const {
    if (kv) {
      for (const auto& [k, v] : fields_) out << k << '=' << v << '\n';
      return;
    }
    if (header) print_header(out);
    for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? "," : "") << fields_[i].second;
    out << '\n';
  }
  void print_header(std::ostream& out) const {
    for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? "," : "") << fields_[i].first;
    out << '\n';
  }
  std::string as_comment() const {
    std::string s;
    for (const auto& [k, v] : fields_) s += k + "=" + v + "\n";
    return s;
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

void print_rows(std::ostream& out, const std::vector<Record>& rows, bool kv) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (kv) {
      if (i) out << '\n';
      rows[i].print(out, true);
    } else {
      rows[i].print(out, false, i == 0);
    }
  }
}

// "# key=value" summary lines in CSV mode, a trailing block in kv mode.
void print_summary(std::ostream& out, const Record& r, bool kv) {
  if (kv) {
    out << '\n';
    r.print(out, true);
    return;
  }
  std::istringstream in(r.as_comment());
  for (std::string line; std::getline(in, line);) out << "# " << line << '\n';
}

std::string ext(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot == std::string::npos ? "" : path.substr(dot + 1);
}

// ---- entropy ----

int cmd_entropy(const Global& g, const std::string& path, std::int64_t cutoff) {
  SeriesSettings settings;
  settings.cutoff = cutoff;
  const SpectralDensity d = read_density(path);
  require_valid(d, settings);
  const EntropyReport r = entropy(d, settings);
  Record rec;
  rec.add("verdict", to_string(r.value.verdict()))
      .add("value", r.value.value())
      .add("positive_part", r.value.positive_part)
      .add("negative_part", r.value.negative_part)
      .add("trace", r.trace)
      .add("cutoff", std::to_string(r.partial_sum_cutoff));
  if (g.kv()) {
    rec.add("zero_mass", r.zero_mass);
    if (r.lower_bound_check) rec.add("lower_bound", *r.lower_bound_check);
  }
  rec.print(std::cout, g.kv());
  if (r.lower_bound_check && r.value.verdict() == Verdict::finite &&
      r.value.value() < *r.lower_bound_check - 1e-9) {
    std::cerr << "entropy below tau(h) - tau(1)\n";
    return kContractViolation;
  }
  return kOk;
}

// ---- regularize ----

int cmd_regularize(const Global& g, const std::string& path, double m, double M) {
  const SpectralDensity d = read_density(path);
  require_valid(d);
  RegularizationParams p(m, M);
  p.quadrature.abs_tol = g.quad_tol;
  p.quadrature.max_subdivisions = g.quad_max;
  const double closed = tau_f_mM(d, p);
  double oracle = kNaN;
  if (d.tail.empty()) oracle = tau_f_mM_quadrature_oracle(d, p);
  const double diff = closed - oracle;
  Record rec;
  rec.add("m", m).add("M", M).add("tau_f", closed).add("oracle", oracle).add("diff", diff).add(
      "lipschitz", lipschitz_modulus(p));
  rec.print(std::cout, g.kv());
  if (std::abs(diff) > 1e-8) {
    std::cerr << "closed form and quadrature differ by " << num(diff) << '\n';
    return kContractViolation;
  }
  return kOk;
}

// ---- sweep ----

int cmd_sweep(const Global& g, const std::string& path, const std::vector<double>& Ms,
              const SweepSettings& w) {
  const SpectralDensity d = read_density(path);
  require_valid(d);
  const SweepResult r = lemma1_sweep(d, Ms, w);
  std::vector<Record> rows;
  for (const auto& row : r.rows) rows.push_back(Record().add("M", row.M).add("tau_f", row.tau_f).add("gap", row.gap));
  print_rows(std::cout, rows, g.kv());
  Record s;
  s.add("entropy", to_string(r.entropy.verdict())).add("H", r.entropy.value()).add("verdict", to_string(r.verdict));
  if (r.witness.available)
    s.add("witness_log_log_M", r.witness.log_log_M).add("witness_lower_bound", r.witness.lower_bound);
  // independent check of the closed form on atom-only inputs
  if (d.tail.empty()) {
    double worst = 0.0;
    for (const auto& row : r.rows) {
      RegularizationParams p(1.0 / row.M, row.M);
      p.quadrature.abs_tol = g.quad_tol;
      p.quadrature.max_subdivisions = g.quad_max;
      worst = std::max(worst, std::abs(row.tau_f - tau_f_mM_quadrature_oracle(d, p)));
    }
    s.add("oracle_max_diff", worst);
    print_summary(std::cout, s, g.kv());
    if (worst > 1e-8) return kContractViolation;
    return kOk;
  }
  print_summary(std::cout, s, g.kv());
  return kOk;
}

// ---- semicont ----

int cmd_semicont(const Global& g, const std::string& path, double tol, std::int64_t nmax) {
  ExperimentSpec spec = read_experiment(path);
  if (nmax > 0) spec.n_max = nmax;
  const SemicontinuityExperiment x(std::move(spec));
  const auto rows = run_experiment(x);
  std::vector<Record> out;
  double worst = kInf;
  std::size_t violations = 0;
  for (const auto& r : rows) {
    out.push_back(Record().add("m", r.m).add("M", r.M).add("n", std::to_string(r.n)).add("lhs", r.lhs).add("rhs", r.rhs).add("slack", r.slack));
    worst = std::min(worst, r.slack);
    if (r.slack < -tol) ++violations;
  }
  print_rows(std::cout, out, g.kv());
  Record s;
  s.add("name", x.spec().name.empty() ? "-" : x.spec().name)
      .add("mode", to_string(x.mode()))
      .add("epsilon", x.epsilon())
      .add("c", x.c())
      .add("r", x.r())
      .add("rows", std::to_string(rows.size()))
      .add("min_slack", worst)
      .add("violations", std::to_string(violations))
      .add("convergence_index", std::to_string(x.convergence_index()));
  const LimitTrend t = limit_trend(x);
  s.add("H0", t.H0);
  for (const auto& row : t.rows)
    s.add("trend_M=" + num(row.M), num(row.observed) + " bound=" + num(row.bound) + " delta=" + num(row.delta));
  s.add("delta_decreasing", t.delta_decreasing ? "yes" : "no");
  print_summary(std::cout, s, g.kv());
  return violations ? kContractViolation : kOk;
}

// ---- construct ----

struct ResolutionFlags {
  double beta = kNaN, gamma = kNaN;
  double coef = kNaN, pow = 0.0, logpow = 0.0, base = 1.0;
  std::int64_t n0 = 1;

  bool general() const { return !std::isnan(coef); }
  bool geometric() const { return !std::isnan(beta) || !std::isnan(gamma); }
  ResolutionOfIdentity make(const ResolutionOfIdentity& fallback) const {
    if (general() && geometric())
      throw LabError(ErrorCode::invalid_argument, "give either --beta/--gamma or --res-* flags");
    if (geometric()) {
      if (std::isnan(beta) || std::isnan(gamma))
        throw LabError(ErrorCode::invalid_argument, "--beta and --gamma go together");
      return ResolutionOfIdentity::geometric(beta, gamma);
    }
    if (!general()) return fallback;
    ResolutionOfIdentity r;
    r.log_weight = Plg::from_factors(coef, pow, logpow, base);
    r.n0 = n0;
    return r;
  }
};

void emit_density(const Global& g, const Record& summary, const SpectralDensity& d, const std::string& out) {
  if (out.empty()) {
    write_density(std::cout, d, summary.as_comment());
    return;
  }
  write_density(out, d, summary.as_comment());
  summary.print(std::cout, g.kv());
}

int cmd_thm12(const Global& g, const std::string& path, double eps, const std::string& out) {
  const SpectralDensity d = read_density(path);
  require_valid(d);
  const TruncationResult r = thm12_truncation(d, eps);
  const Verdict v = entropy(r.h_prime).value.verdict();
  Record s;
  s.add("m", r.m).add("M", r.M).add("trace_below", r.trace_below).add("trace_above", r.trace_above)
      .add("distance", r.distance).add("entropy", to_string(v));
  emit_density(g, s, r.h_prime, out);
  return r.distance < 2 * eps && v == Verdict::finite ? kOk : kContractViolation;
}

int cmd_thm14(const Global& g, const ResolutionFlags& f, bool normalize, const std::string& out) {
  const ResolutionOfIdentity r = f.make(ResolutionOfIdentity::geometric(1.0, 0.5));
  const SpectralDensity d = thm14_counterexample(r, normalize);
  const EntropyReport e = entropy(d);
  Record s;
  s.add("algebra_trace", d.total_algebra_trace).add("trace", e.trace).add("entropy", to_string(e.value.verdict()));
  emit_density(g, s, d, out);
  return std::isfinite(e.trace) && e.value.verdict() == Verdict::plus_infinity ? kOk : kContractViolation;
}

int cmd_thm15(const Global& g, const std::string& path, double eps, int which, double c1, double c2,
              const ResolutionFlags& f, const std::string& out) {
  const SpectralDensity d = read_density(path);
  require_valid(d);
  Thm15Case c;
  ResolutionOfIdentity fallback;
  Verdict expected = Verdict::minus_infinity;
  switch (which) {
    case 1:
      c.kind = Thm15Case::Kind::case1;
      fallback.log_weight = Plg::from_factors(1.0, 0.0, 0.0, 1.0);
      break;
    case 2:
      c.kind = Thm15Case::Kind::case2;
      fallback = ResolutionOfIdentity::geometric(1.0, 0.5);
      expected = Verdict::plus_infinity;
      break;
    case 3:
      c.kind = Thm15Case::Kind::case3;
      fallback.log_weight = Plg::from_factors(1.0, 0.0, 0.0, 2.0);
      break;
    default:
      throw LabError(ErrorCode::invalid_argument, "--case must be 1, 2 or 3");
  }
  const ResolutionOfIdentity r = f.make(fallback);
  c.c1 = std::isnan(c1) ? (which == 1 ? r.weight(r.n0) : 0.0) : c1;
  c.c2 = std::isnan(c2) ? (which == 1 ? r.weight(r.n0) : 0.0) : c2;
  const Thm15Result res = thm15_approximant(d, eps, c, r);
  Record s;
  s.add("case", std::to_string(which))
      .add("m", res.truncation.m)
      .add("M", res.truncation.M)
      .add("n0", std::to_string(res.n0))
      .add("lambda_scale", res.lambda_scale)
      .add("h1_trace", res.h1_trace)
      .add("distance", res.distance_bound)
      .add("entropy_h1", to_string(res.entropy_h1.verdict()))
      .add("entropy_h2", res.entropy_h2)
      .add("entropy", to_string(res.entropy.verdict()));
  emit_density(g, s, res.h_prime, out);
  return res.distance_bound < 3 * eps && res.entropy.verdict() == expected ? kOk : kContractViolation;
}

int cmd_lemma13(const Global& g, const ResolutionFlags& f, double B, std::int64_t direct, const std::string& out) {
  const Lemma13Sequence seq(f.make(ResolutionOfIdentity::geometric(1.0, 0.5)));
  const DivergenceIndex idx = seq.divergence_index(B, direct);
  std::vector<Atom> atoms;
  const double rest = seq.total() - seq.selected_weight();
  if (rest > 1e-12 * seq.total()) atoms.push_back({1.0, rest});  // drop rounding residue
  const SpectralDensity d = make_density(std::move(atoms), custom_tail({seq.branch()}), seq.total());
  Record s;
  s.add("total_projection_trace", seq.total())
      .add("weighted_sum", seq.weighted_sum())
      .add("B", B)
      .add("N_exact", idx.exact ? "yes" : "no")
      .add("N", idx.exact ? std::to_string(idx.N) : "-")
      .add("log_N", idx.log_N)
      .add("partial_sum", idx.partial_sum)
      .add("entropy", to_string(entropy(d).value.verdict()));
  emit_density(g, s, d, out);
  return idx.partial_sum > B ? kOk : kContractViolation;
}

// ---- matrix-demo ----

struct DemoRow {
  double lhs = 0.0, rhs = 0.0, slack = 0.0;
};

struct DemoCheck {
  double tol;      // contract: slack >= -tol
  bool asserted;   // false: data only
  std::function<DemoRow(std::mt19937_64&, const WeightedMatrixAlgebra&)> run;
};

Element rank_one_projection(const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  Element g = random_general(A, rng);
  Element p;
  for (auto& b : g) {
    const Eigen::VectorXcd v = b.col(0).normalized();
    p.push_back(v * v.adjoint());
  }
  return p;
}

Element random_ordered_top(const Element& h1, const WeightedMatrixAlgebra& A, std::mt19937_64& rng) {
  const Element q = random_general(A, rng);
  return h1 + q * adjoint(q);
}

DemoRow residual_row(double r) { return {r, 0.0, -r}; }

std::map<std::string, DemoCheck> demo_checks() {
  std::map<std::string, DemoCheck> c;
  c["polarization"] = {0.0, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const Element y = random_general(A, rng);
    const double bound = 1e-10 * (1.0 + operator_norm(y) * operator_norm(h));
    const double r = polarization_identity_check(y, h, A);
    return DemoRow{r, bound, bound - r};
  }};
  c["log-monotonicity"] = {1e-8, true, [](auto& rng, const auto& A) {
    const Element h1 = identity(A) + rank_one_projection(A, rng);
    const Element h2 = random_ordered_top(h1, A, rng);
    const double l = log_monotonicity_check(h1, h2, A);
    return DemoRow{0.0, l, l};
  }};
  c["shifted-log"] = {1e-9, true, [](auto& rng, const auto& A) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    const double eps = u(rng);
    return residual_row(shifted_log_residual(random_psd(A, rng), eps, A));
  }};
  c["phi-trace"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const ContractionElement z = make_contraction(random_contraction(A, rng), A);
    const double a = tau(phi_map(h, z, A), A).real();
    const double b = tau(h, A).real();
    return DemoRow{a, b, -std::abs(a - b)};
  }};
  c["phi-entropy"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const ContractionElement z = make_contraction(random_normal_contraction(A, rng), A);
    const PhiEntropy e = entropy_monotone_under_phi(h, z, A);
    return DemoRow{e.H_phi_h, e.H_h, e.H_h - e.H_phi_h};
  }};
  // general contractions: recorded, no direction asserted
  c["phi-entropy-general"] = {kInf, false, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const ContractionElement z = make_contraction(random_contraction(A, rng), A);
    const double a = entropy_matrix(phi_map(h, z, A), A);
    const double b = entropy_matrix(h, A);
    return DemoRow{a, b, b - a};
  }};
  c["domination"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const Element z = random_general(A, rng);
    DemoRow worst{0.0, 0.0, kInf};
    for (const auto& r : eigenvalue_domination_check(h, z, A))
      if (r.bound - r.theta < worst.slack) worst = {r.theta, r.bound, r.bound - r.theta};
    return worst;
  }};
  c["weyl"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h1 = random_psd(A, rng);
    const Element h2 = random_ordered_top(h1, A, rng);
    DemoRow worst{0.0, 0.0, kInf};
    for (const auto& r : weyl_domination_check(h1, h2, A))
      if (r.bound - r.theta < worst.slack) worst = {r.theta, r.bound, r.bound - r.theta};
    return worst;
  }};
  c["trace-chain"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h1 = random_psd(A, rng);
    const Element h2 = random_ordered_top(h1, A, rng);
    const TraceChain t = entropy_trace_monotonicity_check(h1, h2, A);
    return DemoRow{t.lhs, t.rhs, std::min(t.middle - t.lhs, t.rhs - t.middle)};
  }};
  c["consistency"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const double a = entropy_matrix(h, A);
    const double b = entropy(eig_spectral(h, A)).value.value();
    return DemoRow{a, b, -std::abs(a - b)};
  }};
  c["scaling"] = {1e-9, true, [](auto& rng, const auto& A) {
    std::uniform_real_distribution<double> u(0.1, 10.0);
    const double alpha = u(rng);
    const Element h = random_psd(A, rng);
    const double lhs = entropy_matrix(Complex(alpha) * h, A);
    const double rhs = alpha * std::log(alpha) * tau(h, A).real() + alpha * entropy_matrix(h, A);
    return DemoRow{lhs, rhs, -std::abs(lhs - rhs)};
  }};
  c["finite-bound"] = {1e-9, true, [](auto& rng, const auto& A) {
    const Element h = random_psd(A, rng);
    const double lhs = tau(h, A).real() - A.trace_identity();
    const double rhs = entropy_matrix(h, A);
    return DemoRow{lhs, rhs, rhs - lhs};
  }};
  return c;
}

int cmd_matrix_demo(const Global& g, const std::string& check, int dim, int blocks, std::int64_t seeds,
                    std::uint64_t seed0, const std::string& input) {
  if (check == "spectrum") {
    if (input.empty()) throw LabError(ErrorCode::invalid_argument, "spectrum needs --input");
    const MatrixInput m = read_matrix(input);
    m.algebra.check();
    const SpectralDensity d = eig_spectral(m.element, m.algebra);
    Record s;
    s.add("tau", tau(m.element, m.algebra).real()).add("entropy_matrix", entropy_matrix(m.element, m.algebra));
    write_density(std::cout, d, s.as_comment());
    return kOk;
  }
  if (check == "anchor") {
    WeightedMatrixAlgebra A{{{2, 1.0}}};
    Eigen::MatrixXcd h(2, 2), z(2, 2);
    h << 1.5, 0.5, 0.5, 1.5;
    z << 1.0, 0.0, 0.0, 0.0;
    const PhiEntropy e = entropy_monotone_under_phi({h}, make_contraction({z}, A), A);
    Record r;
    r.add("H_h", e.H_h).add("H_phi_h", e.H_phi_h).add("expected_H_h", 2 * std::log(2.0)).add(
        "expected_H_phi_h", 3 * std::log(1.5));
    r.print(std::cout, g.kv());
    return std::abs(e.H_h - 2 * std::log(2.0)) <= 1e-9 && std::abs(e.H_phi_h - 3 * std::log(1.5)) <= 1e-9
               ? kOk
               : kContractViolation;
  }
  const auto checks = demo_checks();
  const auto it = checks.find(check);
  if (it == checks.end()) {
    std::string names = "spectrum anchor";
    for (const auto& [k, v] : checks) names += " " + k;
    throw LabError(ErrorCode::invalid_argument, "unknown check '" + check + "'; known: " + names);
  }
  if (dim < 1 || blocks < 1 || seeds < 1)
    throw LabError(ErrorCode::invalid_argument, "--dim, --blocks and --seeds must be positive");
  const DemoCheck& c = it->second;
  std::vector<DemoRow> rows(static_cast<std::size_t>(seeds));
  parallel_for(rows.size(), [&](std::size_t i) {
    std::mt19937_64 rng(seed0 + i);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    WeightedMatrixAlgebra A;
    for (int b = 0; b < blocks; ++b) A.blocks.push_back({dim, weight(rng)});
    rows[i] = c.run(rng, A);
  });
  std::vector<Record> out;
  double worst = kInf;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(Record().add("seed", std::to_string(seed0 + i)).add("lhs", rows[i].lhs).add("rhs", rows[i].rhs).add("slack", rows[i].slack));
    worst = std::min(worst, rows[i].slack);
    if (c.asserted && rows[i].slack < -c.tol) ++violations;
  }
  print_rows(std::cout, out, g.kv());
  Record s;
  s.add("check", check).add("seeds", std::to_string(seeds)).add("asserted", c.asserted ? "yes" : "no")
      .add("tolerance", c.tol).add("min_slack", worst).add("violations", std::to_string(violations));
  print_summary(std::cout, s, g.kv());
  return violations ? kContractViolation : kOk;
}

// ---- validate ----

int cmd_validate(const Global& g, const std::string& path) {
  Record r;
  r.add("file", path);
  const std::string e = ext(path);
  try {
    if (e == "mat") {
      const MatrixInput m = read_matrix(path);
      m.algebra.check();
      r.add("kind", "matrix").add("blocks", std::to_string(m.algebra.blocks.size()))
          .add("hermitian", is_hermitian(m.element) ? "yes" : "no");
    } else if (e == "exp") {
      const SemicontinuityExperiment x(read_experiment(path));
      r.add("kind", "experiment").add("mode", to_string(x.mode())).add("c", x.c());
    } else {
      const SpectralDensity d = read_density(path);
      require_valid(d);
      r.add("kind", "density").add("atoms", std::to_string(d.atoms.size()))
          .add("tail", to_string(d.tail.kind)).add("trace", trace(d));
    }
  } catch (const LabError& err) {
    r.add("status", "invalid").add("code", to_string(err.code()));
    r.print(std::cout, g.kv());
    std::cerr << err.what() << '\n';
    return kInputError;
  }
  r.add("status", "valid");
  r.print(std::cout, g.kv());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segal-lab: entropy of positive trace-class elements"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--format", g.format, "csv or kv")->check(CLI::IsMember({"csv", "kv"}));
  app.add_option("--quad-tol", g.quad_tol, "absolute quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--quad-max", g.quad_max, "maximum quadrature panels")->check(CLI::PositiveNumber);
  app.fallthrough();

  std::function<int()> action;
  std::string path, out;

  auto* ent = app.add_subcommand("entropy", "entropy report of a spectral density");
  std::int64_t cutoff = SeriesSettings{}.cutoff;
  ent->add_option("file", path)->required();
  ent->add_option("--cutoff", cutoff, "tail terms summed before the remainder estimate")->check(CLI::PositiveNumber);
  ent->callback([&] { action = [&] { return cmd_entropy(g, path, cutoff); }; });

  double m = 1e-2, M = 1e2;
  auto* reg = app.add_subcommand("regularize", "tau(f_{m,M}(h)) with a quadrature cross-check");
  reg->add_option("file", path)->required();
  reg->add_option("--m", m, "lower cut")->check(CLI::PositiveNumber);
  reg->add_option("--M", M, "upper cut")->check(CLI::PositiveNumber);
  reg->callback([&] { action = [&] { return cmd_regularize(g, path, m, M); }; });

  std::vector<double> Ms{10.0, 100.0, 1000.0, 10000.0};
  SweepSettings sweep_settings;
  bool no_extend = false;
  auto* sw = app.add_subcommand("sweep", "tau(f_{1/M,M}(h)) over a grid of M");
  sw->add_option("file", path)->required();
  sw->add_option("--Ms", Ms, "ascending grid of M > 1")->delimiter(',');
  sw->add_option("--converge-threshold", sweep_settings.converge_threshold);
  sw->add_option("--diverge-threshold", sweep_settings.diverge_threshold);
  sw->add_flag("--no-extend", no_extend, "do not search a divergence witness past the grid");
  sw->callback([&] {
    sweep_settings.extend = !no_extend;
    action = [&] { return cmd_sweep(g, path, Ms, sweep_settings); };
  });

  double tol = 1e-9;
  auto* sc = app.add_subcommand("semicont", "per-n bound chains of a semicontinuity experiment");
  sc->add_option("file", path)->required();
  std::int64_t nmax = 0;
  sc->add_option("--tol", tol, "slack tolerance")->check(CLI::NonNegativeNumber);
  sc->add_option("--nmax", nmax, "override the experiment's n range")->check(CLI::PositiveNumber);
  sc->callback([&] { action = [&] { return cmd_semicont(g, path, tol, nmax); }; });

  auto* con = app.add_subcommand("construct", "explicit constructions");
  con->require_subcommand(1);
  double eps = 0.01, B = 1000.0, c1 = kNaN, c2 = kNaN;
  int which = 1;
  bool normalize = false;
  std::int64_t direct = 1'000'000;
  ResolutionFlags res;
  auto add_resolution = [&res](CLI::App* a) {
    a->add_option("--beta", res.beta, "geometric resolution beta gamma^n");
    a->add_option("--gamma", res.gamma);
    a->add_option("--res-coef", res.coef, "resolution coef n^pow (ln n)^logpow base^n");
    a->add_option("--res-pow", res.pow);
    a->add_option("--res-logpow", res.logpow);
    a->add_option("--res-base", res.base);
    a->add_option("--res-n0", res.n0)->check(CLI::PositiveNumber);
  };
  auto* t12 = con->add_subcommand("thm12", "finite-entropy truncation");
  t12->add_option("file", path)->required();
  t12->add_option("--eps", eps)->check(CLI::PositiveNumber);
  t12->add_option("-o,--output", out);
  t12->callback([&] { action = [&] { return cmd_thm12(g, path, eps, out); }; });
  auto* t14 = con->add_subcommand("thm14", "finite trace, infinite entropy");
  add_resolution(t14);
  t14->add_flag("--normalize", normalize, "scale to tau(h) = 1");
  t14->add_option("-o,--output", out);
  t14->callback([&] { action = [&] { return cmd_thm14(g, res, normalize, out); }; });
  auto* t15 = con->add_subcommand("thm15", "approximant with prescribed infinite entropy");
  t15->add_option("file", path)->required();
  t15->add_option("--eps", eps)->check(CLI::PositiveNumber);
  t15->add_option("--case", which)->check(CLI::Range(1, 3));
  t15->add_option("--c1", c1);
  t15->add_option("--c2", c2);
  add_resolution(t15);
  t15->add_option("-o,--output", out);
  t15->callback([&] { action = [&] { return cmd_thm15(g, path, eps, which, c1, c2, res, out); }; });
  auto* l13 = con->add_subcommand("lemma13", "divergent selection from a resolution of identity");
  add_resolution(l13);
  l13->add_option("--B", B)->check(CLI::PositiveNumber);
  l13->add_option("--direct", direct, "terms summed before the certified estimate")->check(CLI::PositiveNumber);
  l13->add_option("-o,--output", out);
  l13->callback([&] { action = [&] { return cmd_lemma13(g, res, B, direct, out); }; });

  std::string check, input;
  int dim = 3, blocks = 2;
  std::int64_t seeds = 100;
  std::uint64_t seed0 = 1;
  auto* md = app.add_subcommand("matrix-demo", "randomized checks in weighted matrix algebras");
  md->add_option("check", check)->required();
  md->add_option("--dim", dim, "block dimension");
  md->add_option("--blocks", blocks, "number of blocks");
  md->add_option("--seeds", seeds);
  md->add_option("--seed0,--seed", seed0, "first seed");
  md->add_option("--input", input, "matrix file (spectrum check)");
  md->callback([&] { action = [&] { return cmd_matrix_demo(g, check, dim, blocks, seeds, seed0, input); }; });

  auto* va = app.add_subcommand("validate", "parse and validate a .spd, .exp or .mat file");
  va->add_option("file", path)->required();
  va->callback([&] { action = [&] { return cmd_validate(g, path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  try {
    return action();
  } catch (const LabError& e) {
    std::cerr << "segal-lab: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "segal-lab: " << e.what() << '\n';
    return kInputError;
  }
}
