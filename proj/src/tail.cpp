#include "segal/tail.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>

#include "segal/error.hpp"

namespace segal {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kMaxExactIndex = 9007199254740992.0;  // 2^53
constexpr double kMaxGallop = 4.0e18;

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double add_offset(double lt, double c) {
  if (c == 0.0) return lt;
  const double lc = std::log(c);
  if (lt > lc) return lt + std::log1p(c * std::exp(-lt));
  return lc + std::log1p(std::exp(lt - lc));
}

double functional_power(const Functional& f) {
  switch (f.kind) {
    case Functional::Kind::mass:
      return 0.0;
    case Functional::Kind::moment:
      return f.p;
    default:
      return 1.0;
  }
}

double functional_factor(const Functional& f, double lv) {
  switch (f.kind) {
    case Functional::Kind::entropy:
      return lv;
    case Functional::Kind::regularized:
      return regularization_log_ratio(lv, f.m, f.M);
    default:
      return 1.0;
  }
}

// A + B lx + C ln lx + D e^lx at n = e^lx, usable past the double range of n.
double plg_at_log(const Plg& e, double lx) {
  double v = e.log_coef;
  if (e.power != 0.0) v += e.power * lx;
  if (e.log_power != 0.0) v += e.log_power * std::log(lx);
  if (e.rate != 0.0) v += e.rate * std::exp(lx);
  return v;
}

// exp(extra) times the point value of a pair rule at n = e^lx, written so that
// geometric factors of t and w cancel symbolically rather than in floating point.
double pair_term_log(const PairRule& r, const Functional& f, double lx, double extra) {
  if (std::isnan(lx) || lx == kInf) return 0.0;
  const double lt = plg_at_log(r.log_value, lx);
  const double c = r.offset;
  if (c == 0.0 || lt > std::log(c)) {
    const double k = functional_power(f);
    const double corr = c == 0.0 ? 0.0 : std::log1p(c * std::exp(-lt));
    const double e = plg_at_log(r.log_weight + r.log_value * k, lx) + k * corr + extra;
    const double scale = std::exp(e);
    if (scale == 0.0 || std::isnan(e)) return 0.0;
    return scale * functional_factor(f, lt + corr);
  }
  return f.eval(add_offset(lt, c), plg_at_log(r.log_weight, lx) + extra);
}

double pair_term(const PairRule& r, const Functional& f, double x) {
  if (!std::isfinite(x)) return 0.0;
  return pair_term_log(r, f, std::log(x), 0.0);
}

struct Asymptotic {
  bool zero = false;
  Plg exponent;
  int sign = 1;
};

Asymptotic pair_asymptotic(const PairRule& r, const Functional& f) {
  Asymptotic a;
  const int tr = r.log_value.trend();
  const double c = r.offset;
  const bool vanishes_at_one =
      f.kind == Functional::Kind::entropy || f.kind == Functional::Kind::regularized;
  if (tr == 0) {
    const double phi = f.eval(add_offset(r.log_value.log_coef, c), 0.0);
    if (phi == 0.0) {
      a.zero = true;
      return a;
    }
    a.exponent = r.log_weight;
    a.sign = sign_of(phi);
    return a;
  }
  if (tr < 0 && c > 0.0) {
    // values decrease to c from above
    if (c == 1.0 && vanishes_at_one) {
      a.exponent = r.log_weight + r.log_value;
      a.sign = 1;
      return a;
    }
    a.exponent = r.log_weight;
    a.sign = sign_of(f.eval(std::log(c), 0.0));
    return a;
  }
  a.exponent = r.log_weight + r.log_value * functional_power(f);
  if (f.kind == Functional::Kind::entropy) {
    a.sign = tr;
    // |log t| grows like n, ln n or ln ln n; the last never changes a verdict
    if (r.log_value.rate != 0.0)
      a.exponent.power += 1.0;
    else if (r.log_value.power != 0.0)
      a.exponent.log_power += 1.0;
  } else if (f.kind == Functional::Kind::regularized) {
    a.sign = tr;
  }
  return a;
}

// Direct summation up to K followed by an Euler-Maclaurin remainder
// int_K^inf g + g(K)/2 - g'(K)/12, with K doubled until the estimate settles.
SeriesValue euler_maclaurin_sum(const PairRule& r, const Functional& f, std::int64_t from,
                                const SeriesSettings& s) {
  auto g = [&r, &f](double x) { return pair_term(r, f, x); };
  const double base = std::max({static_cast<double>(from), r.log_value.monotone_from(),
                                r.log_weight.monotone_from(), 3.0});
  NeumaierSum direct;
  std::int64_t n = from;
  auto run_to = [&](std::int64_t k) {
    for (; n < k; ++n) direct.add(g(static_cast<double>(n)));
  };
  auto remainder = [&g, &r, &f](double k) {
    const double lk = std::log(k);
    auto integrand = [&r, &f, lk](double u) {
      if (u >= 1.0) return 0.0;
      const double y = u / (1.0 - u);
      // g(x) dx with x = k e^y, in log space so that slowly decaying tails
      // are not cut off where x overflows
      const double v = pair_term_log(r, f, lk + y, lk + y) / ((1.0 - u) * (1.0 - u));
      return std::isfinite(v) ? v : 0.0;
    };
    QuadratureSettings q;
    q.abs_tol = 1e-300;
    q.rel_tol = 1e-13;
    q.max_subdivisions = 4096;
    const double integral = integrate(integrand, 0.0, 1.0, q).value;
    const double h = 1e-3 * k;
    const double slope = (g(k + h) - g(k - h)) / (2.0 * h);
    return integral + g(k) / 2.0 - slope / 12.0;
  };
  double previous = kNaN;
  for (int j = 0;; ++j) {
    const double kd = std::floor(base) + 32.0 * std::ldexp(1.0, j);
    const auto k = static_cast<std::int64_t>(kd);
    run_to(k);
    const double estimate = direct.value() + remainder(kd);
    const bool agree =
        std::abs(estimate - previous) <= 1e-13 * std::max(1.0, std::abs(estimate));
    if (agree) return {estimate, k - from, true};
    if (k - from >= s.cutoff) return {estimate, k - from, false};
    previous = estimate;
  }
}

double find_selection_index(const SelectionRule& r, std::int64_t n, double k_prev) {
  const double target = static_cast<double>(n) * kLn2;
  auto ok = [&](double k) {
    const double l = r.log_resolution(k);
    return r.below ? l <= -target : l >= target;
  };
  double k = k_prev + 1.0;
  const double km = r.log_resolution.monotone_from();
  while (k < km) {
    if (ok(k)) return k;
    k += 1.0;
  }
  if (ok(k)) return k;
  double lo = k;
  double step = 1.0;
  double hi;
  for (;;) {
    const double probe = k + step;
    if (probe > kMaxExactIndex)
      throw LabError(ErrorCode::unsupported, "selection index exceeds 2^53");
    if (ok(probe)) {
      hi = probe;
      break;
    }
    lo = probe;
    step *= 2.0;
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

SeriesValue selection_sum(const TailBranch& b, const SelectionRule& r, const Functional& f,
                          std::int64_t from) {
  const double s = r.scale;
  const double a = static_cast<double>(std::max(from, b.n0));
  using K = Functional::Kind;
  if (f.kind == K::trace || (f.kind == K::moment && f.p == 1.0))
    return {s * inverse_square_tail(a), 0, true};
  if (f.kind == K::entropy) return {r.below ? kInf : -kInf, 0, true};

  // Remaining cases: direct summation plus an explicit geometric remainder bound.
  double closed = 0.0;
  double rem_coef = 0.0;
  double ratio = 0.5;
  std::function<double(double, double)> term;
  switch (f.kind) {
    case K::mass:
      if (!r.below) return {kInf, 0, true};
      rem_coef = 2.0;  // sum_{n>=N} 2^-n = 2 * 2^-N
      term = [](double, double lw) { return std::exp(lw); };
      break;
    case K::moment: {
      const double p = f.p;
      if ((r.below && p > 1.0) || (!r.below && p < 1.0)) return {kInf, 0, true};
      ratio = std::exp2(-std::abs(1.0 - p));
      rem_coef = std::pow(s, p) / (1.0 - ratio);
      term = [p](double lv, double lw) { return std::exp(lw + p * lv); };
      break;
    }
    case K::regularized: {
      const double m = f.m;
      const double M = f.M;
      const double lm = std::log(m);
      const double lM = std::log(M);
      if (r.below) {
        closed = s * (std::log1p(M) - std::log1p(m)) * inverse_square_tail(a);
        rem_coef = 2.0 * M;
        term = [lm, lM](double lv, double lw) {
          return std::exp(lv + lw) * (log_add_exp(lm, lv) - log_add_exp(lM, lv));
        };
      } else {
        closed = s * (std::log1p(M) - std::log1p(m) + lm - lM) * inverse_square_tail(a);
        rem_coef = 2.0 * s * s / m;
        term = [lm, lM](double lv, double lw) {
          return std::exp(lv + lw) * (std::log1p(std::exp(lv - lm)) - std::log1p(std::exp(lv - lM)));
        };
      }
      break;
    }
    default:
      break;
  }
  BranchWalker w(b);
  w.advance_to(static_cast<std::int64_t>(a));
  NeumaierSum sum;
  sum.add(closed);
  std::int64_t terms = 0;
  for (;;) {
    sum.add(term(w.log_value(), w.log_weight()));
    ++terms;
    const double next = static_cast<double>(w.n() + 1);
    const double bound = rem_coef * std::pow(ratio, next);
    if (bound <= 1e-15 * std::max(1.0, std::abs(sum.value()))) return {sum.value(), terms, true};
    if (terms > 20000) return {sum.value(), terms, false};
    w.next();
  }
}

Side compare(double lv, double lx) {
  if (lv > lx) return Side::above;
  if (lv < lx) return Side::below;
  return Side::equal;
}

std::int64_t gallop_first(std::int64_t start, const std::function<bool(std::int64_t)>& pred) {
  if (pred(start)) return start;
  std::int64_t lo = start;
  double step = 1.0;
  std::int64_t hi;
  for (;;) {
    const double probe = static_cast<double>(start) + step;
    if (probe > kMaxGallop) throw LabError(ErrorCode::unsupported, "threshold crossing out of range");
    const auto p = static_cast<std::int64_t>(probe);
    if (pred(p)) {
      hi = p;
      break;
    }
    lo = p;
    step *= 2.0;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

void check_head(const TailBranch& b, std::int64_t n, const SeriesSettings& s) {
  if (n - b.n0 > s.max_head)
    throw LabError(ErrorCode::unsupported, "tail head longer than max_head terms");
}

// ---- parameter parsing ----

class ParamReader {
 public:
  ParamReader(const ParamList& p, std::string prefix, bool allow_bare)
      : p_(p), prefix_(std::move(prefix)), allow_bare_(allow_bare) {}

  const std::string* find(const std::string& key) {
    for (const auto& kv : p_) {
      if (kv.first == prefix_ + key || (allow_bare_ && kv.first == key)) {
        used_.insert(kv.first);
        return &kv.second;
      }
    }
    return nullptr;
  }

  double number(const std::string& key, double fallback, bool required = false) {
    const std::string* v = find(key);
    if (!v) {
      if (required) throw LabError(ErrorCode::invalid_argument, "missing tail parameter " + key);
      return fallback;
    }
    char* end = nullptr;
    const double x = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
      throw LabError(ErrorCode::invalid_argument, "bad number for " + key + ": " + *v);
    return x;
  }

  std::int64_t index(const std::string& key, std::int64_t fallback) {
    const double x = number(key, static_cast<double>(fallback));
    if (x != std::floor(x) || x < 1.0 || x > kMaxExactIndex)
      throw LabError(ErrorCode::invalid_argument, key + " must be a positive integer");
    return static_cast<std::int64_t>(x);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }

  Plg factors(const std::string& stem) {
    return Plg::from_factors(number(stem + ".coef", 1.0), number(stem + ".pow", 0.0),
                             number(stem + ".logpow", 0.0), number(stem + ".base", 1.0));
  }

  const std::set<std::string>& used() const { return used_; }

 private:
  const ParamList& p_;
  std::string prefix_;
  bool allow_bare_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw LabError(ErrorCode::invalid_argument, what);
}

void check_branch(const TailBranch& b) {
  if (const auto* p = std::get_if<PairRule>(&b.rule)) {
    require(p->offset >= 0.0 && std::isfinite(p->offset), "tail offset must be finite and >= 0");
    if (p->log_value.log_power != 0.0 || p->log_weight.log_power != 0.0)
      require(b.n0 >= 2, "log factors need n0 >= 2");
  } else {
    const auto& s = std::get<SelectionRule>(b.rule);
    require(s.scale > 0.0 && std::isfinite(s.scale), "selection scale must be positive");
    require(s.log_resolution.trend() == (s.below ? -1 : 1),
            s.below ? "selection below 2^-n needs a resolution tending to 0"
                    : "selection above 2^n needs a resolution tending to infinity");
    require(s.k0 >= 1.0 && s.k0 == std::floor(s.k0), "k0 must be a positive integer");
    if (s.log_resolution.log_power != 0.0) require(s.k0 >= 2.0, "log factors need k0 >= 2");
  }
}

void set_param(ParamList& p, const std::string& key, double value) {
  for (auto& kv : p) {
    if (kv.first == key) {
      kv.second = fmt17(value);
      return;
    }
  }
  p.emplace_back(key, fmt17(value));
}

double get_param(const ParamList& p, const std::string& key, double fallback) {
  for (const auto& kv : p)
    if (kv.first == key) return std::strtod(kv.second.c_str(), nullptr);
  return fallback;
}

void write_factors(ParamList& out, const std::string& stem, const Plg& e) {
  out.emplace_back(stem + ".coef", fmt17(std::exp(e.log_coef)));
  if (e.power != 0.0) out.emplace_back(stem + ".pow", fmt17(e.power));
  if (e.log_power != 0.0) out.emplace_back(stem + ".logpow", fmt17(e.log_power));
  if (e.rate != 0.0) out.emplace_back(stem + ".base", fmt17(std::exp(e.rate)));
}

}  // namespace

// ---- Plg ----

Plg Plg::from_factors(double coef, double power, double log_power, double base) {
  require(coef > 0.0 && std::isfinite(coef), "coefficient must be positive");
  require(base > 0.0 && std::isfinite(base), "geometric base must be positive");
  require(std::isfinite(power) && std::isfinite(log_power), "exponents must be finite");
  return {std::log(coef), power, log_power, std::log(base)};
}

double Plg::operator()(double n) const {
  double e = log_coef;
  if (power != 0.0) e += power * std::log(n);
  if (log_power != 0.0) e += log_power * std::log(std::log(n));
  if (rate != 0.0) e += rate * n;
  return e;
}

double Plg::derivative(double n) const {
  double d = rate + power / n;
  if (log_power != 0.0) d += log_power / (n * std::log(n));
  return d;
}

int Plg::trend() const {
  if (rate != 0.0) return sign_of(rate);
  if (power != 0.0) return sign_of(power);
  return sign_of(log_power);
}

double Plg::monotone_from() const {
  if (rate != 0.0)
    return std::max(3.0, std::floor((std::abs(power) + std::abs(log_power)) / std::abs(rate)) + 1.0);
  if (power != 0.0) {
    const double r = std::abs(log_power) / std::abs(power);
    if (r > 34.0) throw LabError(ErrorCode::unsupported, "monotone range beyond 1e15");
    return std::max(3.0, std::floor(std::exp(r)) + 1.0);
  }
  if (log_power != 0.0) return 2.0;
  return 1.0;
}

bool plg_series_converges(const Plg& e) {
  if (e.rate != 0.0) return e.rate < 0.0;
  if (e.power != -1.0) return e.power < -1.0;
  return e.log_power < -1.0;
}

// ---- names ----

const char* to_string(TailKind k) {
  switch (k) {
    case TailKind::none:
      return "none";
    case TailKind::geometric_over_square:
      return "geometric_over_square";
    case TailKind::inverse_log_square:
      return "inverse_log_square";
    case TailKind::custom_pair_sequence:
      return "custom_pair_sequence";
  }
  return "?";
}

bool parse_tail_kind(const std::string& text, TailKind& out) {
  for (auto k : {TailKind::none, TailKind::geometric_over_square, TailKind::inverse_log_square,
                 TailKind::custom_pair_sequence}) {
    if (text == to_string(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

// ---- functionals ----

double regularization_log_ratio(double l, double m, double M) {
  if (l == 0.0) return 0.0;
  const double base = std::log1p(M) - std::log1p(m);
  if (l >= 0.0) {
    const double e = std::exp(-l);
    return base + std::log1p(m * e) - std::log1p(M * e);
  }
  return base + log_add_exp(std::log(m), l) - log_add_exp(std::log(M), l);
}

double Functional::eval(double lv, double lw) const {
  if (lv == -kInf) return kind == Kind::mass ? std::exp(lw) : 0.0;
  switch (kind) {
    case Kind::mass:
      return std::exp(lw);
    case Kind::trace:
      return std::exp(lw + lv);
    case Kind::moment:
      return std::exp(lw + p * lv);
    case Kind::entropy:
      return std::exp(lw + lv) * lv;
    case Kind::regularized:
      return std::exp(lw + lv) * regularization_log_ratio(lv, m, M);
  }
  return kNaN;
}

// ---- walker ----

BranchWalker::BranchWalker(const TailBranch& branch) : branch_(branch), n_(branch.n0) {
  if (const auto* s = std::get_if<SelectionRule>(&branch_.rule)) k_ = s->k0 - 1.0;
  load();
}

void BranchWalker::load() {
  if (const auto* p = std::get_if<PairRule>(&branch_.rule)) {
    const double n = static_cast<double>(n_);
    log_value_ = add_offset(p->log_value(n), p->offset);
    log_weight_ = p->log_weight(n);
  } else {
    const auto& s = std::get<SelectionRule>(branch_.rule);
    k_ = find_selection_index(s, n_, k_);
    log_weight_ = s.log_resolution(k_);
    log_value_ = std::log(s.scale) - 2.0 * std::log(static_cast<double>(n_)) - log_weight_;
  }
}

void BranchWalker::next() {
  ++n_;
  load();
}

void BranchWalker::advance_to(std::int64_t n) {
  if (n <= n_) return;
  if (std::holds_alternative<PairRule>(branch_.rule)) {
    n_ = n;
    load();
    return;
  }
  while (n_ < n) next();
}

// ---- settle / sums ----

Settle settle(const TailBranch& b, double x, const SeriesSettings&) {
  const double lx = std::log(x);
  if (const auto* r = std::get_if<PairRule>(&b.rule)) {
    const int tr = r->log_value.trend();
    const double c = r->offset;
    if (tr == 0) return {b.n0, compare(add_offset(r->log_value.log_coef, c), lx)};
    Side side = Side::above;
    if (tr < 0) side = (c > 0.0 && c >= x) ? Side::above : Side::below;
    const auto start = std::max<std::int64_t>(
        b.n0, static_cast<std::int64_t>(std::ceil(r->log_value.monotone_from())));
    auto pred = [&](std::int64_t n) {
      return compare(add_offset(r->log_value(static_cast<double>(n)), c), lx) == side;
    };
    return {gallop_first(start, pred), side};
  }
  const auto& s = std::get<SelectionRule>(b.rule);
  const double ls = std::log(s.scale);
  if (s.below) {
    // value >= scale 2^n / n^2, increasing from n = 3
    auto pred = [&](std::int64_t n) {
      const double nd = static_cast<double>(n);
      return ls + nd * kLn2 - 2.0 * std::log(nd) > lx;
    };
    return {gallop_first(std::max<std::int64_t>(b.n0, 3), pred), Side::above};
  }
  auto pred = [&](std::int64_t n) {
    const double nd = static_cast<double>(n);
    return ls - nd * kLn2 - 2.0 * std::log(nd) < lx;
  };
  return {gallop_first(b.n0, pred), Side::below};
}

SeriesValue branch_sum(const TailBranch& b, const Functional& f, std::int64_t from,
                       const SeriesSettings& s) {
  from = std::max(from, b.n0);
  if (const auto* r = std::get_if<PairRule>(&b.rule)) {
    const Asymptotic a = pair_asymptotic(*r, f);
    if (a.zero) return {0.0, 0, true};
    if (!plg_series_converges(a.exponent)) return {a.sign * kInf, 0, true};
    return euler_maclaurin_sum(*r, f, from, s);
  }
  return selection_sum(b, std::get<SelectionRule>(b.rule), f, from);
}

SeriesValue branch_region_sum(const TailBranch& b, const Functional& f, double lo, bool lo_closed,
                              double hi, bool hi_closed, const SeriesSettings& s) {
  const bool has_lo = lo > 0.0;
  const bool has_hi = std::isfinite(hi);
  std::int64_t n_end = b.n0;
  Side lo_side = Side::above;
  Side hi_side = Side::below;
  if (has_lo) {
    const Settle st = settle(b, lo, s);
    n_end = std::max(n_end, st.index);
    lo_side = st.side;
  }
  if (has_hi) {
    const Settle st = settle(b, hi, s);
    n_end = std::max(n_end, st.index);
    hi_side = st.side;
  }
  check_head(b, n_end, s);
  const double llo = has_lo ? std::log(lo) : -kInf;
  const double lhi = has_hi ? std::log(hi) : kInf;
  auto inside = [&](double lv) {
    const bool above_lo = !has_lo || lv > llo || (lo_closed && lv == llo);
    const bool below_hi = !has_hi || lv < lhi || (hi_closed && lv == lhi);
    return above_lo && below_hi;
  };
  NeumaierSum head;
  std::int64_t terms = 0;
  if (n_end > b.n0) {
    BranchWalker w(b);
    for (; w.n() < n_end; w.next()) {
      if (inside(w.log_value())) head.add(f.eval(w.log_value(), w.log_weight()));
      ++terms;
    }
  }
  const bool tail_inside =
      (!has_lo || lo_side == Side::above || (lo_side == Side::equal && lo_closed)) &&
      (!has_hi || hi_side == Side::below || (hi_side == Side::equal && hi_closed));
  if (!tail_inside) return {head.value(), terms, true};
  SeriesValue rest = branch_sum(b, f, n_end, s);
  rest.value = std::isinf(rest.value) ? rest.value : head.value() + rest.value;
  rest.terms += terms;
  return rest;
}

ExtendedEntropyValue branch_entropy(const TailBranch& b, const SeriesSettings& s,
                                    std::int64_t* terms) {
  ExtendedEntropyValue out;
  std::int64_t count = 0;
  auto place = [&out](double v) {
    if (v > 0.0)
      out.positive_part += v;
    else
      out.negative_part += v;
  };
  const auto* r = std::get_if<PairRule>(&b.rule);
  if (r && r->log_value.is_constant()) {
    const SeriesValue v = branch_sum(b, Functional::entropy(), b.n0, s);
    place(v.value);
    count = v.terms;
  } else {
    const Settle st = settle(b, 1.0, s);
    check_head(b, st.index, s);
    NeumaierSum pos, neg;
    if (st.index > b.n0) {
      BranchWalker w(b);
      for (; w.n() < st.index; w.next()) {
        const double v = Functional::entropy().eval(w.log_value(), w.log_weight());
        (v > 0.0 ? pos : neg).add(v);
        ++count;
      }
    }
    out.positive_part = pos.value();
    out.negative_part = neg.value();
    const SeriesValue rest = branch_sum(b, Functional::entropy(), st.index, s);
    count += rest.terms;
    if (st.side == Side::above)
      out.positive_part += rest.value;
    else
      out.negative_part += rest.value;
  }
  if (terms) *terms = count;
  return out;
}

SeriesValue tail_sum(const TailFamily& t, const Functional& f, const SeriesSettings& s) {
  NeumaierSum sum;
  double infinite = 0.0;
  SeriesValue out;
  for (const auto& b : t.branches) {
    const SeriesValue v = branch_sum(b, f, b.n0, s);
    if (std::isinf(v.value))
      infinite += v.value;
    else
      sum.add(v.value);
    out.terms += v.terms;
    out.settled = out.settled && v.settled;
  }
  out.value = infinite != 0.0 || std::isnan(infinite) ? infinite : sum.value();
  return out;
}

SeriesValue tail_region_sum(const TailFamily& t, const Functional& f, double lo, bool lo_closed,
                            double hi, bool hi_closed, const SeriesSettings& s) {
  NeumaierSum sum;
  double infinite = 0.0;
  SeriesValue out;
  for (const auto& b : t.branches) {
    const SeriesValue v = branch_region_sum(b, f, lo, lo_closed, hi, hi_closed, s);
    if (std::isinf(v.value))
      infinite += v.value;
    else
      sum.add(v.value);
    out.terms += v.terms;
    out.settled = out.settled && v.settled;
  }
  out.value = infinite != 0.0 || std::isnan(infinite) ? infinite : sum.value();
  return out;
}

ExtendedEntropyValue tail_entropy(const TailFamily& t, const SeriesSettings& s,
                                  std::int64_t* terms) {
  ExtendedEntropyValue out;
  std::int64_t total = 0;
  for (const auto& b : t.branches) {
    std::int64_t n = 0;
    out += branch_entropy(b, s, &n);
    total += n;
  }
  if (terms) *terms = total;
  return out;
}

void derive_declarations(TailFamily& t, const SeriesSettings& s) {
  if (t.empty()) return;
  t.declared_trace = tail_sum(t, Functional::trace(), s).value;
  t.declared_class = tail_entropy(t, s).verdict();
}

// ---- construction ----

TailFamily make_tail(TailKind kind, const ParamList& params) {
  TailFamily t;
  t.kind = kind;
  t.params = params;
  std::set<std::string> used;
  auto absorb = [&used](const ParamReader& r) { used.insert(r.used().begin(), r.used().end()); };
  switch (kind) {
    case TailKind::none:
      require(params.empty(), "tail none takes no parameters");
      return t;
    case TailKind::geometric_over_square: {
      ParamReader r(params, "", true);
      const double beta = r.number("beta", 0.0, true);
      const double gamma = r.number("gamma", 0.0, true);
      const double scale = r.number("scale", 1.0);
      const double offset = r.number("offset", 0.0);
      require(beta > 0.0, "beta must be positive");
      require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
      require(scale > 0.0, "scale must be positive");
      PairRule p;
      p.log_value = {std::log(scale / beta), -2.0, 0.0, -std::log(gamma)};
      p.log_weight = {std::log(beta), 0.0, 0.0, std::log(gamma)};
      p.offset = offset;
      t.branches.push_back({p, r.index("n0", 1)});
      absorb(r);
      break;
    }
    case TailKind::inverse_log_square: {
      ParamReader r(params, "", true);
      const double w = r.number("w", 0.0, true);
      const double scale = r.number("scale", 1.0);
      require(w > 0.0, "w must be positive");
      require(scale > 0.0, "scale must be positive");
      PairRule p;
      p.log_value = {std::log(scale), -1.0, -2.0, 0.0};
      p.log_weight = {std::log(w), 0.0, 0.0, 0.0};
      p.offset = r.number("offset", 0.0);
      const std::int64_t n0 = r.index("n0", 2);
      require(n0 >= 2, "inverse_log_square needs n0 >= 2");
      t.branches.push_back({p, n0});
      absorb(r);
      break;
    }
    case TailKind::custom_pair_sequence: {
      ParamReader top(params, "", true);
      const double count = top.number("branches", 1.0);
      require(count >= 1.0 && count <= 64.0 && count == std::floor(count),
              "branches must be an integer in [1,64]");
      absorb(top);
      const int k = static_cast<int>(count);
      for (int i = 1; i <= k; ++i) {
        ParamReader r(params, "b" + std::to_string(i) + ".", k == 1);
        const std::string rule = r.text("rule", "pair");
        TailBranch b;
        if (rule == "pair") {
          PairRule p;
          p.log_value = r.factors("t");
          p.log_weight = r.factors("w");
          p.offset = r.number("offset", 0.0);
          b.rule = p;
        } else if (rule == "select") {
          SelectionRule s;
          s.log_resolution = r.factors("a");
          const std::string mode = r.text("mode", "below");
          require(mode == "below" || mode == "above", "mode must be below or above");
          s.below = mode == "below";
          s.scale = r.number("scale", 1.0);
          s.k0 = static_cast<double>(r.index("k0", 1));
          b.rule = s;
        } else {
          throw LabError(ErrorCode::invalid_argument, "unknown rule " + rule);
        }
        b.n0 = r.index("n0", 1);
        t.branches.push_back(b);
        absorb(r);
      }
      break;
    }
  }
  for (const auto& kv : params)
    require(used.count(kv.first) > 0, "unknown tail parameter " + kv.first);
  for (const auto& b : t.branches) check_branch(b);
  return t;
}

TailFamily geometric_over_square(double beta, double gamma, double scale, std::int64_t n0) {
  ParamList p = {{"beta", fmt17(beta)}, {"gamma", fmt17(gamma)}};
  if (scale != 1.0) p.emplace_back("scale", fmt17(scale));
  if (n0 != 1) p.emplace_back("n0", std::to_string(n0));
  TailFamily t = make_tail(TailKind::geometric_over_square, p);
  derive_declarations(t);
  return t;
}

TailFamily inverse_log_square(double w, std::int64_t n0, double scale) {
  ParamList p = {{"w", fmt17(w)}};
  if (n0 != 2) p.emplace_back("n0", std::to_string(n0));
  if (scale != 1.0) p.emplace_back("scale", fmt17(scale));
  TailFamily t = make_tail(TailKind::inverse_log_square, p);
  derive_declarations(t);
  return t;
}

TailFamily custom_tail(std::vector<TailBranch> branches) {
  ParamList p;
  const std::size_t k = branches.size();
  require(k >= 1, "custom tail needs at least one branch");
  if (k > 1) p.emplace_back("branches", std::to_string(k));
  for (std::size_t i = 0; i < k; ++i) {
    const std::string pre = k > 1 ? "b" + std::to_string(i + 1) + "." : "";
    const TailBranch& b = branches[i];
    if (const auto* r = std::get_if<PairRule>(&b.rule)) {
      p.emplace_back(pre + "rule", "pair");
      ParamList f;
      write_factors(f, "t", r->log_value);
      write_factors(f, "w", r->log_weight);
      for (auto& kv : f) p.emplace_back(pre + kv.first, kv.second);
      if (r->offset != 0.0) p.emplace_back(pre + "offset", fmt17(r->offset));
    } else {
      const auto& s = std::get<SelectionRule>(b.rule);
      p.emplace_back(pre + "rule", "select");
      ParamList f;
      write_factors(f, "a", s.log_resolution);
      for (auto& kv : f) p.emplace_back(pre + kv.first, kv.second);
      p.emplace_back(pre + "mode", s.below ? "below" : "above");
      if (s.scale != 1.0) p.emplace_back(pre + "scale", fmt17(s.scale));
      if (s.k0 != 1.0) p.emplace_back(pre + "k0", fmt17(s.k0));
    }
    if (b.n0 != 1) p.emplace_back(pre + "n0", std::to_string(b.n0));
  }
  TailFamily t = make_tail(TailKind::custom_pair_sequence, p);
  derive_declarations(t);
  return t;
}

TailFamily scale_tail(const TailFamily& t, double a) {
  require(a > 0.0 && std::isfinite(a), "scale factor must be positive");
  if (t.empty() || a == 1.0) return t;
  TailFamily out;
  if (t.kind == TailKind::custom_pair_sequence) {
    std::vector<TailBranch> branches = t.branches;
    for (auto& b : branches) {
      if (auto* r = std::get_if<PairRule>(&b.rule)) {
        r->log_value.log_coef += std::log(a);
        r->offset *= a;
      } else {
        std::get<SelectionRule>(b.rule).scale *= a;
      }
    }
    out = custom_tail(std::move(branches));
  } else {
    ParamList p = t.params;
    set_param(p, "scale", get_param(p, "scale", 1.0) * a);
    const double c = get_param(p, "offset", 0.0);
    if (c != 0.0) set_param(p, "offset", c * a);
    out = make_tail(t.kind, p);
  }
  // H(a h) = a log a tau(h) + a H(h) keeps the verdict when the trace is finite.
  out.declared_trace = t.declared_trace * a;
  out.declared_class = t.declared_class;
  return out;
}

TailFamily offset_tail(const TailFamily& t, double c) {
  require(c >= 0.0 && std::isfinite(c), "offset must be finite and >= 0");
  if (t.empty() || c == 0.0) return t;
  TailFamily out;
  if (t.kind == TailKind::custom_pair_sequence) {
    std::vector<TailBranch> branches = t.branches;
    for (auto& b : branches) {
      auto* r = std::get_if<PairRule>(&b.rule);
      if (!r) throw LabError(ErrorCode::unsupported, "offset of a selection rule tail");
      r->offset += c;
    }
    out = custom_tail(std::move(branches));
  } else {
    ParamList p = t.params;
    set_param(p, "offset", get_param(p, "offset", 0.0) + c);
    out = make_tail(t.kind, p);
    derive_declarations(out);
  }
  return out;
}

}  // namespace segal
