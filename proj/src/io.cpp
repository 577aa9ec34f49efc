#include "segal/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace segal {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& what) {
  throw LabError(ErrorCode::parse_error, origin + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool to_double(const std::string& s, double& x, bool allow_inf = false) {
  if (s.empty()) return false;
  if (allow_inf && s == "inf") {
    x = kInf;
    return true;
  }
  char* end = nullptr;
  x = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(x);
}

std::pair<std::string, std::string> key_value(const std::string& word, const std::string& origin,
                                              int line) {
  const auto eq = word.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == word.size())
    parse_fail(origin, line, "expected key=value, got '" + word + "'");
  return {word.substr(0, eq), word.substr(eq + 1)};
}

std::vector<double> number_list(const std::string& s, const std::string& origin, int line) {
  std::vector<double> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    double x;
    if (!to_double(item, x)) parse_fail(origin, line, "bad number '" + item + "' in list");
    out.push_back(x);
  }
  if (out.empty()) parse_fail(origin, line, "empty list");
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LabError(ErrorCode::parse_error, "cannot open " + path);
  return in;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

SpectralDensity parse_density_lines(std::istream& in, const std::string& origin, int line) {
  SpectralDensity d;
  bool have_trace = false;
  bool have_tail = false;
  for (std::string s; std::getline(in, s);) {
    ++line;
    strip_cr(s);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '!') {
      const auto words = split_ws(s);
      if (words[0] == "!trace") {
        if (have_trace) parse_fail(origin, line, "repeated !trace");
        if (words.size() != 2 || !to_double(words[1], d.total_algebra_trace, true))
          parse_fail(origin, line, "!trace needs one value or inf");
        have_trace = true;
      } else if (words[0] == "!tail") {
        if (have_tail) parse_fail(origin, line, "at most one !tail directive");
        if (words.size() < 2) parse_fail(origin, line, "!tail needs a family");
        TailKind kind;
        if (!parse_tail_kind(words[1], kind) || kind == TailKind::none)
          parse_fail(origin, line, "unknown tail family '" + words[1] + "'");
        ParamList params;
        bool have_dt = false, have_de = false;
        double declared_trace = kNaN;
        Verdict declared_class = Verdict::finite;
        for (std::size_t i = 2; i < words.size(); ++i) {
          auto [k, v] = key_value(words[i], origin, line);
          if (k == "declared_trace") {
            if (!to_double(v, declared_trace, true)) parse_fail(origin, line, "bad declared_trace");
            have_dt = true;
          } else if (k == "declared_entropy") {
            if (!parse_verdict(v.c_str(), declared_class))
              parse_fail(origin, line, "bad declared_entropy '" + v + "'");
            have_de = true;
          } else {
            params.emplace_back(k, v);
          }
        }
        if (!have_dt || !have_de)
          parse_fail(origin, line, "!tail needs declared_trace and declared_entropy");
        try {
          d.tail = make_tail(kind, params);
        } catch (const LabError& e) {
          parse_fail(origin, line, e.what());
        }
        d.tail.declared_trace = declared_trace;
        d.tail.declared_class = declared_class;
        have_tail = true;
      } else {
        parse_fail(origin, line, "unknown directive " + words[0]);
      }
      continue;
    }
    const auto tab = s.find('\t');
    if (tab == std::string::npos || s.find('\t', tab + 1) != std::string::npos)
      parse_fail(origin, line, "atom lines are <t><TAB><w>");
    Atom a;
    if (!to_double(s.substr(0, tab), a.value) || !to_double(s.substr(tab + 1), a.weight))
      parse_fail(origin, line, "bad atom '" + s + "'");
    d.atoms.push_back(a);
  }
  std::stable_sort(d.atoms.begin(), d.atoms.end(),
                   [](const Atom& x, const Atom& y) { return x.value < y.value; });
  return d;
}

}  // namespace

std::string format_number(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x == 0.0 ? 0.0 : x);  // no "-0"
  return buf;
}

SpectralDensity parse_density(std::istream& in, const std::string& origin) {
  return parse_density_lines(in, origin, 0);
}

SpectralDensity read_density(const std::string& path) {
  auto in = open(path);
  return parse_density(in, path);
}

void write_density(std::ostream& out, const SpectralDensity& d, const std::string& header) {
  std::istringstream h(header);
  for (std::string line; std::getline(h, line);) out << "# " << line << '\n';
  out << "!trace " << format_number(d.total_algebra_trace, 17) << '\n';
  if (!d.tail.empty()) {
    out << "!tail " << to_string(d.tail.kind);
    for (const auto& [k, v] : d.tail.params) out << ' ' << k << '=' << v;
    out << " declared_trace=" << format_number(d.tail.declared_trace, 17)
        << " declared_entropy=" << to_string(d.tail.declared_class) << '\n';
  }
  for (const Atom& a : d.atoms) out << format_number(a.value, 17) << '\t' << format_number(a.weight, 17) << '\n';
}

void write_density(const std::string& path, const SpectralDensity& d, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw LabError(ErrorCode::parse_error, "cannot write " + path);
  write_density(out, d, header);
}

ExperimentSpec parse_experiment(std::istream& in, const std::string& origin) {
  ExperimentSpec x;
  int line = 0;
  std::string s;
  // the directive comes first, after comments
  for (;;) {
    if (!std::getline(in, s)) parse_fail(origin, line, "missing !experiment directive");
    ++line;
    strip_cr(s);
    if (!s.empty() && s[0] != '#') break;
  }
  const auto words = split_ws(s);
  if (words[0] != "!experiment") parse_fail(origin, line, "expected !experiment");
  bool have_mode = false, have_eps = false, have_seq = false;
  for (std::size_t i = 1; i < words.size(); ++i) {
    auto [k, v] = key_value(words[i], origin, line);
    double num = 0.0;
    auto number = [&] {
      if (!to_double(v, num)) parse_fail(origin, line, "bad number for " + k);
      return num;
    };
    if (k == "name") {
      x.name = v;
    } else if (k == "mode") {
      if (!parse_mode(v, x.mode)) parse_fail(origin, line, "unknown mode '" + v + "'");
      have_mode = true;
    } else if (k == "epsilon") {
      x.epsilon = number();
      have_eps = true;
    } else if (k == "c") {
      if (v != "auto") x.c = number();
    } else if (k == "sequence") {
      if (!parse_sequence_kind(v, x.sequence.kind)) parse_fail(origin, line, "unknown sequence '" + v + "'");
      have_seq = true;
    } else if (k == "a") {
      x.sequence.a = number();
    } else if (k == "p") {
      x.sequence.p = number();
    } else if (k == "nmax") {
      number();
      if (num < 1.0 || num != std::floor(num) || num > 1e9) parse_fail(origin, line, "nmax must be a positive integer");
      x.n_max = static_cast<std::int64_t>(num);
    } else if (k == "m") {
      x.ms = number_list(v, origin, line);
    } else if (k == "M") {
      x.Ms = number_list(v, origin, line);
    } else {
      parse_fail(origin, line, "unknown experiment key " + k);
    }
  }
  if (!have_mode || !have_eps || !have_seq)
    parse_fail(origin, line, "!experiment needs mode, epsilon and sequence");
  x.h0 = parse_density_lines(in, origin, line);
  return x;
}

ExperimentSpec read_experiment(const std::string& path) {
  auto in = open(path);
  return parse_experiment(in, path);
}

namespace {

bool parse_complex(const std::string& w, Complex& z) {
  if (w.empty()) return false;
  if (w.back() != 'i') {
    double re;
    if (!to_double(w, re)) return false;
    z = {re, 0.0};
    return true;
  }
  const std::string body = w.substr(0, w.size() - 1);
  // split at the last sign that is not part of an exponent or leading
  std::size_t cut = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      cut = i;
      break;
    }
  }
  double re = 0.0, im;
  if (cut == std::string::npos) {
    if (!to_double(body, im)) return false;
  } else {
    if (!to_double(body.substr(0, cut), re) || !to_double(body.substr(cut), im)) return false;
  }
  z = {re, im};
  return true;
}

}  // namespace

MatrixInput parse_matrix(std::istream& in, const std::string& origin) {
  MatrixInput out;
  std::vector<Complex> pending;
  int line = 0;
  auto close_block = [&] {
    if (out.algebra.blocks.empty()) return;
    const int d = out.algebra.blocks.back().dim;
    if (pending.size() != static_cast<std::size_t>(d) * d)
      parse_fail(origin, line, "block needs " + std::to_string(d * d) + " entries, got " +
                                   std::to_string(pending.size()));
    Eigen::MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) = pending[static_cast<std::size_t>(r) * d + c];
    out.element.push_back(m);
    pending.clear();
  };
  for (std::string s; std::getline(in, s);) {
    ++line;
    strip_cr(s);
    if (s.empty() || s[0] == '#') continue;
    const auto words = split_ws(s);
    if (words.empty()) continue;
    if (words[0][0] == '!') {
      if (words[0] != "!algebra") parse_fail(origin, line, "unknown directive " + words[0]);
      close_block();
      MatrixBlock b{0, 0.0};
      bool have_dim = false, have_weight = false;
      for (std::size_t i = 1; i < words.size(); ++i) {
        auto [k, v] = key_value(words[i], origin, line);
        double x;
        if (!to_double(v, x)) parse_fail(origin, line, "bad number for " + k);
        if (k == "dim") {
          if (x < 1.0 || x != std::floor(x) || x > 4096) parse_fail(origin, line, "dim must be a positive integer");
          b.dim = static_cast<int>(x);
          have_dim = true;
        } else if (k == "weight") {
          if (!(x > 0.0)) parse_fail(origin, line, "weight must be positive");
          b.weight = x;
          have_weight = true;
        } else {
          parse_fail(origin, line, "unknown algebra key " + k);
        }
      }
      if (!have_dim || !have_weight) parse_fail(origin, line, "!algebra needs dim and weight");
      out.algebra.blocks.push_back(b);
      continue;
    }
    if (out.algebra.blocks.empty()) parse_fail(origin, line, "entries before !algebra");
    for (const auto& w : words) {
      Complex z;
      if (!parse_complex(w, z)) parse_fail(origin, line, "bad complex entry '" + w + "'");
      pending.push_back(z);
    }
  }
  close_block();
  if (out.algebra.blocks.empty()) parse_fail(origin, line, "no !algebra block");
  return out;
}

MatrixInput read_matrix(const std::string& path) {
  auto in = open(path);
  return parse_matrix(in, path);
}

void write_matrix(std::ostream& out, const WeightedMatrixAlgebra& A, const Element& x) {
  check_shape(x, A);
  char buf[96];
  for (std::size_t b = 0; b < x.size(); ++b) {
    out << "!algebra dim=" << A.blocks[b].dim << " weight=" << format_number(A.blocks[b].weight, 17) << '\n';
    for (Eigen::Index r = 0; r < x[b].rows(); ++r) {
      for (Eigen::Index c = 0; c < x[b].cols(); ++c) {
        const Complex z = x[b](r, c);
        std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real() + 0.0, z.imag() + 0.0);
        out << (c ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace segal
