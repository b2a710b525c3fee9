#pragma once

// File formats: moment-sequence files (one value per line or a bracketed
// array), the measure spec grammar (named built-ins, atom lists, mixtures,
// products), family specs with parameters varying in k, and grid specs.
// CSV emission helpers live here too: '.' decimal point, no locale.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "momentkit/convergence.hpp"
#include "momentkit/measure.hpp"
#include "momentkit/sequences.hpp"

namespace momentkit {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Moment sequence files

/// One value per line in order m0, m1, ...; '#' comments and blank lines are
/// skipped. A single bracketed line "[m0, m1, ...]" is also accepted.
inline MomentSequence parse_moment_sequence_text(const std::string& text,
                                                 const std::string& origin = "<input>") {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << origin << ":" << lineno << ": " << what;
    throw ParseError(msg.str());
  };
  auto parse_number = [&](const std::string& tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("trailing characters after number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("not a number: '" + tok + "'");
    }
    return 0.0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    std::string body = line.substr(b, e - b + 1);
    if (body.front() == '[') {
      if (body.back() != ']') fail("unterminated bracketed array");
      body = body.substr(1, body.size() - 2);
      std::string tok;
      std::istringstream arr(body);
      while (std::getline(arr, tok, ',')) {
        std::istringstream ts(tok);
        std::string word;
        if (!(ts >> word)) fail("empty entry in bracketed array");
        values.push_back(parse_number(word));
        if (ts >> word) fail("unexpected token '" + word + "'");
      }
    } else {
      std::istringstream ls(body);
      std::string word;
      ls >> word;
      values.push_back(parse_number(word));
      if (ls >> word) fail("unexpected second token '" + word + "' (one value per line)");
    }
  }
  if (values.empty()) throw ParseError(origin + ": no moments found");
  try {
    return MomentSequence(std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MomentSequence parse_moment_sequence(const std::string& path) {
  return parse_moment_sequence_text(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Measure spec grammar
//
//   node    := dirac(x) | uniform(a,b) | normal(mu,sigma) | lognormal(sigma)
//            | binomial(k,p) | poisson(lambda[,N])
//            | atoms((x,w){,(x,w)}) | mixture(c:node{,c:node})
//            | product(node{,node})
//
// Numeric slots are arithmetic expressions; in family specs they may use
// the index variable k.

namespace detail {

class SpecParser {
 public:
  SpecParser(std::string text, std::string origin, bool allow_k)
      : text_(std::move(text)), origin_(std::move(origin)), allow_k_(allow_k) {
    strip_comments();
  }

  /// Parse a full node; the result builds the measure for a given k
  /// (ignored when the spec uses no k).
  std::function<MeasureRep(double)> parse_node_root() {
    auto node = parse_node();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  using NumFn = std::function<double(double)>;
  using NodeFn = std::function<MeasureRep(double)>;

  void strip_comments() {
    std::string out;
    bool comment = false;
    for (char c : text_) {
      if (c == '#') comment = true;
      if (c == '\n') comment = false;
      if (!comment) out.push_back(c);
    }
    text_ = out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << origin_ << ": at offset " << pos_ << ": " << what;
    throw ParseError(msg.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool accept(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  // expr := term (('+'|'-') term)*
  // term := factor (('*'|'/') factor)*
  // factor := number | 'k' | '-' factor | '(' expr ')'
  NumFn parse_expr() {
    NumFn lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        NumFn rhs = parse_term();
        lhs = [lhs, rhs](double k) { return lhs(k) + rhs(k); };
      } else if (accept('-')) {
        NumFn rhs = parse_term();
        lhs = [lhs, rhs](double k) { return lhs(k) - rhs(k); };
      } else {
        return lhs;
      }
    }
  }
  NumFn parse_term() {
    NumFn lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        NumFn rhs = parse_factor();
        lhs = [lhs, rhs](double k) { return lhs(k) * rhs(k); };
      } else if (accept('/')) {
        NumFn rhs = parse_factor();
        lhs = [lhs, rhs](double k) { return lhs(k) / rhs(k); };
      } else {
        return lhs;
      }
    }
  }
  NumFn parse_factor() {
    skip_ws();
    if (accept('-')) {
      NumFn inner = parse_factor();
      return [inner](double k) { return -inner(k); };
    }
    if (accept('(')) {
      NumFn inner = parse_expr();
      expect(')');
      return inner;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'k' || text_[pos_] == 'K')) {
      if (!allow_k_) fail("the index variable k is only allowed in family specs");
      ++pos_;
      return [](double k) { return k; };
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    if (start == pos_) fail("expected a number");
    const std::string tok = text_.substr(start, pos_ - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return [v](double) { return v; };
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "'");
    }
  }

  NodeFn parse_node() {
    skip_ws();
    const std::string name = parse_ident();
    expect('(');
    NodeFn node;
    if (name == "dirac") {
      NumFn c = parse_expr();
      node = [c](double k) { return dirac(c(k)); };
    } else if (name == "uniform") {
      NumFn a = parse_expr();
      expect(',');
      NumFn b = parse_expr();
      node = [a, b](double k) { return uniform(a(k), b(k)); };
    } else if (name == "normal") {
      NumFn mu = parse_expr();
      expect(',');
      NumFn sg = parse_expr();
      node = [mu, sg](double k) { return normal(mu(k), sg(k)); };
    } else if (name == "lognormal") {
      NumFn sg = parse_expr();
      node = [sg](double k) { return lognormal(sg(k)); };
    } else if (name == "binomial") {
      NumFn cnt = parse_expr();
      expect(',');
      NumFn p = parse_expr();
      node = [cnt, p, this](double k) {
        const double c = cnt(k);
        const long r = std::lround(c);
        if (std::fabs(c - r) > 1e-9 || r < 1)
          throw ParseError(origin_ + ": binomial count must be a positive integer, got " +
                           std::to_string(c));
        return binomial(static_cast<int>(r), p(k));
      };
    } else if (name == "poisson") {
      NumFn lam = parse_expr();
      NumFn trunc = [](double) { return -1.0; };
      if (accept(',')) trunc = parse_expr();
      node = [lam, trunc](double k) {
        return poisson(lam(k), static_cast<int>(std::lround(trunc(k))));
      };
    } else if (name == "atoms") {
      std::vector<std::pair<NumFn, NumFn>> entries;
      do {
        expect('(');
        NumFn x = parse_expr();
        expect(',');
        NumFn w = parse_expr();
        expect(')');
        entries.emplace_back(x, w);
      } while (accept(','));
      node = [entries](double k) {
        std::vector<double> xs, ws;
        for (const auto& [x, w] : entries) {
          xs.push_back(x(k));
          ws.push_back(w(k));
        }
        return MeasureRep::atomic1d(xs, ws);
      };
    } else if (name == "mixture") {
      std::vector<std::pair<NumFn, NodeFn>> comps;
      do {
        NumFn c = parse_expr();
        expect(':');
        NodeFn sub = parse_node();
        comps.emplace_back(c, sub);
      } while (accept(','));
      node = [comps](double k) {
        std::vector<std::pair<double, MeasureRep>> parts;
        for (const auto& [c, sub] : comps) parts.emplace_back(c(k), sub(k));
        return MeasureRep::mixture(std::move(parts));
      };
    } else if (name == "product") {
      std::vector<NodeFn> factors;
      do {
        factors.push_back(parse_node());
      } while (accept(','));
      node = [factors](double k) {
        std::vector<MeasureRep> f;
        for (const auto& fn : factors) f.push_back(fn(k));
        return MeasureRep::product(std::move(f));
      };
    } else {
      fail("unknown built-in '" + name + "'");
    }
    expect(')');
    return node;
  }

  std::string text_;
  std::string origin_;
  bool allow_k_ = false;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline MeasureRep parse_measure_spec_text(const std::string& text,
                                          const std::string& origin = "<input>") {
  detail::SpecParser p(text, origin, /*allow_k=*/false);
  auto node = p.parse_node_root();
  try {
    return node(0.0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline MeasureRep parse_measure_spec(const std::string& path) {
  return parse_measure_spec_text(read_file(path), path);
}

/// Family spec: two directives, "generator: <node using k>" and
/// "limit: <node>".
inline MeasureFamily parse_family_spec_text(const std::string& text,
                                            const std::string& origin = "<input>") {
  std::optional<std::string> gen_text, lim_text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto colon = line.find(':', b);
    if (colon == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'generator:' or 'limit:'");
    std::string key = line.substr(b, colon - b);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::string value = line.substr(colon + 1);
    if (key == "generator")
      gen_text = value;
    else if (key == "limit")
      lim_text = value;
    else
      throw ParseError(origin + ":" + std::to_string(lineno) + ": unknown directive '" + key + "'");
  }
  if (!gen_text) throw ParseError(origin + ": missing 'generator:' directive");
  if (!lim_text) throw ParseError(origin + ": missing 'limit:' directive");

  detail::SpecParser gp(*gen_text, origin + " (generator)", /*allow_k=*/true);
  auto gen_node = gp.parse_node_root();
  MeasureRep limit = parse_measure_spec_text(*lim_text, origin + " (limit)");
  MeasureFamily fam{[gen_node, origin](int k) {
                      if (k < 1)
                        throw std::invalid_argument(origin + ": family index must be positive");
                      return gen_node(static_cast<double>(k));
                    },
                    std::move(limit)};
  return fam;
}

inline MeasureFamily parse_family_spec(const std::string& path) {
  return parse_family_spec_text(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Grid and box specs

/// "lo:hi:step" or a comma-separated list of points.
inline std::vector<double> parse_grid_spec(const std::string& spec) {
  auto num = [&](const std::string& tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw ParseError("grid: bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      throw ParseError("grid: bad number '" + tok + "'");
    }
  };
  std::vector<double> out;
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 + 1);
    const double lo = num(spec.substr(0, c1));
    const double hi = num(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = num(spec.substr(c2 + 1));
    if (!(step > 0.0)) throw ParseError("grid: step must be positive");
    if (!(hi >= lo)) throw ParseError("grid: hi must be >= lo");
    for (double x = lo; x <= hi + 1e-12 * std::max(1.0, std::fabs(hi)); x += step) out.push_back(x);
  } else {
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) throw ParseError("grid: empty entry");
      out.push_back(num(tok));
    }
  }
  if (out.empty()) throw ParseError("grid: no points");
  return out;
}

/// "a1,a2,...:b1,b2,..." (lower corner : upper corner).
inline Box parse_box_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("box: expected 'a1,..:b1,..'");
  auto list = [&](const std::string& s) {
    std::vector<double> v;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw ParseError("box: bad number '" + tok + "'");
      } catch (const std::logic_error&) {
        throw ParseError("box: bad number '" + tok + "'");
      }
    }
    return v;
  };
  try {
    return Box(list(spec.substr(0, colon)), list(spec.substr(colon + 1)));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("box: ") + e.what());
  }
}

/// "line", "halfline:c", or "segment:a,b".
inline SupportSet parse_support_spec(const std::string& spec) {
  if (spec == "line") return SupportSet::line();
  auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  try {
    if (kind == "halfline" && colon != std::string::npos)
      return SupportSet::halfline(std::stod(spec.substr(colon + 1)));
    if (kind == "segment" && colon != std::string::npos) {
      const std::string rest = spec.substr(colon + 1);
      const auto comma = rest.find(',');
      if (comma == std::string::npos) throw ParseError("support: segment needs 'a,b'");
      return SupportSet::segment(std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1)));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("support: ") + e.what());
  }
  throw ParseError("support: expected line | halfline:c | segment:a,b, got '" + spec + "'");
}

// ---------------------------------------------------------------------------
// CSV emission

/// Shortest round-trippable decimal form, C locale.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  for (int prec = 1; prec <= 16; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

struct CsvWriter {
  std::ostringstream out;

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
  void blank() { out << '\n'; }
  std::string str() const { return out.str(); }
};

}  // namespace momentkit
