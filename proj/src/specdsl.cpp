#include "torusconj/specdsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace torusconj::specdsl {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ------------------------------------------------------------------ lexer

namespace {

enum class Tok { integer, real, ident, symbol, newline, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    i += n;
    col += n;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      out.push_back({Tok::newline, "\\n", line, col});
      ++i;
      ++line;
      col = 1;
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          real = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      if (j == i + 1 && c == '.') throw ParseError(line, col, "stray '.'");
      out.push_back({real ? Tok::real : Tok::integer, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::ident, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
    } else if (std::string_view("[](),+-*=").find(c) != std::string_view::npos) {
      out.push_back({Tok::symbol, std::string(1, c), line, col});
      advance(1);
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::end, "<end of input>", line, col});
  return out;
}

// ----------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  TorusMapSpec run() {
    TorusMapSpec spec;
    skip_newlines();
    expect_ident("dim");
    expect_symbol("=");
    const Token& dtok = peek();
    if (dtok.kind != Tok::integer) fail(dtok, "dimension must be a positive integer");
    spec.dim = parse_size(dtok, "dimension");
    if (spec.dim == 0) fail(dtok, "dimension must be a positive integer");
    next();
    end_of_statement();

    skip_newlines();
    expect_ident("M");
    expect_symbol("=");
    spec.M = parse_matrix(spec.dim);
    end_of_statement();

    skip_newlines();
    while (peek().kind != Tok::end) {
      parse_gline(spec);
      end_of_statement();
      skip_newlines();
    }
    spec.canonicalize();
    return spec;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.column, msg);
  }

  bool at_symbol(const char* s) const { return peek().kind == Tok::symbol && peek().text == s; }

  void expect_symbol(const char* s) {
    if (!at_symbol(s)) fail(peek(), std::string("expected '") + s + "', found '" + peek().text + "'");
    next();
  }

  void expect_ident(const char* s) {
    if (peek().kind != Tok::ident || peek().text != s)
      fail(peek(), std::string("expected '") + s + "', found '" + peek().text + "'");
    next();
  }

  void skip_newlines() {
    while (peek().kind == Tok::newline) next();
  }

  void end_of_statement() {
    if (peek().kind == Tok::end) return;
    if (peek().kind != Tok::newline) fail(peek(), "expected end of line, found '" + peek().text + "'");
    next();
  }

  static std::size_t parse_size(const Token& t, const char* what) {
    std::size_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
      fail(t, std::string(what) + " out of range");
    return v;
  }

  // [sign] INT, with a targeted message for real literals.
  std::int64_t signed_integer(const char* what) {
    int sign = 1;
    while (at_symbol("+") || at_symbol("-")) {
      if (next().text == "-") sign = -sign;
    }
    const Token& t = peek();
    if (t.kind == Tok::real) fail(t, std::string("non-integer ") + what + " '" + t.text + "'");
    if (t.kind != Tok::integer) fail(t, std::string("expected integer ") + what + ", found '" + t.text + "'");
    std::int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc()) fail(t, std::string(what) + " out of range");
    next();
    return sign * v;
  }

  intlat::IntMatrix parse_matrix(std::size_t d) {
    const Token& open = peek();
    expect_symbol("[");
    std::vector<intlat::IntVector> rows;
    do {
      const Token& row_start = peek();
      expect_symbol("[");
      intlat::IntVector row;
      do {
        row.emplace_back(static_cast<long>(signed_integer("matrix entry")));
      } while (at_symbol(",") && (next(), true));
      expect_symbol("]");
      if (row.size() != d)
        fail(row_start, "dimension mismatch: matrix row has " + std::to_string(row.size()) + " entries, dim is " +
                            std::to_string(d));
      rows.push_back(std::move(row));
    } while (at_symbol(",") && (next(), true));
    expect_symbol("]");
    if (rows.size() != d)
      fail(open, "dimension mismatch: matrix has " + std::to_string(rows.size()) + " rows, dim is " +
                     std::to_string(d));
    return intlat::IntMatrix::from_rows(rows);
  }

  void parse_gline(TorusMapSpec& spec) {
    expect_ident("G");
    expect_symbol("[");
    const Token& itok = peek();
    if (itok.kind != Tok::integer) fail(itok, "expected component index");
    std::size_t comp = parse_size(itok, "component index");
    if (comp < 1 || comp > spec.dim)
      fail(itok, "dimension mismatch: component G[" + itok.text + "] outside 1.." + std::to_string(spec.dim));
    next();
    expect_symbol("]");
    expect_symbol("=");
    double sign = 1.0;
    if (at_symbol("+") || at_symbol("-")) sign = next().text == "-" ? -1.0 : 1.0;
    spec.terms.push_back(parse_term(spec.dim, comp - 1, sign));
    while (at_symbol("+") || at_symbol("-")) {
      sign = next().text == "-" ? -1.0 : 1.0;
      spec.terms.push_back(parse_term(spec.dim, comp - 1, sign));
    }
  }

  TrigTerm parse_term(std::size_t d, std::size_t comp, double sign) {
    TrigTerm term;
    term.component = comp;
    double coeff = 1.0;
    if (peek().kind == Tok::integer || peek().kind == Tok::real) {
      const Token& ct = next();
      coeff = std::strtod(ct.text.c_str(), nullptr);
      if (!std::isfinite(coeff)) fail(ct, "coefficient is not finite");
      expect_symbol("*");
    }
    term.coefficient = sign * coeff;
    const Token& fn = peek();
    if (fn.kind != Tok::ident || (fn.text != "sin" && fn.text != "cos"))
      fail(fn, "expected 'sin' or 'cos', found '" + fn.text + "'");
    term.kind = fn.text == "sin" ? TrigKind::sin : TrigKind::cos;
    next();
    expect_symbol("(");
    const Token& two = peek();
    if (two.kind != Tok::integer || two.text != "2") fail(two, "argument must have the form 2*pi*(...)");
    next();
    expect_symbol("*");
    if (peek().kind != Tok::ident || peek().text != "pi") fail(peek(), "argument must have the form 2*pi*(...)");
    next();
    expect_symbol("*");
    expect_symbol("(");
    term.frequency = parse_lincomb(d);
    expect_symbol(")");
    expect_symbol(")");
    return term;
  }

  std::vector<std::int64_t> parse_lincomb(std::size_t d) {
    std::vector<std::int64_t> freq(d, 0);
    bool first = true;
    for (;;) {
      std::int64_t sign = 1;
      if (at_symbol("+") || at_symbol("-")) {
        sign = next().text == "-" ? -1 : 1;
      } else if (!first) {
        break;
      }
      first = false;
      std::int64_t mult = 1;
      const Token& t = peek();
      if (t.kind == Tok::real) fail(t, "non-integer frequency '" + t.text + "'");
      if (t.kind == Tok::integer) {
        mult = signed_integer("frequency");
        expect_symbol("*");
      }
      const Token& var = peek();
      if (var.kind != Tok::ident) fail(var, "expected variable z1..z" + std::to_string(d));
      std::size_t idx = variable_index(var, d);
      next();
      freq[idx] += sign * mult;
    }
    return freq;
  }

  static std::size_t variable_index(const Token& var, std::size_t d) {
    const std::string& s = var.text;
    if (s.size() >= 2 && s[0] == 'z' && std::all_of(s.begin() + 1, s.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      std::size_t idx = 0;
      auto res = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
      if (res.ec == std::errc() && idx >= 1 && idx <= d) return idx - 1;
      fail(var, "unknown variable '" + s + "' (dimension mismatch: dim is " + std::to_string(d) + ")");
    }
    fail(var, "unknown variable '" + s + "' (only z1..z" + std::to_string(d) + " and pi are allowed)");
  }
};

}  // namespace

// ------------------------------------------------------------ TorusMapSpec

void TorusMapSpec::canonicalize() {
  using Key = std::tuple<std::size_t, std::vector<std::int64_t>, int>;
  std::map<Key, double> merged;
  for (const auto& t : terms) {
    bool zero_freq = std::all_of(t.frequency.begin(), t.frequency.end(), [](std::int64_t k) { return k == 0; });
    if (t.kind == TrigKind::sin && zero_freq) continue;
    // sin(-x) = -sin(x), cos(-x) = cos(x): make the first nonzero frequency positive.
    std::vector<std::int64_t> freq = t.frequency;
    double c = t.coefficient;
    const auto first = std::find_if(freq.begin(), freq.end(), [](std::int64_t k) { return k != 0; });
    if (first != freq.end() && *first < 0) {
      for (auto& k : freq) k = -k;
      if (t.kind == TrigKind::sin) c = -c;
    }
    merged[Key{t.component, std::move(freq), t.kind == TrigKind::sin ? 0 : 1}] += c;
  }
  terms.clear();
  for (const auto& [key, c] : merged) {
    if (c == 0.0) continue;
    const auto& [comp, freq, kind] = key;
    terms.push_back(TrigTerm{comp, c, kind == 0 ? TrigKind::sin : TrigKind::cos, freq});
  }
}

void TorusMapSpec::validate() const {
  if (dim == 0) throw PreconditionError("spec: dimension must be positive");
  if (M.rows() != dim || M.cols() != dim) throw PreconditionError("spec: M is not dim x dim");
  for (const auto& t : terms) {
    if (t.component >= dim) throw PreconditionError("spec: term component out of range");
    if (t.frequency.size() != dim) throw PreconditionError("spec: frequency length differs from dim");
    if (!std::isfinite(t.coefficient)) throw PreconditionError("spec: non-finite coefficient");
  }
}

TorusMapSpec parse_spec(std::string_view text) {
  Parser p(tokenize(text));
  return p.run();
}

TorusMapSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

namespace {

std::string format_lincomb(const std::vector<std::int64_t>& freq) {
  std::string out;
  for (std::size_t j = 0; j < freq.size(); ++j) {
    const std::int64_t k = freq[j];
    if (k == 0) continue;
    const std::int64_t mag = k < 0 ? -k : k;
    if (k < 0) {
      out += '-';
    } else if (!out.empty()) {
      out += '+';
    }
    if (mag != 1) out += std::to_string(mag) + "*";
    out += "z" + std::to_string(j + 1);
  }
  if (out.empty()) out = "0*z1";
  return out;
}

}  // namespace

std::string serialize_spec(const TorusMapSpec& spec) {
  TorusMapSpec canon = spec;
  canon.canonicalize();
  std::string out = "dim=" + std::to_string(canon.dim) + "\nM=" + canon.M.to_string() + "\n";
  std::size_t i = 0;
  while (i < canon.terms.size()) {
    const std::size_t comp = canon.terms[i].component;
    out += "G[" + std::to_string(comp + 1) + "]=";
    bool first = true;
    for (; i < canon.terms.size() && canon.terms[i].component == comp; ++i) {
      const TrigTerm& t = canon.terms[i];
      double c = t.coefficient;
      if (first) {
        if (c < 0) out += '-';
      } else {
        out += c < 0 ? " - " : " + ";
      }
      first = false;
      out += format_double(std::fabs(c));
      out += t.kind == TrigKind::sin ? "*sin(2*pi*(" : "*cos(2*pi*(";
      out += format_lincomb(t.frequency);
      out += "))";
    }
    out += "\n";
  }
  return out;
}

}  // namespace torusconj::specdsl
