#include "branelab/field_text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "branelab/errors.hpp"

namespace branelab {

namespace {

enum class Tok { Number, Ident, VecBasis, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  bool integer = false;
  int column = 0;
};

class Lexer {
 public:
  Lexer(std::string_view s, int line, int col0) : s_(s), line_(line), col0_(col0) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
      const int col = col0_ + static_cast<int>(i) + 1;
      if (i >= s_.size()) {
        out.push_back({Tok::End, "", 0.0, false, col});
        return out;
      }
      const char c = s_[i];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t j = i;
        bool integer = true;
        while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.')) {
          if (s_[j] == '.') integer = false;
          ++j;
        }
        if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
          if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
            integer = false;
            j = k;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
          }
        }
        double v = 0.0;
        auto res = std::from_chars(s_.data() + i, s_.data() + j, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + j)
          throw ParseError("malformed number '" + std::string(s_.substr(i, j - i)) + "'", line_, col);
        out.push_back({Tok::Number, std::string(s_.substr(i, j - i)), v, integer, col});
        i = j;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        std::string word(s_.substr(i, j - i));
        if (word == "d" && j + 1 < s_.size() && s_[j] == '/' && s_[j + 1] == 'd') {
          std::size_t k = j + 2;
          while (k < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[k])) || s_[k] == '_')) ++k;
          if (k > j + 2) {
            out.push_back({Tok::VecBasis, std::string(s_.substr(j + 2, k - j - 2)), 0.0, false, col});
            i = k;
            continue;
          }
        }
        out.push_back({Tok::Ident, std::move(word), 0.0, false, col});
        i = j;
        continue;
      }
      Tok k;
      switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line_, col);
      }
      out.push_back({k, std::string(1, c), 0.0, false, col});
      ++i;
    }
  }

 private:
  std::string_view s_;
  int line_, col0_;
};

struct Value {
  DifferentialForm form;
  std::optional<VectorField> vec;
  bool int_literal = false;
};

class Parser {
 public:
  Parser(const ModelPtr& model, std::vector<Token> toks, const Symbols* syms, int line)
      : model_(model), toks_(std::move(toks)), syms_(syms), line_(line) {}

  Value parse_all() {
    Value v = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    if (!v.vec) {
      for (const auto& [k, c] : v.form.coeffs())
        if (!c.is_periodic()) fail_at(1, "circle coordinate used outside cos/sin");
    } else {
      for (const auto& c : v.vec->components())
        if (!c.is_periodic()) fail_at(1, "circle coordinate used outside cos/sin");
    }
    return v;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, peek().column); }
  [[noreturn]] void fail_at(int col, const std::string& msg) const { throw ParseError(msg, line_, col); }

  Value scalar_value(const ScalarField& f) { return Value{DifferentialForm(f), std::nullopt}; }
  Value constant(double c) { return scalar_value(ScalarField::constant(model_, c)); }

  static bool is_scalar(const Value& v) { return !v.vec && v.form.degree() == 0; }

  Value add(Value a, const Value& b, bool minus, int col) {
    if (a.vec || b.vec) {
      auto as_vec = [&](const Value& v) -> VectorField {
        if (v.vec) return *v.vec;
        if (v.form.is_zero()) return VectorField(model_);
        fail_at(col, "cannot add a vector field and a form");
      };
      VectorField r = as_vec(a);
      VectorField s = as_vec(b);
      return Value{DifferentialForm(model_, 0), minus ? r - s : r + s};
    }
    if (a.form.degree() != b.form.degree() && !a.form.is_zero() && !b.form.is_zero())
      fail_at(col, "cannot add forms of degree " + std::to_string(a.form.degree()) + " and " +
                       std::to_string(b.form.degree()));
    DifferentialForm r = minus ? a.form - b.form : a.form + b.form;
    if (r.is_zero() && a.form.degree() != b.form.degree())
      r = DifferentialForm(model_, std::max(a.form.degree(), b.form.degree()));
    return Value{std::move(r), std::nullopt};
  }

  Value mul(const Value& a, const Value& b, int col) {
    if (a.vec && b.vec) fail_at(col, "cannot multiply two vector fields");
    if (a.vec || b.vec) {
      const Value& s = a.vec ? b : a;
      const VectorField& v = a.vec ? *a.vec : *b.vec;
      if (!is_scalar(s)) fail_at(col, "vector fields can only be scaled by functions");
      return Value{DifferentialForm(model_, 0), s.form.scalar() * v};
    }
    try {
      return Value{wedge(a.form, b.form), std::nullopt};
    } catch (const DegreeError& e) {
      fail_at(col, e.what());
    }
  }

  Value expr() {
    Value v = term();
    while (true) {
      const int col = peek().column;
      if (accept(Tok::Plus))
        v = add(std::move(v), term(), false, col);
      else if (accept(Tok::Minus))
        v = add(std::move(v), term(), true, col);
      else
        return v;
    }
  }

  Value term() {
    Value v = unary();
    while (true) {
      const int col = peek().column;
      if (accept(Tok::Star)) {
        v = mul(v, unary(), col);
      } else if (accept(Tok::Slash)) {
        Value d = unary();
        if (!is_scalar(d) || !d.form.scalar().is_constant()) fail_at(col, "division by a non-constant");
        const double c = d.form.scalar().constant_value();
        if (c == 0.0) fail_at(col, "division by zero");
        v = mul(v, constant(1.0 / c), col);
      } else {
        return v;
      }
    }
  }

  Value unary() {
    const int col = peek().column;
    if (accept(Tok::Minus)) return mul(constant(-1.0), unary(), col);
    if (accept(Tok::Plus)) return unary();
    return power();
  }

  Value power() {
    Value v = atom();
    while (true) {
      const int col = peek().column;
      if (!accept(Tok::Caret)) return v;
      if (peek().kind == Tok::Number) {
        const Token& t = next();
        if (!t.integer || t.number > 64) fail_at(t.column, "exponent must be a small non-negative integer");
        if (!is_scalar(v)) fail_at(col, "only functions can be raised to a power");
        ScalarField base = v.form.scalar();
        ScalarField r = ScalarField::constant(model_, 1.0);
        for (int k = 0; k < static_cast<int>(t.number); ++k) r = r * base;
        v = scalar_value(r);
      } else {
        v = mul(v, atom(), col);
      }
    }
  }

  std::optional<Value> lookup_symbol(const std::string& name, int col) {
    if (!syms_) return std::nullopt;
    if (auto it = syms_->forms.find(name); it != syms_->forms.end()) {
      DifferentialForm f = it->second;
      if (f.model() != model_ && !f.model()->same_chart(*model_)) {
        if (!f.model()->is_prefix_of(*model_))
          fail_at(col, "'" + name + "' lives on an incompatible chart");
        f = f.extend_to(model_);
      }
      return Value{std::move(f), std::nullopt};
    }
    if (auto it = syms_->vectors.find(name); it != syms_->vectors.end()) {
      VectorField v = it->second;
      if (v.model() != model_ && !v.model()->same_chart(*model_)) {
        if (!v.model()->is_prefix_of(*model_))
          fail_at(col, "'" + name + "' lives on an incompatible chart");
        v = v.extend_to(model_);
      }
      return Value{DifferentialForm(model_, 0), std::move(v)};
    }
    return std::nullopt;
  }

  // cos/sin of an affine combination of circle coordinates.
  Value trig(bool is_sin, const Value& arg, int col) {
    if (!is_scalar(arg)) fail_at(col, "trig argument must be a function");
    const ScalarField f = arg.form.scalar();
    const std::size_t n = model_->dim();
    std::vector<int> k(n, 0);
    double phase = 0.0;
    for (const auto& [m, c] : f.terms()) {
      if (m.has_frequency()) fail_at(col, "nested trig functions are not supported");
      int total = 0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (m.powers[i]) {
          total += m.powers[i];
          idx = i;
        }
      if (total == 0) {
        phase += c;
        continue;
      }
      if (total != 1 || !model_->is_circle(idx))
        fail_at(col, "trig argument must be affine in circle coordinates");
      const double ratio = c / (2.0 * std::numbers::pi);
      const double rounded = std::round(ratio);
      if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
        fail_at(col, "frequency of '" + model_->coord(idx).name + "' is not 2*pi times an integer");
      k[idx] = static_cast<int>(rounded);
    }
    const ScalarField c = ScalarField::trig(model_, k, Phase::Cos);
    const ScalarField s = ScalarField::trig(model_, k, Phase::Sin);
    const double cp = std::cos(phase), sp = std::sin(phase);
    ScalarField r = is_sin ? cp * s + sp * c : cp * c - sp * s;
    return scalar_value(r);
  }

  Value atom() {
    const Token t = next();
    switch (t.kind) {
      case Tok::Number: {
        Value v = constant(t.number);
        v.int_literal = t.integer;
        return v;
      }
      case Tok::LParen: {
        Value v = expr();
        if (!accept(Tok::RParen)) fail("expected ')'");
        return v;
      }
      case Tok::VecBasis: {
        auto i = model_->index_of(t.text);
        if (!i) fail_at(t.column, "unknown coordinate '" + t.text + "'");
        return Value{DifferentialForm(model_, 0), VectorField::basis(model_, *i)};
      }
      case Tok::Ident:
        return identifier(t);
      default:
        fail_at(t.column, t.kind == Tok::End ? "unexpected end of expression" : "unexpected '" + t.text + "'");
    }
  }

  Value identifier(const Token& t) {
    const std::string& w = t.text;
    if (w == "cos" || w == "sin" || w == "sqrt") {
      if (!accept(Tok::LParen)) fail("expected '(' after " + w);
      const int col = peek().column;
      Value arg = expr();
      if (!accept(Tok::RParen)) fail("expected ')'");
      if (w == "sqrt") {
        if (!is_scalar(arg) || !arg.form.scalar().is_constant()) fail_at(col, "sqrt needs a constant");
        const double x = arg.form.scalar().constant_value();
        if (x < 0) fail_at(col, "sqrt of a negative number");
        return constant(std::sqrt(x));
      }
      return trig(w == "sin", arg, col);
    }
    if (w == "pi") return constant(std::numbers::pi);
    if (auto i = model_->index_of(w)) {
      if (model_->is_circle(*i)) {
        Monomial m{std::vector<int>(model_->dim(), 0), std::vector<int>(model_->dim(), 0), Phase::Cos};
        m.powers[*i] = 1;
        return scalar_value(ScalarField::from_terms(model_, {{m, 1.0}}, true));
      }
      return scalar_value(ScalarField::coordinate(model_, *i));
    }
    if (auto sym = lookup_symbol(w, t.column)) return std::move(*sym);
    if (w.size() > 1 && w[0] == 'd') {
      if (auto i = model_->index_of(w.substr(1))) return Value{DifferentialForm::dx(model_, *i), std::nullopt};
    }
    fail_at(t.column, "unknown name '" + w + "'");
  }

  ModelPtr model_;
  std::vector<Token> toks_;
  const Symbols* syms_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedValue parse_expression(const ModelPtr& model, std::string_view text, const Symbols* symbols, int line,
                             int column_offset) {
  Lexer lex(text, line, column_offset);
  Parser p(model, lex.run(), symbols, line);
  Value v = p.parse_all();
  return ParsedValue{std::move(v.form), std::move(v.vec)};
}

ScalarField parse_field(const ModelPtr& model, std::string_view text, const Symbols* symbols, int line,
                        int column_offset) {
  ParsedValue v = parse_expression(model, text, symbols, line, column_offset);
  if (v.is_vector() || (v.form.degree() != 0 && !v.form.is_zero()))
    throw ParseError("expected a function", line, column_offset + 1);
  return v.form.degree() == 0 ? v.form.scalar() : ScalarField(model);
}

DifferentialForm parse_form(const ModelPtr& model, std::string_view text, int expected_degree,
                            const Symbols* symbols, int line, int column_offset) {
  ParsedValue v = parse_expression(model, text, symbols, line, column_offset);
  if (v.is_vector()) throw ParseError("expected a form, got a vector field", line, column_offset + 1);
  if (expected_degree >= 0 && v.form.degree() != expected_degree) {
    if (v.form.is_zero()) return DifferentialForm(model, expected_degree);
    throw ParseError("expected a " + std::to_string(expected_degree) + "-form, got degree " +
                         std::to_string(v.form.degree()),
                     line, column_offset + 1);
  }
  return std::move(v.form);
}

VectorField parse_vector(const ModelPtr& model, std::string_view text, const Symbols* symbols, int line,
                         int column_offset) {
  ParsedValue v = parse_expression(model, text, symbols, line, column_offset);
  if (!v.is_vector()) {
    if (v.form.is_zero()) return VectorField(model);
    throw ParseError("expected a vector field", line, column_offset + 1);
  }
  return std::move(*v.vector);
}

}  // namespace branelab
