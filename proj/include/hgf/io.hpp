// Parsing and rendering of expressions. Primes denote lambda-derivatives
// (t', t'', ...); `l` is the independent variable, `A` the Herglotz action,
// `F` the integrating factor.
#pragma once

#include "expr.hpp"

#include <cctype>
#include <sstream>

namespace hgf {

struct ParseContext {
  std::vector<std::string> deps;    // declared dependent variables
  std::set<std::string> params;     // declared parameters

  bool is_dep(const std::string& s) const {
    for (auto& d : deps)
      if (d == s) return true;
    return false;
  }
};

struct parse_error : expr_error {
  size_t position;
  parse_error(const std::string& msg, size_t pos)
      : expr_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

namespace detail {

class Parser {
 public:
  Parser(std::string text, const ParseContext& ctx)
      : text_(std::move(text)), ctx_(ctx) {}

  ExprPtr parse() {
    ExprPtr e = expression();
    skip_ws();
    if (pos_ != text_.size()) throw parse_error("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string text_;
  const ParseContext& ctx_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw parse_error(std::string("expected '") + c + "'", pos_);
  }

  ExprPtr expression() {
    bool negate = accept('-');
    ExprPtr e = term();
    if (negate) e = neg(e);
    while (true) {
      if (accept('+')) e = add(e, term());
      else if (accept('-')) e = sub(e, term());
      else break;
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (true) {
      if (accept('*')) e = mul(e, factor());
      else if (accept('/')) {
        ExprPtr d = factor();
        if (is_zero(d)) throw parse_error("division by zero constant", pos_);
        e = div(e, d);
      } else break;
    }
    return e;
  }

  ExprPtr factor() {
    ExprPtr b = base();
    if (accept('^')) return pow(b, rational());
    return b;
  }

  Rat rational() {
    skip_ws();
    if (accept('(')) {
      bool neg_ = accept('-');
      long long n = integer();
      long long d = 1;
      if (accept('/')) d = integer();
      expect(')');
      if (d == 0) throw parse_error("zero denominator in exponent", pos_);
      return Rat(neg_ ? -n : n, d);
    }
    bool neg_ = accept('-');
    long long n = integer();
    return Rat(neg_ ? -n : n);
  }

  long long integer() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw parse_error("expected integer", pos_);
    return std::stoll(text_.substr(start, pos_ - start));
  }

  ExprPtr base() {
    skip_ws();
    if (pos_ >= text_.size()) throw parse_error("unexpected end of input", pos_);
    char c = text_[pos_];
    if (accept('(')) {
      ExprPtr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw parse_error("unexpected character", pos_);
  }

  ExprPtr number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    // optional exponent
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;  // not an exponent
      }
    }
    std::string tok = text_.substr(start, pos_ - start);
    // exact decimal -> rational
    Rat mantissa = 0;
    Rat scale = 1;
    long long expo = 0;
    size_t i = 0;
    bool past_dot = false;
    for (; i < tok.size(); ++i) {
      char ch = tok[i];
      if (ch == '.') {
        if (past_dot) throw parse_error("malformed number", start);
        past_dot = true;
      } else if (ch == 'e' || ch == 'E') {
        expo = std::stoll(tok.substr(i + 1));
        break;
      } else {
        mantissa = mantissa * 10 + (ch - '0');
        if (past_dot) scale *= 10;
      }
    }
    Rat v = mantissa / scale;
    if (expo > 0)
      for (long long k = 0; k < expo; ++k) v *= 10;
    else
      for (long long k = 0; k < -expo; ++k) v /= 10;
    return num(v);
  }

  ExprPtr identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);

    static const std::map<std::string, Func> funcs = {
        {"exp", Func::Exp},     {"ln", Func::Ln},      {"sin", Func::Sin},
        {"cos", Func::Cos},     {"sinh", Func::Sinh},  {"cosh", Func::Cosh},
        {"arctan", Func::Arctan}, {"arctanh", Func::Arctanh}};
    if (peek() == '(') {
      auto fit = funcs.find(name);
      if (fit != funcs.end()) {
        expect('(');
        ExprPtr arg = expression();
        expect(')');
        return apply(fit->second, arg);
      }
      if (name == "sqrt") {
        expect('(');
        ExprPtr arg = expression();
        expect(')');
        return sqrt(arg);
      }
      if (name == "D") {  // D(t,k): jet of order k
        expect('(');
        ExprPtr inner = identifier();
        if (inner->kind != Kind::Jet)
          throw parse_error("D() expects a dependent variable", start);
        expect(',');
        long long k = integer();
        expect(')');
        return jet(inner->name, inner->lam + static_cast<int>(k));
      }
    }

    int primes = 0;
    while (pos_ < text_.size() && text_[pos_] == '\'') {
      ++primes;
      ++pos_;
    }

    if (name == "l") {
      if (primes) throw parse_error("the independent variable takes no primes", start);
      return lambda();
    }
    if (name == "A") {
      if (primes) throw parse_error("A takes no primes; it obeys dA/dl = L", start);
      return action();
    }
    if (name == "F") {
      if (primes) throw parse_error("F takes no primes", start);
      return factor();
    }
    if (ctx_.is_dep(name)) return jet(name, primes);
    if (ctx_.params.count(name)) {
      if (primes) throw parse_error("parameters take no primes", start);
      return param(name);
    }
    throw parse_error("undeclared variable '" + name + "'", start);
  }
};

}  // namespace detail

inline ExprPtr parse(const std::string& text, const ParseContext& ctx) {
  detail::Parser p(text, ctx);
  return p.parse();
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string render_rat(const Rat& r) {
  using boost::multiprecision::cpp_int;
  cpp_int n = boost::multiprecision::numerator(r);
  cpp_int d = boost::multiprecision::denominator(r);
  if (d == 1) return n.str();
  // decimal when the denominator is 2^a * 5^b and short
  cpp_int dd = d;
  int twos = 0, fives = 0;
  while (dd % 2 == 0) { dd /= 2; ++twos; }
  while (dd % 5 == 0) { dd /= 5; ++fives; }
  if (dd == 1 && twos <= 12 && fives <= 12) {
    int digits = std::max(twos, fives);
    cpp_int scaled = n;
    for (int i = 0; i < digits; ++i) scaled *= 10;
    scaled /= d;
    bool negv = scaled < 0;
    std::string s = cpp_int(boost::multiprecision::abs(scaled)).str();
    while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
    s.insert(s.size() - digits, ".");
    return (negv ? "-" : "") + s;
  }
  return n.str() + "/" + d.str();
}

// precedence: 0 sum, 1 product, 2 power/atom
std::string render_impl(const ExprPtr& e, int parent_prec);

inline std::string func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Arctan: return "arctan";
    case Func::Arctanh: return "arctanh";
  }
  return "?";
}

inline bool term_is_negative(const ExprPtr& e) {
  if (is_num(e)) return e->value < 0;
  if (e->kind == Kind::Mul && !e->kids.empty() && is_num(e->kids[0]))
    return e->kids[0]->value < 0;
  return false;
}

// negation without full simplification
inline ExprPtr simplify_free_neg(const ExprPtr& e) {
  if (is_num(e)) return num(-e->value);
  if (e->kind == Kind::Mul && !e->kids.empty() && is_num(e->kids[0])) {
    std::vector<ExprPtr> kids = e->kids;
    kids[0] = num(-kids[0]->value);
    return mul(std::move(kids));
  }
  return neg(e);
}

inline std::string render_impl(const ExprPtr& e, int parent_prec) {
  auto wrap = [&](const std::string& s, int prec) {
    return prec < parent_prec ? "(" + s + ")" : s;
  };
  switch (e->kind) {
    case Kind::Num: {
      std::string s = render_rat(e->value);
      return (e->value < 0 && parent_prec > 0) ? "(" + s + ")" : s;
    }
    case Kind::Param: return e->name;
    case Kind::Lambda: return "l";
    case Kind::Act:
      return e->lam == 0 ? "A" : "D^" + std::to_string(e->lam) + "(A)";
    case Kind::Fac:
      return e->lam == 0 ? "F" : "D^" + std::to_string(e->lam) + "(F)";
    case Kind::Jet: {
      std::string s = e->name;
      if (e->lam <= 3) {
        for (int i = 0; i < e->lam; ++i) s += '\'';
      } else {
        s = "D(" + e->name + "," + std::to_string(e->lam) + ")";
      }
      for (int i = 0; i < e->nu; ++i) s += "~nu";
      return s;
    }
    case Kind::Add: {
      std::string s;
      for (size_t i = 0; i < e->kids.size(); ++i) {
        const ExprPtr& t = e->kids[i];
        if (i == 0) {
          s = render_impl(t, 0);
        } else if (term_is_negative(t)) {
          s += " - " + render_impl(simplify_free_neg(t), 1);
        } else {
          s += " + " + render_impl(t, 1);
        }
      }
      return wrap(s, 0);
    }
    case Kind::Mul: {
      // split into numerator/denominator by exponent sign
      std::vector<ExprPtr> numf, denf;
      Rat coeff = 1;
      for (auto& k : e->kids) {
        if (is_num(k)) coeff *= k->value;
        else if (k->kind == Kind::Pow && k->value < 0)
          denf.push_back(pow(k->kids[0], -k->value));
        else
          numf.push_back(k);
      }
      std::string s;
      bool neg_coeff = coeff < 0;
      Rat ac = neg_coeff ? Rat(-coeff) : coeff;
      if (ac != 1 || numf.empty()) s = render_rat(ac);
      for (auto& k : numf) {
        if (!s.empty()) s += "*";
        s += render_impl(k, 2);
      }
      if (!denf.empty()) {
        std::string d;
        for (auto& k : denf) {
          if (!d.empty()) d += "*";
          d += render_impl(k, 2);
        }
        if (denf.size() > 1) d = "(" + d + ")";
        s += "/" + d;
      }
      if (neg_coeff) s = "-" + s;
      return wrap(s, neg_coeff ? 0 : 1);
    }
    case Kind::Pow: {
      if (e->value == Rat(1, 2)) return "sqrt(" + render_impl(e->kids[0], 0) + ")";
      std::string b = render_impl(e->kids[0], 3);
      using boost::multiprecision::denominator;
      std::string x;
      if (denominator(e->value) == 1 && e->value > 0)
        x = render_rat(e->value);
      else
        x = "(" + boost::multiprecision::numerator(e->value).str() + "/" +
            denominator(e->value).str() + ")";
      return wrap(b + "^" + x, 2);
    }
    case Kind::Apply:
      return func_name(e->fn) + "(" + render_impl(e->kids[0], 0) + ")";
  }
  return "?";
}

}  // namespace detail

inline std::string render(const ExprPtr& e) { return detail::render_impl(e, 0); }

}  // namespace hgf
