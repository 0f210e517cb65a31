// Symbolic expression trees over jet variables, the independent variable
// lambda, the Herglotz action A, the integrating factor F and named
// parameters. Trees are immutable; all operations build new trees.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace hgf {

using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

enum class Kind {
  Num,     // rational constant
  Param,   // named parameter (alpha, k1, ...)
  Lambda,  // independent variable
  Jet,     // u^alpha with lambda-order and nu-order
  Act,     // A and its lambda-derivatives (order > 0 is a formal marker)
  Fac,     // integrating factor F and its lambda-derivatives
  Add,     // n-ary sum
  Mul,     // n-ary product
  Pow,     // base^(rational)
  Apply,   // unary function application
};

enum class Func { Exp, Ln, Sin, Cos, Sinh, Cosh, Arctan, Arctanh };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Kind kind;
  Rat value;          // Num; exponent for Pow
  std::string name;   // Param and Jet variable name
  int lam = 0;        // Jet/Act/Fac lambda-order
  int nu = 0;         // Jet nu-order (variation slot, <= 2)
  Func fn = Func::Exp;
  std::vector<ExprPtr> kids;
};

struct expr_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : expr_error {
  using expr_error::expr_error;
};

// ---------------------------------------------------------------------------
// Variable identity (for partial derivatives and substitution)

struct VarId {
  Kind kind = Kind::Lambda;  // Lambda, Param, Jet, Act or Fac
  std::string name;
  int lam = 0;
  int nu = 0;

  friend bool operator<(const VarId& a, const VarId& b) {
    return std::tie(a.kind, a.name, a.lam, a.nu) <
           std::tie(b.kind, b.name, b.lam, b.nu);
  }
  friend bool operator==(const VarId& a, const VarId& b) {
    return std::tie(a.kind, a.name, a.lam, a.nu) ==
           std::tie(b.kind, b.name, b.lam, b.nu);
  }
};

inline VarId jet_id(std::string name, int lam, int nu = 0) {
  return VarId{Kind::Jet, std::move(name), lam, nu};
}
inline VarId param_id(std::string name) { return VarId{Kind::Param, std::move(name), 0, 0}; }
inline VarId lambda_id() { return VarId{Kind::Lambda, "", 0, 0}; }
inline VarId action_id(int lam = 0) { return VarId{Kind::Act, "", lam, 0}; }
inline VarId factor_id(int lam = 0) { return VarId{Kind::Fac, "", lam, 0}; }

// ---------------------------------------------------------------------------
// Structural ordering; equal trees compare equal.

inline int cmp(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->value != b->value) return a->value < b->value ? -1 : 1;
  if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
  if (a->lam != b->lam) return a->lam < b->lam ? -1 : 1;
  if (a->nu != b->nu) return a->nu < b->nu ? -1 : 1;
  if (a->fn != b->fn) return a->fn < b->fn ? -1 : 1;
  if (a->kids.size() != b->kids.size())
    return a->kids.size() < b->kids.size() ? -1 : 1;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (int c = cmp(a->kids[i], b->kids[i])) return c;
  return 0;
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) { return cmp(a, b) == 0; }

struct ExprLess {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const { return cmp(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Factories (light normalisation only; see simplify.hpp for normal forms)

inline ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

inline ExprPtr num(Rat v) {
  Expr e;
  e.kind = Kind::Num;
  e.value = std::move(v);
  return make(std::move(e));
}
inline ExprPtr num(long long n, long long d = 1) { return num(Rat(n, d)); }

inline const ExprPtr& zero() {
  static const ExprPtr z = num(0);
  return z;
}
inline const ExprPtr& one() {
  static const ExprPtr o = num(1);
  return o;
}

inline bool is_num(const ExprPtr& e) { return e->kind == Kind::Num; }
inline bool is_zero(const ExprPtr& e) { return is_num(e) && e->value == 0; }
inline bool is_one(const ExprPtr& e) { return is_num(e) && e->value == 1; }

inline ExprPtr param(std::string name) {
  Expr e;
  e.kind = Kind::Param;
  e.name = std::move(name);
  return make(std::move(e));
}

inline ExprPtr lambda() {
  Expr e;
  e.kind = Kind::Lambda;
  return make(std::move(e));
}

inline ExprPtr jet(std::string var, int lam, int nu = 0) {
  if (lam < 0 || nu < 0) throw expr_error("jet orders must be non-negative");
  Expr e;
  e.kind = Kind::Jet;
  e.name = std::move(var);
  e.lam = lam;
  e.nu = nu;
  return make(std::move(e));
}

inline ExprPtr action(int lam = 0) {
  Expr e;
  e.kind = Kind::Act;
  e.lam = lam;
  return make(std::move(e));
}

inline ExprPtr factor(int lam = 0) {
  Expr e;
  e.kind = Kind::Fac;
  e.lam = lam;
  return make(std::move(e));
}

inline ExprPtr var(const VarId& v) {
  switch (v.kind) {
    case Kind::Lambda: return lambda();
    case Kind::Param: return param(v.name);
    case Kind::Jet: return jet(v.name, v.lam, v.nu);
    case Kind::Act: return action(v.lam);
    case Kind::Fac: return factor(v.lam);
    default: throw expr_error("not a variable kind");
  }
}

ExprPtr add(std::vector<ExprPtr> terms);
ExprPtr mul(std::vector<ExprPtr> factors);
ExprPtr pow(ExprPtr base, Rat expo);

inline ExprPtr add(ExprPtr a, ExprPtr b) { return add(std::vector<ExprPtr>{std::move(a), std::move(b)}); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return mul(std::vector<ExprPtr>{std::move(a), std::move(b)}); }
inline ExprPtr neg(ExprPtr a) { return mul(num(-1), std::move(a)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return add(std::move(a), neg(std::move(b))); }

inline ExprPtr add(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> flat;
  Rat c = 0;
  for (auto& t : terms) {
    if (t->kind == Kind::Add) {
      for (auto& k : t->kids) {
        if (is_num(k)) c += k->value;
        else flat.push_back(k);
      }
    } else if (is_num(t)) {
      c += t->value;
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (c != 0) flat.push_back(num(c));
  if (flat.empty()) return zero();
  if (flat.size() == 1) return flat[0];
  Expr e;
  e.kind = Kind::Add;
  e.kids = std::move(flat);
  return make(std::move(e));
}

inline ExprPtr mul(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> flat;
  Rat c = 1;
  for (auto& f : factors) {
    if (f->kind == Kind::Mul) {
      for (auto& k : f->kids) {
        if (is_num(k)) c *= k->value;
        else flat.push_back(k);
      }
    } else if (is_num(f)) {
      c *= f->value;
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (c == 0) return zero();
  if (c != 1) flat.insert(flat.begin(), num(c));
  if (flat.empty()) return one();
  if (flat.size() == 1) return flat[0];
  Expr e;
  e.kind = Kind::Mul;
  e.kids = std::move(flat);
  return make(std::move(e));
}

inline ExprPtr pow(ExprPtr base, Rat expo) {
  if (expo == 0) return one();
  if (expo == 1) return base;
  if (is_num(base) && boost::multiprecision::denominator(expo) == 1) {
    // exact integer powers of rationals
    using boost::multiprecision::cpp_int;
    cpp_int n = boost::multiprecision::numerator(expo);
    bool inv = n < 0;
    if (inv) n = -n;
    Rat r = 1;
    Rat b = base->value;
    for (cpp_int i = 0; i < n; ++i) r *= b;
    if (inv) {
      if (r == 0) throw expr_error("zero to a negative power");
      r = 1 / r;
    }
    return num(r);
  }
  if (base->kind == Kind::Pow) {
    Rat combined = base->value * expo;
    return pow(base->kids[0], combined);
  }
  if (is_one(base)) return one();
  Expr e;
  e.kind = Kind::Pow;
  e.value = std::move(expo);
  e.kids = {std::move(base)};
  return make(std::move(e));
}

inline ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_zero(b)) throw expr_error("division by syntactic zero");
  return mul(std::move(a), pow(std::move(b), -1));
}

inline ExprPtr apply(Func f, ExprPtr arg) {
  Expr e;
  e.kind = Kind::Apply;
  e.fn = f;
  e.kids = {std::move(arg)};
  return make(std::move(e));
}

inline ExprPtr exp(ExprPtr a) { return apply(Func::Exp, std::move(a)); }
inline ExprPtr ln(ExprPtr a) { return apply(Func::Ln, std::move(a)); }
inline ExprPtr sqrt(ExprPtr a) { return pow(std::move(a), Rat(1, 2)); }
inline ExprPtr sin(ExprPtr a) { return apply(Func::Sin, std::move(a)); }
inline ExprPtr cos(ExprPtr a) { return apply(Func::Cos, std::move(a)); }
inline ExprPtr sinh(ExprPtr a) { return apply(Func::Sinh, std::move(a)); }
inline ExprPtr cosh(ExprPtr a) { return apply(Func::Cosh, std::move(a)); }
inline ExprPtr arctan(ExprPtr a) { return apply(Func::Arctan, std::move(a)); }
inline ExprPtr arctanh(ExprPtr a) { return apply(Func::Arctanh, std::move(a)); }

// ---------------------------------------------------------------------------
// Numeric assignment of a jet point

struct JetPoint {
  double lambda = 0.0;
  double A = 0.0;
  double F = 1.0;
  // (variable, lambda-order, nu-order) -> value; lookups not present are errors
  std::map<std::tuple<std::string, int, int>, double> jets;

  void set(const std::string& v, int lam, double val, int nu = 0) {
    jets[{v, lam, nu}] = val;
  }
  double get(const std::string& v, int lam, int nu = 0) const {
    auto it = jets.find({v, lam, nu});
    if (it == jets.end())
      throw expr_error("jet value not bound: " + v + "[" + std::to_string(lam) +
                       "," + std::to_string(nu) + "]");
    return it->second;
  }
  bool has(const std::string& v, int lam, int nu = 0) const {
    return jets.count({v, lam, nu}) > 0;
  }
};

using Params = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Evaluation

inline double eval(const ExprPtr& e, const JetPoint& p, const Params& params = {}) {
  switch (e->kind) {
    case Kind::Num: return to_double(e->value);
    case Kind::Lambda: return p.lambda;
    case Kind::Param: {
      auto it = params.find(e->name);
      if (it == params.end()) throw expr_error("unbound parameter: " + e->name);
      return it->second;
    }
    case Kind::Jet: return p.get(e->name, e->lam, e->nu);
    case Kind::Act:
      if (e->lam != 0) throw expr_error("cannot evaluate symbolic dA/dlambda");
      return p.A;
    case Kind::Fac:
      if (e->lam != 0) throw expr_error("cannot evaluate symbolic dF/dlambda");
      return p.F;
    case Kind::Add: {
      double s = 0;
      for (auto& k : e->kids) s += eval(k, p, params);
      return s;
    }
    case Kind::Mul: {
      double s = 1;
      for (auto& k : e->kids) s *= eval(k, p, params);
      return s;
    }
    case Kind::Pow: {
      double b = eval(e->kids[0], p, params);
      const Rat& r = e->value;
      if (boost::multiprecision::denominator(r) == 1) {
        double x = std::pow(b, to_double(r));
        if (b == 0 && r < 0) throw domain_error("division by zero");
        return x;
      }
      if (b < 0) throw domain_error("fractional power of negative value");
      if (b == 0 && r < 0) throw domain_error("division by zero");
      return std::pow(b, to_double(r));
    }
    case Kind::Apply: {
      double a = eval(e->kids[0], p, params);
      switch (e->fn) {
        case Func::Exp: return std::exp(a);
        case Func::Ln:
          if (a <= 0) throw domain_error("ln of non-positive value");
          return std::log(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Sinh: return std::sinh(a);
        case Func::Cosh: return std::cosh(a);
        case Func::Arctan: return std::atan(a);
        case Func::Arctanh:
          if (std::abs(a) >= 1) throw domain_error("arctanh argument out of (-1,1)");
          return std::atanh(a);
      }
      throw expr_error("bad function");
    }
  }
  throw expr_error("bad node");
}

// ---------------------------------------------------------------------------
// Total derivative d/dlambda. Jet orders are raised; dA/dlambda and
// dF/dlambda stay symbolic (Act/Fac with lam+1) until a caller rewrites them.

inline ExprPtr total_derivative(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Num:
    case Kind::Param: return zero();
    case Kind::Lambda: return one();
    case Kind::Jet: return jet(e->name, e->lam + 1, e->nu);
    case Kind::Act: return action(e->lam + 1);
    case Kind::Fac: return factor(e->lam + 1);
    case Kind::Add: {
      std::vector<ExprPtr> terms;
      for (auto& k : e->kids) terms.push_back(total_derivative(k));
      return add(std::move(terms));
    }
    case Kind::Mul: {
      std::vector<ExprPtr> terms;
      for (size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<ExprPtr> fs = e->kids;
        fs[i] = total_derivative(e->kids[i]);
        terms.push_back(mul(std::move(fs)));
      }
      return add(std::move(terms));
    }
    case Kind::Pow: {
      // d(b^r) = r b^(r-1) b'
      return mul({num(e->value), pow(e->kids[0], e->value - 1),
                  total_derivative(e->kids[0])});
    }
    case Kind::Apply: {
      ExprPtr a = e->kids[0];
      ExprPtr da = total_derivative(a);
      switch (e->fn) {
        case Func::Exp: return mul(apply(Func::Exp, a), da);
        case Func::Ln: return div(da, a);
        case Func::Sin: return mul(apply(Func::Cos, a), da);
        case Func::Cos: return neg(mul(apply(Func::Sin, a), da));
        case Func::Sinh: return mul(apply(Func::Cosh, a), da);
        case Func::Cosh: return mul(apply(Func::Sinh, a), da);
        case Func::Arctan:
          return div(da, add(one(), pow(a, 2)));
        case Func::Arctanh:
          return div(da, sub(one(), pow(a, 2)));
      }
      throw expr_error("bad function");
    }
  }
  throw expr_error("bad node");
}

// Formal partial derivative: all other jet variables are independent symbols.
inline ExprPtr partial(const ExprPtr& e, const VarId& v) {
  switch (e->kind) {
    case Kind::Num: return zero();
    case Kind::Param:
      return (v.kind == Kind::Param && v.name == e->name) ? one() : zero();
    case Kind::Lambda: return v.kind == Kind::Lambda ? one() : zero();
    case Kind::Jet:
      return (v.kind == Kind::Jet && v.name == e->name && v.lam == e->lam &&
              v.nu == e->nu)
                 ? one()
                 : zero();
    case Kind::Act:
      return (v.kind == Kind::Act && v.lam == e->lam) ? one() : zero();
    case Kind::Fac:
      return (v.kind == Kind::Fac && v.lam == e->lam) ? one() : zero();
    case Kind::Add: {
      std::vector<ExprPtr> terms;
      for (auto& k : e->kids) terms.push_back(partial(k, v));
      return add(std::move(terms));
    }
    case Kind::Mul: {
      std::vector<ExprPtr> terms;
      for (size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<ExprPtr> fs = e->kids;
        fs[i] = partial(e->kids[i], v);
        terms.push_back(mul(std::move(fs)));
      }
      return add(std::move(terms));
    }
    case Kind::Pow:
      return mul({num(e->value), pow(e->kids[0], e->value - 1),
                  partial(e->kids[0], v)});
    case Kind::Apply: {
      ExprPtr a = e->kids[0];
      ExprPtr da = partial(a, v);
      if (is_zero(da)) return zero();
      switch (e->fn) {
        case Func::Exp: return mul(apply(Func::Exp, a), da);
        case Func::Ln: return div(da, a);
        case Func::Sin: return mul(apply(Func::Cos, a), da);
        case Func::Cos: return neg(mul(apply(Func::Sin, a), da));
        case Func::Sinh: return mul(apply(Func::Cosh, a), da);
        case Func::Cosh: return mul(apply(Func::Sinh, a), da);
        case Func::Arctan: return div(da, add(one(), pow(a, 2)));
        case Func::Arctanh: return div(da, sub(one(), pow(a, 2)));
      }
      throw expr_error("bad function");
    }
  }
  throw expr_error("bad node");
}

// Simultaneous substitution of variables by expressions.
inline ExprPtr substitute(const ExprPtr& e, const std::map<VarId, ExprPtr>& bindings) {
  auto lookup = [&](const VarId& v) -> ExprPtr {
    auto it = bindings.find(v);
    return it == bindings.end() ? nullptr : it->second;
  };
  switch (e->kind) {
    case Kind::Num: return e;
    case Kind::Param: {
      if (auto r = lookup(param_id(e->name))) return r;
      return e;
    }
    case Kind::Lambda: {
      if (auto r = lookup(lambda_id())) return r;
      return e;
    }
    case Kind::Jet: {
      if (auto r = lookup(jet_id(e->name, e->lam, e->nu))) return r;
      return e;
    }
    case Kind::Act: {
      if (auto r = lookup(action_id(e->lam))) return r;
      return e;
    }
    case Kind::Fac: {
      if (auto r = lookup(factor_id(e->lam))) return r;
      return e;
    }
    case Kind::Add: {
      std::vector<ExprPtr> terms;
      for (auto& k : e->kids) terms.push_back(substitute(k, bindings));
      return add(std::move(terms));
    }
    case Kind::Mul: {
      std::vector<ExprPtr> terms;
      for (auto& k : e->kids) terms.push_back(substitute(k, bindings));
      return mul(std::move(terms));
    }
    case Kind::Pow:
      return pow(substitute(e->kids[0], bindings), e->value);
    case Kind::Apply:
      return apply(e->fn, substitute(e->kids[0], bindings));
  }
  throw expr_error("bad node");
}

// Collect the variables occurring in an expression.
inline void collect_vars(const ExprPtr& e, std::set<VarId>& out) {
  switch (e->kind) {
    case Kind::Num: return;
    case Kind::Param: out.insert(param_id(e->name)); return;
    case Kind::Lambda: out.insert(lambda_id()); return;
    case Kind::Jet: out.insert(jet_id(e->name, e->lam, e->nu)); return;
    case Kind::Act: out.insert(action_id(e->lam)); return;
    case Kind::Fac: out.insert(factor_id(e->lam)); return;
    default:
      for (auto& k : e->kids) collect_vars(k, out);
  }
}

inline bool depends_on(const ExprPtr& e, const VarId& v) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  return vars.count(v) > 0;
}

}  // namespace hgf
