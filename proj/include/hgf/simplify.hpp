// Rational normal form for expression trees. Expressions are flattened to a
// fraction of multivariate polynomials whose indeterminates ("atoms") are
// variables, opaque kernel applications and radicals of primitive
// polynomials. Polynomial and rational identities reduce to syntactic zero;
// nested radical identities are out of scope and left to numeric checks.
#pragma once

#include "expr.hpp"

#include <algorithm>
#include <optional>

namespace hgf {
namespace detail {

using Mono = std::vector<std::pair<ExprPtr, int>>;  // sorted, exponents > 0

inline int mono_degree(const Mono& m) {
  int d = 0;
  for (auto& [a, e] : m) d += e;
  return d;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const {
    int da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da < db;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (int c = cmp(a[i].first, b[j].first)) return c < 0;
      if (a[i].second != b[j].second) return a[i].second < b[j].second;
      ++i;
      ++j;
    }
    return a.size() < b.size();
  }
};

using Poly = std::map<Mono, Rat, MonoLess>;

inline Poly poly_const(Rat c) {
  Poly p;
  if (c != 0) p[{}] = std::move(c);
  return p;
}

inline Poly poly_atom(ExprPtr a) {
  Poly p;
  p[Mono{{std::move(a), 1}}] = 1;
  return p;
}

inline bool poly_is_zero(const Poly& p) { return p.empty(); }
inline bool poly_is_const(const Poly& p) {
  return p.empty() || (p.size() == 1 && p.begin()->first.empty());
}

inline void poly_add_term(Poly& p, const Mono& m, const Rat& c) {
  if (c == 0) return;
  auto it = p.find(m);
  if (it == p.end()) {
    p[m] = c;
  } else {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (auto& [m, c] : b) poly_add_term(r, m, c);
  return r;
}

inline Poly poly_neg(const Poly& a) {
  Poly r;
  for (auto& [m, c] : a) r[m] = -c;
  return r;
}

inline Poly poly_scale(const Poly& a, const Rat& c) {
  Poly r;
  if (c == 0) return r;
  for (auto& [m, k] : a) r[m] = k * c;
  return r;
}

// Radical atoms are Pow(base, 1/q) nodes over primitive polynomial bases.
// The normal-form context remembers each base so powers >= q can be reduced
// back into the polynomial ring.
struct NfContext {
  std::map<ExprPtr, Poly, ExprLess> radical_base;

  bool is_radical(const ExprPtr& a) const { return radical_base.count(a) > 0; }

  Poly mono_normalize(Mono m, Rat coeff);
  Poly poly_mul(const Poly& a, const Poly& b);
  Poly poly_pow(const Poly& a, long long n);
};

inline Poly NfContext::mono_normalize(Mono m, Rat coeff) {
  std::sort(m.begin(), m.end(), [](auto& x, auto& y) { return cmp(x.first, y.first) < 0; });
  // merge duplicates
  Mono merged;
  for (auto& [a, e] : m) {
    if (!merged.empty() && equal(merged.back().first, a))
      merged.back().second += e;
    else
      merged.push_back({a, e});
  }
  // reduce radical powers: s^k with s = base^(1/q) and k >= q
  for (size_t i = 0; i < merged.size(); ++i) {
    auto it = radical_base.find(merged[i].first);
    if (it == radical_base.end()) continue;
    long long q = boost::multiprecision::denominator(merged[i].first->value)
                      .convert_to<long long>();
    if (merged[i].second >= q) {
      long long k = merged[i].second / q;
      int rem = static_cast<int>(merged[i].second % q);
      Mono rest;
      for (size_t j = 0; j < merged.size(); ++j) {
        if (j == i) {
          if (rem > 0) rest.push_back({merged[j].first, rem});
        } else {
          rest.push_back(merged[j]);
        }
      }
      Poly base_pow = poly_pow(it->second, k);
      Poly partial;
      poly_add_term(partial, rest, coeff);
      return poly_mul(base_pow, partial);
    }
  }
  Poly r;
  poly_add_term(r, merged, coeff);
  return r;
}

inline Poly NfContext::poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (auto& [ma, ca] : a)
    for (auto& [mb, cb] : b) {
      Mono m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      Poly t = mono_normalize(std::move(m), ca * cb);
      for (auto& [mt, ct] : t) poly_add_term(r, mt, ct);
    }
  return r;
}

inline Poly NfContext::poly_pow(const Poly& a, long long n) {
  Poly r = poly_const(1);
  Poly base = a;
  while (n > 0) {
    if (n & 1) r = poly_mul(r, base);
    base = (n >>= 1) ? poly_mul(base, base) : base;
  }
  return r;
}

// Positive rational content (gcd of coefficients).
inline Rat poly_content(const Poly& p) {
  using boost::multiprecision::cpp_int;
  cpp_int gn = 0, ld = 1;
  for (auto& [m, c] : p) {
    gn = boost::multiprecision::gcd(gn, boost::multiprecision::abs(
                                            boost::multiprecision::numerator(c)));
    ld = ld / boost::multiprecision::gcd(ld, boost::multiprecision::denominator(c)) *
         boost::multiprecision::denominator(c);
  }
  if (gn == 0) return Rat(1);
  return Rat(gn, ld);
}

inline const std::pair<const Mono, Rat>& poly_leading(const Poly& p) {
  return *p.rbegin();
}

// Exact multivariate division; nullopt when the division is not exact.
inline std::optional<Poly> poly_exact_divide(NfContext& scratch, Poly n, const Poly& d) {
  if (poly_is_zero(d)) return std::nullopt;
  Poly q;
  while (!poly_is_zero(n)) {
    auto& [mn, cn] = poly_leading(n);
    auto& [md, cd] = poly_leading(d);
    // divide leading monomials
    Mono mq;
    size_t i = 0, j = 0;
    bool ok = true;
    while (j < md.size()) {
      if (i >= mn.size()) { ok = false; break; }
      int c = cmp(mn[i].first, md[j].first);
      if (c < 0) {
        mq.push_back(mn[i]);
        ++i;
      } else if (c > 0) {
        ok = false;
        break;
      } else {
        if (mn[i].second < md[j].second) { ok = false; break; }
        if (mn[i].second > md[j].second)
          mq.push_back({mn[i].first, mn[i].second - md[j].second});
        ++i;
        ++j;
      }
    }
    if (!ok) return std::nullopt;
    for (; i < mn.size(); ++i) mq.push_back(mn[i]);
    Rat cq = cn / cd;
    poly_add_term(q, mq, cq);
    Poly tq;
    poly_add_term(tq, mq, cq);
    n = poly_add(n, poly_neg(scratch.poly_mul(tq, d)));
  }
  return q;
}

struct Frac {
  Poly num;
  Poly den;  // never zero
};

ExprPtr poly_to_expr(const Poly& p);
ExprPtr frac_to_expr(const Frac& f);

inline bool frac_is_negative(const Frac& f) {
  if (poly_is_zero(f.num)) return false;
  return poly_leading(f.num).second < 0;
}

class Simplifier {
 public:
  ExprPtr run(const ExprPtr& e) {
    Frac f = normalize(to_frac(e));
    return frac_to_expr(f);
  }

  Frac to_frac(const ExprPtr& e);
  Frac normalize(Frac f);

 private:
  NfContext ctx_;

  Frac frac_add(const Frac& a, const Frac& b) {
    Frac r;
    r.num = poly_add(ctx_.poly_mul(a.num, b.den), ctx_.poly_mul(b.num, a.den));
    r.den = ctx_.poly_mul(a.den, b.den);
    return r;
  }
  Frac frac_mul(const Frac& a, const Frac& b) {
    return Frac{ctx_.poly_mul(a.num, b.num), ctx_.poly_mul(a.den, b.den)};
  }
  Frac frac_recip(const Frac& a) {
    if (poly_is_zero(a.num)) throw expr_error("division by zero in simplification");
    return Frac{a.den, a.num};
  }
  Frac frac_pow(Frac a, long long n) {
    if (n < 0) {
      a = frac_recip(a);
      n = -n;
    }
    return Frac{ctx_.poly_pow(a.num, n), ctx_.poly_pow(a.den, n)};
  }
  Frac frac_neg(const Frac& a) { return Frac{poly_neg(a.num), a.den}; }

  // base^(p/q) with 0 < p < q, for a polynomial base
  Frac radical_of_poly(const Poly& base, long long p, long long q);
  Frac radical_of_frac(const Frac& f, long long p, long long q) {
    return frac_mul(radical_of_poly(f.num, p, q), frac_recip(radical_of_poly(f.den, p, q)));
  }

  ExprPtr kernel(Func fn, const ExprPtr& canon_arg) {
    return apply(fn, canon_arg);
  }
};

// exact rational q-th root if it exists
inline std::optional<Rat> rational_root(const Rat& c, long long q) {
  if (c < 0) return std::nullopt;
  using boost::multiprecision::cpp_int;
  auto iroot = [&](const cpp_int& v) -> std::optional<cpp_int> {
    if (v == 0 || v == 1) return v;
    cpp_int lo = 1, hi = v;
    while (lo < hi) {
      cpp_int mid = (lo + hi) / 2;
      cpp_int mp = 1;
      bool over = false;
      for (long long i = 0; i < q; ++i) {
        mp *= mid;
        if (mp > v) { over = true; break; }
      }
      if (over) hi = mid;
      else if (mp == v) return mid;
      else lo = mid + 1;
    }
    cpp_int mp = 1;
    for (long long i = 0; i < q; ++i) mp *= lo;
    if (mp == v) return lo;
    return std::nullopt;
  };
  auto rn = iroot(boost::multiprecision::numerator(c));
  auto rd = iroot(boost::multiprecision::denominator(c));
  if (rn && rd) return Rat(*rn, *rd);
  return std::nullopt;
}

inline Frac Simplifier::radical_of_poly(const Poly& base, long long p, long long q) {
  if (poly_is_zero(base)) return Frac{poly_const(0), poly_const(1)};
  Rat content = poly_content(base);
  Poly prim = poly_scale(base, 1 / content);
  Frac result{poly_const(1), poly_const(1)};
  // pull the q-th root of the content out when it is exact
  if (auto root = rational_root(content, q)) {
    result.num = poly_const(1);
    Frac cpart{poly_const(1), poly_const(1)};
    Rat rp = 1;
    for (long long i = 0; i < p; ++i) rp *= *root;
    cpart.num = poly_const(rp);
    result = cpart;
  } else {
    ExprPtr catom = pow(num(content), Rat(1, q));
    ctx_.radical_base.emplace(catom, poly_const(content));
    Poly m = poly_atom(catom);
    result = Frac{ctx_.poly_pow(m, p), poly_const(1)};
  }
  if (poly_is_const(prim)) {
    // prim is 1 after content extraction
    return result;
  }
  ExprPtr atom = pow(poly_to_expr(prim), Rat(1, q));
  ctx_.radical_base.emplace(atom, prim);
  Poly pa = ctx_.poly_pow(poly_atom(atom), p);
  return frac_mul(result, Frac{pa, poly_const(1)});
}

inline Frac Simplifier::to_frac(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Num:
      return Frac{poly_const(e->value), poly_const(1)};
    case Kind::Param:
    case Kind::Lambda:
    case Kind::Jet:
    case Kind::Act:
    case Kind::Fac:
      return Frac{poly_atom(e), poly_const(1)};
    case Kind::Add: {
      Frac r{poly_const(0), poly_const(1)};
      for (auto& k : e->kids) r = frac_add(r, to_frac(k));
      return r;
    }
    case Kind::Mul: {
      Frac r{poly_const(1), poly_const(1)};
      for (auto& k : e->kids) r = frac_mul(r, to_frac(k));
      return r;
    }
    case Kind::Pow: {
      Frac f = normalize(to_frac(e->kids[0]));
      const Rat& r = e->value;
      using boost::multiprecision::cpp_int;
      cpp_int nn = boost::multiprecision::numerator(r);
      cpp_int dd = boost::multiprecision::denominator(r);
      if (dd == 1) return frac_pow(f, nn.convert_to<long long>());
      long long q = dd.convert_to<long long>();
      cpp_int fl = nn >= 0 ? cpp_int(nn / dd) : cpp_int(-((-nn + dd - 1) / dd));  // floor(n/d)
      long long m = fl.convert_to<long long>();
      long long p = (nn - fl * dd).convert_to<long long>();  // 0 < p < q
      Frac intpart = frac_pow(f, m);
      return frac_mul(intpart, radical_of_frac(f, p, q));
    }
    case Kind::Apply: {
      Frac fa = normalize(to_frac(e->kids[0]));
      ExprPtr canon = frac_to_expr(fa);
      // kernel inverse pairs
      if (e->fn == Func::Exp && canon->kind == Kind::Apply && canon->fn == Func::Ln)
        return to_frac(canon->kids[0]);
      if (e->fn == Func::Ln && canon->kind == Kind::Apply && canon->fn == Func::Exp)
        return to_frac(canon->kids[0]);
      if (is_num(canon)) {
        const Rat& v = canon->value;
        if (v == 0) {
          switch (e->fn) {
            case Func::Exp: case Func::Cos: case Func::Cosh:
              return Frac{poly_const(1), poly_const(1)};
            case Func::Sin: case Func::Sinh: case Func::Arctan: case Func::Arctanh:
              return Frac{poly_const(0), poly_const(1)};
            default: break;
          }
        }
        if (v == 1 && e->fn == Func::Ln) return Frac{poly_const(0), poly_const(1)};
      }
      // sign-canonical arguments: exp(-u) = 1/exp(u), odd/even symmetry
      bool negative = frac_is_negative(fa);
      if (negative) {
        ExprPtr pos = frac_to_expr(Frac{poly_neg(fa.num), fa.den});
        switch (e->fn) {
          case Func::Exp:
            return frac_recip(Frac{poly_atom(kernel(Func::Exp, pos)), poly_const(1)});
          case Func::Cos:
          case Func::Cosh:
            return Frac{poly_atom(kernel(e->fn, pos)), poly_const(1)};
          case Func::Sin:
          case Func::Sinh:
          case Func::Arctan:
          case Func::Arctanh:
            return frac_neg(Frac{poly_atom(kernel(e->fn, pos)), poly_const(1)});
          case Func::Ln:
            break;  // ln keeps its argument's sign
        }
      }
      return Frac{poly_atom(kernel(e->fn, canon)), poly_const(1)};
    }
  }
  throw expr_error("bad node");
}

inline Frac Simplifier::normalize(Frac f) {
  if (poly_is_zero(f.den)) throw expr_error("zero denominator in simplification");
  if (poly_is_zero(f.num)) return Frac{poly_const(0), poly_const(1)};

  // cancel common monomial factor
  auto common = [](const Poly& p) {
    Mono g = p.begin()->first;
    for (auto& [m, c] : p) {
      Mono ng;
      size_t i = 0, j = 0;
      while (i < g.size() && j < m.size()) {
        int cc = cmp(g[i].first, m[j].first);
        if (cc < 0) ++i;
        else if (cc > 0) ++j;
        else {
          ng.push_back({g[i].first, std::min(g[i].second, m[j].second)});
          ++i; ++j;
        }
      }
      g = std::move(ng);
      if (g.empty()) break;
    }
    return g;
  };
  auto strip = [](const Poly& p, const Mono& g) {
    if (g.empty()) return p;
    Poly r;
    for (auto& [m, c] : p) {
      Mono nm;
      size_t i = 0, j = 0;
      while (i < m.size()) {
        if (j < g.size() && equal(m[i].first, g[j].first)) {
          int rem = m[i].second - g[j].second;
          if (rem > 0) nm.push_back({m[i].first, rem});
          ++i; ++j;
        } else {
          nm.push_back(m[i]);
          ++i;
        }
      }
      r[nm] = c;
    }
    return r;
  };
  Mono gn = common(f.num), gd = common(f.den);
  Mono g;
  size_t i = 0, j = 0;
  while (i < gn.size() && j < gd.size()) {
    int c = cmp(gn[i].first, gd[j].first);
    if (c < 0) ++i;
    else if (c > 0) ++j;
    else {
      g.push_back({gn[i].first, std::min(gn[i].second, gd[j].second)});
      ++i; ++j;
    }
  }
  f.num = strip(f.num, g);
  f.den = strip(f.den, g);

  // rationalize single-monomial radical denominators
  bool changed = true;
  while (changed && f.den.size() == 1) {
    changed = false;
    const Mono& dm = f.den.begin()->first;
    for (auto& [a, k] : dm) {
      auto it = ctx_.radical_base.find(a);
      if (it == ctx_.radical_base.end()) continue;
      long long q = boost::multiprecision::denominator(a->value).convert_to<long long>();
      int lift = static_cast<int>(q - (k % q));
      if (lift == static_cast<int>(q)) continue;
      Poly s;
      poly_add_term(s, Mono{{a, lift}}, Rat(1));
      f.num = ctx_.poly_mul(f.num, s);
      f.den = ctx_.poly_mul(f.den, s);
      changed = true;
      break;
    }
  }

  // exact cancellation
  if (auto quo = poly_exact_divide(ctx_, f.num, f.den)) {
    f.num = std::move(*quo);
    f.den = poly_const(1);
  } else if (auto rq = poly_exact_divide(ctx_, f.den, f.num)) {
    if (!poly_is_const(*rq)) {
      f.num = poly_const(1);
      f.den = std::move(*rq);
    }
  }

  // scale so the denominator is primitive with positive leading coefficient
  Rat c = poly_content(f.den);
  if (poly_leading(f.den).second < 0) c = -c;
  if (c != 1) {
    f.num = poly_scale(f.num, 1 / c);
    f.den = poly_scale(f.den, 1 / c);
  }
  return f;
}

inline ExprPtr poly_to_expr(const Poly& p) {
  if (poly_is_zero(p)) return zero();
  std::vector<ExprPtr> terms;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    std::vector<ExprPtr> factors;
    if (it->second != 1 || it->first.empty()) factors.push_back(num(it->second));
    for (auto& [a, e] : it->first) factors.push_back(e == 1 ? a : pow(a, e));
    terms.push_back(mul(std::move(factors)));
  }
  return add(std::move(terms));
}

inline ExprPtr frac_to_expr(const Frac& f) {
  ExprPtr n = poly_to_expr(f.num);
  if (poly_is_const(f.den) && !f.den.empty() && f.den.begin()->second == 1) return n;
  return div(n, poly_to_expr(f.den));
}

}  // namespace detail

// Best-effort normal form; idempotent, guarantees syntactic zero for
// polynomial and rational identities over the kernel functions.
inline ExprPtr simplify(const ExprPtr& e) {
  detail::Simplifier s;
  return s.run(e);
}

inline bool is_zero_expr(const ExprPtr& e) { return is_zero(simplify(e)); }

}  // namespace hgf
