#pragma once

// Generalized variational machinery in original coordinates: integrating
// factor, weighted Euler operators, generalized Euler-Lagrange equations,
// conserved quantities, and Lagrange-multiplier augmentation.

#include <hgf/expr.hpp>
#include <hgf/simplify.hpp>

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hgf {

struct herglotz_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HerglotzProblem {
  std::vector<std::string> deps;
  int order = 1;
  ExprPtr lagrangian;                 // may reference A and F
  std::vector<ExprPtr> constraints;   // each A-free and F-free
  std::set<std::string> params;
};

struct IntegratingFactor {
  ExprPtr Q;                          // dL/dA
  std::optional<ExprPtr> closed_form; // expression in l and params only
  bool ode_form = false;              // F must be integrated alongside
};

namespace detail {

inline bool has_var_kind(const ExprPtr& e, Kind k) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  for (auto& v : vars)
    if (v.kind == k) return true;
  return false;
}

inline bool has_jet_vars(const ExprPtr& e) { return has_var_kind(e, Kind::Jet); }

}  // namespace detail

inline ExprPtr action_coefficient(const ExprPtr& L) {
  ExprPtr Q = simplify(partial(L, action_id()));
  if (!is_zero(simplify(partial(Q, action_id()))))
    throw herglotz_error("Lagrangian is not affine in A");
  return Q;
}

// Rewrite the symbolic markers D^k(A) and D^k(F), k >= 1, using
// dA/dl = L and dF/dl = -Q*F.  The result contains only A and F themselves.
inline ExprPtr expand_markers(const ExprPtr& e, const ExprPtr& L) {
  ExprPtr Q = action_coefficient(L);
  std::map<int, ExprPtr> act_cache, fac_cache;
  act_cache[0] = action();
  fac_cache[0] = factor();

  std::function<ExprPtr(const ExprPtr&)> walk;
  auto act_order = [&](int k, auto&& self) -> ExprPtr {
    auto it = act_cache.find(k);
    if (it != act_cache.end()) return it->second;
    // order 1 is L itself (markers there are all order 0, so no walk needed)
    ExprPtr r = k == 1 ? L : walk(total_derivative(self(k - 1, self)));
    act_cache[k] = r;
    return r;
  };
  auto fac_order = [&](int k, auto&& self) -> ExprPtr {
    auto it = fac_cache.find(k);
    if (it != fac_cache.end()) return it->second;
    ExprPtr r = k == 1 ? mul(neg(Q), factor())
                       : walk(total_derivative(self(k - 1, self)));
    fac_cache[k] = r;
    return r;
  };
  walk = [&](const ExprPtr& x) -> ExprPtr {
    switch (x->kind) {
      case Kind::Act:
        return x->lam == 0 ? x : act_order(x->lam, act_order);
      case Kind::Fac:
        return x->lam == 0 ? x : fac_order(x->lam, fac_order);
      case Kind::Add:
      case Kind::Mul: {
        std::vector<ExprPtr> kids;
        kids.reserve(x->kids.size());
        for (auto& k : x->kids) kids.push_back(walk(k));
        return x->kind == Kind::Add ? add(std::move(kids)) : mul(std::move(kids));
      }
      case Kind::Pow:
        return pow(walk(x->kids[0]), x->value);
      case Kind::Apply:
        return apply(x->fn, walk(x->kids[0]));
      default:
        return x;
    }
  };
  return walk(e);
}

inline IntegratingFactor make_integrating_factor(const HerglotzProblem& p) {
  IntegratingFactor f;
  f.Q = action_coefficient(p.lagrangian);
  if (is_zero(f.Q)) {
    f.closed_form = one();
  } else if (!detail::has_jet_vars(f.Q) && !detail::has_var_kind(f.Q, Kind::Act)) {
    if (!depends_on(f.Q, lambda_id())) {
      f.closed_form = simplify(exp(mul(neg(f.Q), lambda())));
    } else {
      // Q(l) polynomial in l integrates term by term; anything else stays an ODE
      ExprPtr s = simplify(f.Q);
      std::function<std::optional<ExprPtr>(const ExprPtr&)> integ =
          [&](const ExprPtr& x) -> std::optional<ExprPtr> {
        if (x->kind == Kind::Num) return mul(x, lambda());
        if (x->kind == Kind::Lambda) return mul(num(1, 2), pow(lambda(), 2));
        if (x->kind == Kind::Param) return mul(x, lambda());
        if (x->kind == Kind::Add) {
          std::vector<ExprPtr> terms;
          for (auto& k : x->kids) {
            auto t = integ(k);
            if (!t) return std::nullopt;
            terms.push_back(*t);
          }
          return add(std::move(terms));
        }
        if (x->kind == Kind::Mul) {
          // constant * l^k
          std::vector<ExprPtr> consts;
          ExprPtr lpow;
          for (auto& k : x->kids) {
            bool free = !depends_on(k, lambda_id());
            if (free) {
              consts.push_back(k);
            } else if (!lpow) {
              lpow = k;
            } else {
              return std::nullopt;
            }
          }
          if (!lpow) return mul(std::move(consts));
          auto base = integ(lpow);
          if (!base) return std::nullopt;
          consts.push_back(*base);
          return mul(std::move(consts));
        }
        if (x->kind == Kind::Pow && x->kids[0]->kind == Kind::Lambda &&
            boost::multiprecision::denominator(x->value) == 1 && x->value > 0) {
          Rat k = x->value;
          return mul(num(Rat(1) / (k + 1)), pow(lambda(), k + 1));
        }
        return std::nullopt;
      };
      auto anti = integ(s);
      if (anti)
        f.closed_form = simplify(exp(neg(*anti)));
      else
        f.ode_form = true;
    }
  } else {
    f.ode_form = true;
  }
  return f;
}

inline ExprPtr nth_total_derivative(ExprPtr e, int k) {
  for (int i = 0; i < k; ++i) e = total_derivative(e);
  return e;
}

inline ExprPtr effective_lagrangian(const HerglotzProblem& p) {
  ExprPtr L = p.lagrangian;
  // L - sum_i mu_i * g_i, with each multiplier a fresh dependent variable
  for (size_t i = 0; i < p.constraints.size(); ++i)
    L = sub(L, mul(jet("mu" + std::to_string(i + 1), 0), p.constraints[i]));
  return L;
}

inline HerglotzProblem augment_with_constraints(const HerglotzProblem& p) {
  if (p.constraints.empty()) return p;
  HerglotzProblem q = p;
  q.lagrangian = effective_lagrangian(p);
  for (size_t i = 0; i < p.constraints.size(); ++i)
    q.deps.push_back("mu" + std::to_string(i + 1));
  q.constraints.clear();
  return q;
}

inline ExprPtr modified_euler_operator(const HerglotzProblem& p, size_t alpha) {
  const HerglotzProblem q = augment_with_constraints(p);
  if (alpha >= q.deps.size()) throw herglotz_error("dependent-variable index out of range");
  const ExprPtr& L = q.lagrangian;
  const std::string& name = q.deps[alpha];
  std::vector<ExprPtr> terms;
  for (int k = 0; k <= q.order; ++k) {
    ExprPtr dLdu = partial(L, jet_id(name, k));
    if (is_zero(simplify(dLdu))) continue;
    ExprPtr t = nth_total_derivative(mul(factor(), dLdu), k);
    if (k % 2 == 1) t = neg(t);
    terms.push_back(t);
  }
  ExprPtr raw = terms.empty() ? zero() : add(std::move(terms));
  return simplify(expand_markers(raw, L));
}

struct ELSystem {
  HerglotzProblem augmented;
  std::vector<ExprPtr> equations;   // E^alpha_F(L), each == 0 on extremals
  ExprPtr action_rhs;               // dA/dl = L
  IntegratingFactor factor;
};

inline ELSystem generalized_EL_system(const HerglotzProblem& p) {
  ELSystem sys;
  sys.augmented = augment_with_constraints(p);
  sys.factor = make_integrating_factor(sys.augmented);
  for (size_t a = 0; a < sys.augmented.deps.size(); ++a)
    sys.equations.push_back(modified_euler_operator(sys.augmented, a));
  sys.action_rhs = sys.augmented.lagrangian;
  return sys;
}

// Boundary term of the variational identity: constant along extremals when
// phi is the characteristic of a symmetry fixing l.
inline ExprPtr noether_conserved_quantity(const HerglotzProblem& p,
                                          const std::vector<ExprPtr>& phi) {
  const HerglotzProblem q = augment_with_constraints(p);
  if (phi.size() < p.deps.size())
    throw herglotz_error("one characteristic per dependent variable required");
  const ExprPtr& L = q.lagrangian;
  std::vector<ExprPtr> terms;
  for (size_t a = 0; a < p.deps.size(); ++a) {
    for (int j = 1; j <= q.order; ++j) {
      ExprPtr dLdu = partial(L, jet_id(p.deps[a], j));
      if (is_zero(simplify(dLdu))) continue;
      for (int k = 1; k <= j; ++k) {
        ExprPtr t = mul(nth_total_derivative(mul(factor(), dLdu), k - 1),
                        nth_total_derivative(phi[a], j - k));
        if (k % 2 == 0) t = neg(t);
        terms.push_back(t);
      }
    }
  }
  ExprPtr raw = terms.empty() ? zero() : add(std::move(terms));
  return simplify(expand_markers(raw, L));
}

// Jacobian determinant of the constraints with respect to chosen jet
// variables, evaluated numerically.  m = 0 returns 1.
inline double check_regularity(const HerglotzProblem& p, const JetPoint& point,
                               const std::vector<VarId>& chosen,
                               const Params& params = {}) {
  size_t m = p.constraints.size();
  if (chosen.size() != m) throw herglotz_error("need one chosen variable per constraint");
  if (m == 0) return 1.0;
  std::vector<std::vector<double>> J(m, std::vector<double>(m));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j)
      J[i][j] = eval(partial(p.constraints[i], chosen[j]), point, params);
  // Gaussian elimination determinant
  double det = 1.0;
  for (size_t c = 0; c < m; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < m; ++r)
      if (std::abs(J[r][c]) > std::abs(J[piv][c])) piv = r;
    if (J[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(J[piv], J[c]);
      det = -det;
    }
    det *= J[c][c];
    for (size_t r = c + 1; r < m; ++r) {
      double f = J[r][c] / J[c][c];
      for (size_t k = c; k < m; ++k) J[r][k] -= f * J[c][k];
    }
  }
  return det;
}

// True when every monomial of e has total degree exactly 1 in F, so dividing
// by F is a legal rewrite (substituting F -> 1).
inline bool linear_in_factor(const ExprPtr& e) {
  ExprPtr euler = simplify(sub(mul(factor(), partial(e, factor_id())), e));
  return is_zero(euler);
}

inline ExprPtr strip_integrating_factor(const ExprPtr& e) {
  ExprPtr s = simplify(e);
  if (is_zero(s)) return s;
  if (!linear_in_factor(s)) return s;
  return simplify(substitute(s, {{factor_id(), one()}}));
}

}  // namespace hgf
