#pragma once

// Invariantized variational calculus: rewriting a group-invariant problem in
// the generating differential invariants, the invariant Euler-Lagrange system
// obtained through the adjoint of the syzygy operator matrix, the boundary
// ledger and structured conserved quantities, the derivative rewrite of the
// integrating factor, and the branch analysis for the three-dimensional
// Lorentz action.

#include <hgf/expr.hpp>
#include <hgf/frames.hpp>
#include <hgf/herglotz.hpp>
#include <hgf/simplify.hpp>

#include <random>
#include <stdexcept>

namespace hgf {

struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantProblem {
  GroupAction action;
  int order = 1;                     // highest lambda-order of invariant jets
  ExprPtr lagrangian;                // in the generating invariants and A
  std::vector<ExprPtr> constraints;  // in the generating invariants
  std::set<std::string> params;

  HerglotzProblem as_herglotz() const {
    return {action.invariants, order, lagrangian, constraints, params};
  }
};

namespace detail {

inline int max_invariant_order(const GroupAction& a, const ExprPtr& e) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  int order = 0;
  for (auto& v : vars) {
    if (v.kind != Kind::Jet) continue;
    for (auto& name : a.invariants)
      if (v.name == name) order = std::max(order, v.lam);
  }
  return order;
}

inline bool uses_invariant(const GroupAction& a, const ExprPtr& e,
                           const std::string& name) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  for (auto& v : vars)
    if (v.kind == Kind::Jet && v.name == name) return true;
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// From coordinates to invariants

// Numeric precheck that the Lagrangian is unchanged under the prolonged
// action, then rewrite it through the invariantized jets.
inline InvariantProblem invariantize_problem(const HerglotzProblem& p,
                                             const GroupAction& a) {
  std::mt19937 rng(137);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  Params params;
  for (auto& name : p.params) params[name] = 0.3;
  for (int trial = 0; trial < 20; ++trial) {
    JetPoint pt;
    pt.lambda = 0.4;
    pt.A = 0.7;
    for (size_t i = 0; i < a.dim(); ++i)
      for (int k = 0; k <= p.order; ++k) pt.set(a.deps[i], k, U(rng));
    pt.set(a.deps[0], 0, 2.0 + U(rng));
    pt.set(a.deps[0], 1, 1.5 + U(rng));
    GroupElement g = a.name == "iso11"
                         ? iso11_element(U(rng), U(rng), U(rng))
                         : so12_element(U(rng), U(rng), U(rng));
    double v0 = eval(p.lagrangian, pt, params);
    double v1 = eval(p.lagrangian, act(a, g, pt, p.order), params);
    if (std::abs(v1 - v0) > 1e-9 * (1 + std::abs(v0)))
      throw invariant_error("Lagrangian is not invariant under the group action");
  }
  InvariantProblem ip;
  ip.action = a;
  ip.lagrangian = replacement(a, p.lagrangian);
  for (auto& g : p.constraints) ip.constraints.push_back(replacement(a, g));
  ip.params = p.params;
  ip.order = detail::max_invariant_order(a, ip.lagrangian);
  for (auto& g : ip.constraints)
    ip.order = std::max(ip.order, detail::max_invariant_order(a, g));
  ip.order = std::max(ip.order, 1);
  return ip;
}

// Weighted Euler operator in the invariant variables, with any constraint
// multipliers folded in.
inline ExprPtr invariant_euler_operator(const InvariantProblem& ip, size_t j) {
  return modified_euler_operator(ip.as_herglotz(), j);
}

// ---------------------------------------------------------------------------
// Invariant Euler-Lagrange system through the adjoint syzygy operators

namespace detail {

// adjoint of sum_k c_k D^k applied to v: sum_k (-1)^k D^k(c_k v)
inline ExprPtr adjoint_apply(const DiffOp& op, const ExprPtr& v) {
  if (is_zero(simplify(v))) return zero();
  std::vector<ExprPtr> terms;
  for (size_t k = 0; k < op.coef.size(); ++k) {
    if (is_zero(op.coef[k])) continue;
    ExprPtr t = mul(op.coef[k], v);
    for (size_t i = 0; i < k; ++i) t = total_derivative(t);
    if (k % 2 == 1) t = neg(t);
    terms.push_back(t);
  }
  return terms.empty() ? zero() : add(std::move(terms));
}

}  // namespace detail

struct InvariantELSystem {
  InvariantProblem problem;
  std::vector<ExprPtr> invariant_euler;  // one per syzygy-table row
  std::vector<ExprPtr> equations;        // one per coordinate variable
};

inline InvariantELSystem invariant_EL_system(const InvariantProblem& ip) {
  SyzygyTable table = syzygies(ip.action);
  HerglotzProblem hp = ip.as_herglotz();
  // every invariant the Lagrangian depends on must own a syzygy row
  ExprPtr Laug = effective_lagrangian(hp);
  for (auto& name : ip.action.invariants) {
    bool used = detail::uses_invariant(ip.action, Laug, name);
    bool has_row = false;
    for (auto& r : table.invariants) has_row = has_row || r == name;
    if (used && !has_row)
      throw invariant_error("no syzygy row for invariant " + name);
  }
  InvariantELSystem sys;
  sys.problem = ip;
  std::map<std::string, ExprPtr> euler;
  for (auto& name : table.invariants) {
    size_t idx = 0;
    while (ip.action.invariants[idx] != name) ++idx;
    ExprPtr e = invariant_euler_operator(ip, idx);
    euler[name] = e;
    sys.invariant_euler.push_back(e);
  }
  for (size_t alpha = 0; alpha < ip.action.dim(); ++alpha) {
    std::vector<ExprPtr> terms;
    for (size_t j = 0; j < table.invariants.size(); ++j)
      terms.push_back(detail::adjoint_apply(table.rows[j][alpha],
                                            euler[table.invariants[j]]));
    ExprPtr raw = add(std::move(terms));
    sys.equations.push_back(simplify(expand_markers(raw, Laug)));
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Boundary ledger and structured conserved quantities

// One ledger entry is the coefficient of the variation invariant I^alpha_{K nu}
// in the boundary term of the first variation.
struct BoundaryEntry {
  std::string dep;    // alpha, a coordinate variable of the action
  int order = 0;      // K, the lambda-order attached to the nu-slot
  ExprPtr coefficient;
};

struct ConservedStructure {
  std::vector<BoundaryEntry> ledger;  // the vector C
  std::vector<ExprPtr> upsilon;       // Omega(I) * C, one entry per generator
};

inline ConservedStructure structured_conserved_quantities(const InvariantProblem& ip) {
  SyzygyTable table = syzygies(ip.action);
  HerglotzProblem hp = ip.as_herglotz();
  ExprPtr Laug = effective_lagrangian(hp);

  std::map<std::pair<std::string, int>, ExprPtr> acc;
  auto put = [&](const std::string& dep, int K, const ExprPtr& c) {
    auto key = std::make_pair(dep, K);
    auto it = acc.find(key);
    acc[key] = it == acc.end() ? c : add(it->second, c);
  };

  // first pass of integration by parts: boundary terms carrying D_nu of a
  // generating invariant, distributed through its syzygy row
  for (size_t j = 0; j < table.invariants.size(); ++j) {
    const std::string& name = table.invariants[j];
    for (int m = 1; m <= ip.order; ++m) {
      ExprPtr dL = simplify(partial(Laug, jet_id(name, m)));
      if (is_zero(dL)) continue;
      for (int l = 1; l <= m; ++l) {
        ExprPtr B = mul(factor(), dL);
        for (int i = 0; i < l - 1; ++i) B = total_derivative(B);
        if (l % 2 == 0) B = neg(B);
        if (m - l > 0)
          throw invariant_error(
              "boundary terms with derivatives of the syzygy are not supported");
        for (size_t alpha = 0; alpha < ip.action.dim(); ++alpha) {
          const DiffOp& op = table.rows[j][alpha];
          for (size_t k = 0; k < op.coef.size(); ++k)
            if (!is_zero(op.coef[k]))
              put(ip.action.deps[alpha], static_cast<int>(k), mul(B, op.coef[k]));
        }
      }
    }
  }

  // second pass: boundary terms from moving the syzygy operators off the
  // variation invariants
  for (size_t j = 0; j < table.invariants.size(); ++j) {
    size_t idx = 0;
    while (ip.action.invariants[idx] != table.invariants[j]) ++idx;
    ExprPtr v = invariant_euler_operator(ip, idx);
    if (is_zero(v)) continue;
    for (size_t alpha = 0; alpha < ip.action.dim(); ++alpha) {
      const DiffOp& op = table.rows[j][alpha];
      for (size_t k = 1; k < op.coef.size(); ++k) {
        if (is_zero(op.coef[k])) continue;
        for (size_t l = 1; l <= k; ++l) {
          ExprPtr B = mul(op.coef[k], v);
          for (size_t i = 0; i < l - 1; ++i) B = total_derivative(B);
          if (l % 2 == 0) B = neg(B);
          put(ip.action.deps[alpha], static_cast<int>(k - l), B);
        }
      }
    }
  }

  ConservedStructure cs;
  int maxK = 0;
  for (auto& [key, c] : acc) maxK = std::max(maxK, key.second);
  auto W = infinitesimals_sym(ip.action, maxK);
  cs.upsilon.assign(ip.action.generators(), zero());
  for (auto& [key, c] : acc) {
    ExprPtr coef = simplify(expand_markers(c, Laug));
    if (is_zero(coef)) continue;
    cs.ledger.push_back({key.first, key.second, coef});
    size_t var = 0;
    while (ip.action.deps[var] != key.first) ++var;
    size_t col = var * (maxK + 1) + key.second;
    for (size_t i = 0; i < cs.upsilon.size(); ++i) {
      ExprPtr w = replacement(ip.action, W[i][col]);
      if (!is_zero(w)) cs.upsilon[i] = add(cs.upsilon[i], mul(w, coef));
    }
  }
  for (auto& u : cs.upsilon) u = simplify(expand_markers(u, Laug));
  return cs;
}

// ---------------------------------------------------------------------------
// Numeric conserved vector Ad(rho)^{-1} * upsilon along coordinate trajectories

// Bind the invariant jets reachable from a coordinate jet point.
inline JetPoint invariant_point(const GroupAction& a, const JetPoint& p) {
  JetPoint q;
  q.lambda = p.lambda;
  q.A = p.A;
  q.F = p.F;
  for (auto& [key, val] : p.jets) {
    bool dep = false;
    for (auto& d : a.deps) dep = dep || d == std::get<0>(key);
    if (!dep) q.jets[key] = val;  // multipliers ride along unchanged
  }
  int maxlam = 1;
  for (auto& d : a.deps)
    while (p.has(d, maxlam + 1)) ++maxlam;
  JetPoint n = invariantize(a, p, maxlam);
  if (a.name == "iso11") {
    double eta = n.get("t", 1);
    q.set("eta", 0, eta);
    if (n.has("t", 2)) q.set("eta", 1, n.get("t", 2));
    if (n.has("x", 2)) q.set("kappa", 0, n.get("x", 2) / (eta * eta));
  } else {
    double tau = n.get("t", 0);
    q.set("tau", 0, tau);
    q.set("tau", 1, n.get("t", 1));
    q.set("h", 0, n.get("x", 1));
    if (n.has("x", 2)) {
      double h = n.get("x", 1);
      q.set("tau", 2, n.get("t", 2) - h * h / tau);
      q.set("chi", 0, n.get("y", 2));
    }
  }
  return q;
}

inline std::vector<double> conserved_vector(const InvariantProblem& ip,
                                            const ConservedStructure& cs,
                                            const JetPoint& p, const Params& params) {
  JetPoint iq = invariant_point(ip.action, p);
  detail::Mat Minv = detail::inverse(adjoint_rep(ip.action, frame(ip.action, p)));
  std::vector<double> out(cs.upsilon.size(), 0.0);
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t j = 0; j < cs.upsilon.size(); ++j)
      out[i] += Minv[i][j] * eval(cs.upsilon[j], iq, params);
  return out;
}

// ---------------------------------------------------------------------------
// Derivative rewrite of the integrating factor: D^l F = F * G_l(I)

inline ExprPtr f_derivative_rewrite(const InvariantProblem& ip, int ell) {
  if (ell < 1) throw invariant_error("derivative order must be at least 1");
  ExprPtr Q = action_coefficient(ip.lagrangian);
  ExprPtr G = neg(Q);
  for (int l = 1; l < ell; ++l) G = add(mul(neg(Q), G), total_derivative(G));
  return simplify(G);
}

// ---------------------------------------------------------------------------
// Branch analysis for the three-dimensional Lorentz action

struct BranchReport {
  std::string condition;      // "chi != 0" or "chi == 0"
  ExprPtr multiplier;         // mu in terms of the invariant Euler operators
  ExprPtr reduced_lhs;        // D_lambda(...) side of the reduced equation
  ExprPtr reduced_rhs;
  std::vector<ExprPtr> upsilon;
};

inline std::vector<BranchReport> so12_branch_analysis(const InvariantProblem& ip) {
  if (ip.action.name != "so12")
    throw invariant_error("branch analysis applies to the so12 action only");
  if (detail::uses_invariant(ip.action, ip.lagrangian, "chi"))
    throw invariant_error("branch analysis requires a chi-free Lagrangian");
  if (ip.constraints.size() != 1)
    throw invariant_error("branch analysis requires the arclength constraint");

  // unconstrained invariant Euler operators
  InvariantProblem bare = ip;
  bare.constraints.clear();
  ExprPtr Eh = invariant_euler_operator(bare, 1);
  ExprPtr Etau = invariant_euler_operator(bare, 0);
  const ExprPtr& R = ip.constraints[0];
  ExprPtr dRdh = simplify(partial(R, jet_id("h", 0)));
  ExprPtr tau = jet("tau", 0), tau1 = jet("tau", 1), h = jet("h", 0);
  ExprPtr k1 = var(param_id("k1"));
  ExprPtr Laug = effective_lagrangian(ip.as_herglotz());

  auto close = [&](ExprPtr e) { return simplify(expand_markers(e, Laug)); };

  BranchReport moving;  // chi != 0: trivial conservation laws
  moving.condition = "chi != 0";
  moving.multiplier = close(div(Eh, mul(factor(), dRdh)));
  moving.reduced_lhs = close(total_derivative(mul(div(tau1, h), Eh)));
  moving.reduced_rhs = close(Etau);
  moving.upsilon = {zero(), zero(), zero()};

  BranchReport planar;  // chi == 0
  planar.condition = "chi == 0";
  planar.multiplier = close(div(sub(mul(tau, Eh), k1), mul(tau, mul(factor(), dRdh))));
  planar.reduced_lhs =
      close(total_derivative(sub(mul(div(tau1, h), Eh), div(mul(k1, tau1), mul(tau, h)))));
  planar.reduced_rhs = close(add(Etau, div(mul(k1, h), pow(tau, 2))));
  planar.upsilon = {zero(), zero(), neg(k1)};

  return {moving, planar};
}

}  // namespace hgf
