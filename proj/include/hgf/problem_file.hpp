#pragma once

// Line-oriented `key: value` problem files and the derivation/solve/check
// plumbing behind the command-line tool.

#include <hgf/frames.hpp>
#include <hgf/herglotz.hpp>
#include <hgf/invariant_el.hpp>
#include <hgf/io.hpp>
#include <hgf/solver.hpp>
#include <hgf/verify.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hgf {

struct problem_file_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemFile {
  std::string name;
  std::string group;  // "iso11", "so12" or empty
  std::vector<std::string> vars;
  int order = 1;
  std::string lagrangian_text;
  std::vector<std::string> constraint_texts;
  std::map<std::string, std::string> param_texts;  // kept textual for exact render
  BoundaryData init;
  BoundaryData final_data;
  double span0 = 0, span1 = 1;
  double rtol = 1e-10;
  double atol = 1e-12;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace detail

inline ProblemFile parse_problem_file(std::istream& in) {
  ProblemFile pf;
  std::string line;
  int lineno = 0;
  bool have_lagrangian = false;
  auto fail = [&](const std::string& msg) {
    throw problem_file_error("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t colon = s.find(':');
    if (colon == std::string::npos) fail("expected `key: value`");
    std::string key = detail::trim(s.substr(0, colon));
    std::string val = detail::trim(s.substr(colon + 1));
    if (key == "name") {
      pf.name = val;
    } else if (key == "group") {
      if (val != "iso11" && val != "so12" && val != "none")
        fail("group must be iso11, so12 or none");
      pf.group = val == "none" ? "" : val;
    } else if (key == "vars") {
      pf.vars = detail::split_ws(val);
      if (pf.vars.empty()) fail("vars needs at least one variable");
    } else if (key == "order") {
      try {
        pf.order = std::stoi(val);
      } catch (...) {
        fail("order must be an integer");
      }
      if (pf.order < 1 || pf.order > 4) fail("order must be in 1..4");
    } else if (key == "lagrangian") {
      pf.lagrangian_text = val;
      have_lagrangian = true;
    } else if (key == "constraint") {
      pf.constraint_texts.push_back(val);
    } else if (key == "param") {
      size_t eq = val.find('=');
      if (eq == std::string::npos) fail("param needs `name = value`");
      std::string pname = detail::trim(val.substr(0, eq));
      std::string pval = detail::trim(val.substr(eq + 1));
      if (pname.empty() || pval.empty()) fail("param needs `name = value`");
      pf.param_texts[pname] = pval;
    } else if (key == "init" || key == "final") {
      size_t eq = val.find('=');
      if (eq == std::string::npos) fail(key + " needs `var = value`");
      std::string vname = detail::trim(val.substr(0, eq));
      std::string vval = detail::trim(val.substr(eq + 1));
      try {
        (key == "init" ? pf.init : pf.final_data)[vname] = std::stod(vval);
      } catch (...) {
        fail(key + " value must be numeric");
      }
    } else if (key == "span") {
      auto parts = detail::split_ws(val);
      if (parts.size() != 2) fail("span needs two endpoints");
      try {
        pf.span0 = std::stod(parts[0]);
        pf.span1 = std::stod(parts[1]);
      } catch (...) {
        fail("span endpoints must be numeric");
      }
      if (!(pf.span1 > pf.span0)) fail("span must be increasing");
    } else if (key == "rtol") {
      try {
        pf.rtol = std::stod(val);
      } catch (...) {
        fail("rtol must be numeric");
      }
    } else if (key == "atol") {
      try {
        pf.atol = std::stod(val);
      } catch (...) {
        fail("atol must be numeric");
      }
    } else {
      fail("unknown key `" + key + "`");
    }
  }
  if (pf.vars.empty()) throw problem_file_error("missing `vars`");
  if (!have_lagrangian) throw problem_file_error("missing `lagrangian`");
  return pf;
}

inline ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw problem_file_error("cannot open " + path);
  return parse_problem_file(in);
}

// A file with a group is either posed in the action's coordinate variables or
// directly in its generating invariants.
inline bool invariant_posed(const ProblemFile& pf, const GroupAction& a) {
  for (auto& v : pf.vars) {
    bool inv = false;
    for (auto& n : a.invariants) inv = inv || n == v;
    if (!inv) return false;
  }
  return true;
}

inline HerglotzProblem to_herglotz(const ProblemFile& pf) {
  ParseContext ctx;
  ctx.deps = pf.vars;
  for (auto& [k, v] : pf.param_texts) ctx.params.insert(k);
  HerglotzProblem p;
  p.deps = pf.vars;
  p.order = pf.order;
  try {
    p.lagrangian = parse(pf.lagrangian_text, ctx);
    for (auto& g : pf.constraint_texts) p.constraints.push_back(parse(g, ctx));
  } catch (const parse_error& e) {
    throw problem_file_error(std::string("expression error: ") + e.what());
  }
  for (auto& [k, v] : pf.param_texts) p.params.insert(k);
  if (!pf.group.empty()) {
    GroupAction a = action_by_name(pf.group);
    if (pf.vars != a.deps && !invariant_posed(pf, a))
      throw problem_file_error("vars match neither the coordinates nor the "
                               "invariants of group " + pf.group);
  }
  return p;
}

inline Params numeric_params(const ProblemFile& pf) {
  Params out;
  for (auto& [k, v] : pf.param_texts) out[k] = std::stod(v);
  return out;
}

// exact-rational parameter values for symbolic substitution
inline std::map<VarId, ExprPtr> symbolic_params(const ProblemFile& pf) {
  std::map<VarId, ExprPtr> out;
  ParseContext ctx;
  for (auto& [k, v] : pf.param_texts) out[param_id(k)] = parse(v, ctx);
  return out;
}

// ---------------------------------------------------------------------------
// Equation rendering

namespace detail {

inline ExprPtr positive_leading(const ExprPtr& e) {
  ExprPtr s = simplify(e);
  const ExprPtr& head = s->kind == Kind::Add && !s->kids.empty() ? s->kids[0] : s;
  if (term_is_negative(head)) return simplify(neg(s));
  return s;
}

// When Q = dL/dA is a constant, F has the closed form exp(-Q*l); returns
// nullptr otherwise.
inline ExprPtr closed_form_factor(const ExprPtr& L,
                                  const std::map<VarId, ExprPtr>& par) {
  ExprPtr Q = simplify(substitute(action_coefficient(L), par));
  if (is_zero(Q)) return one();
  if (!is_num(Q)) return nullptr;
  return exp(mul(num(-Q->value), lambda()));
}

// Rewrites the integrating-factor marker to its closed form and orders each
// product for display: numeric coefficient, the exponential factor, then the
// remaining factors by ascending power.  Works on an already-simplified
// expression and must not be re-simplified afterwards.
inline ExprPtr display_with_factor(const ExprPtr& e, const ExprPtr& Fform) {
  if (e->kind == Kind::Fac && e->lam == 0 && Fform) return Fform;
  if (e->kind == Kind::Add) {
    std::vector<ExprPtr> kids;
    for (auto& k : e->kids) kids.push_back(display_with_factor(k, Fform));
    return add(std::move(kids));
  }
  if (e->kind == Kind::Pow)
    return pow(display_with_factor(e->kids[0], Fform), e->value);
  if (e->kind == Kind::Apply)
    return apply(e->fn, display_with_factor(e->kids[0], Fform));
  if (e->kind != Kind::Mul) return e;
  std::vector<ExprPtr> nums, fac, rest;
  for (auto& k : e->kids) {
    ExprPtr t = display_with_factor(k, Fform);
    if (is_num(t))
      nums.push_back(t);
    else if (k->kind == Kind::Fac && k->lam == 0)
      fac.push_back(t);
    else
      rest.push_back(t);
  }
  auto expo = [](const ExprPtr& t) {
    using boost::multiprecision::denominator;
    if (t->kind == Kind::Pow && denominator(t->value) == 1 && t->value > 0)
      return to_double(t->value);
    return 1.0;
  };
  std::stable_sort(rest.begin(), rest.end(),
                   [&](const ExprPtr& a, const ExprPtr& b) { return expo(a) < expo(b); });
  std::vector<ExprPtr> kids;
  for (auto& v : {nums, fac, rest})
    for (auto& t : v) kids.push_back(t);
  return mul(std::move(kids));
}

}  // namespace detail

inline std::string render_coordinate_el(const ProblemFile& pf) {
  HerglotzProblem p = to_herglotz(pf);
  auto par = symbolic_params(pf);
  std::string out;
  for (size_t a = 0; a < p.deps.size(); ++a) {
    ExprPtr e = strip_integrating_factor(modified_euler_operator(p, a));
    e = detail::positive_leading(substitute(e, par));
    if (!out.empty()) out += "; ";
    out += render(e) + " = 0";
  }
  return out;
}

inline InvariantProblem to_invariant_problem(const ProblemFile& pf) {
  if (pf.group.empty()) throw problem_file_error("problem has no group");
  GroupAction a = action_by_name(pf.group);
  HerglotzProblem p = to_herglotz(pf);
  if (invariant_posed(pf, a)) {
    InvariantProblem ip;
    ip.action = a;
    ip.order = pf.order;
    ip.lagrangian = p.lagrangian;
    ip.constraints = p.constraints;
    ip.params = p.params;
    return ip;
  }
  return invariantize_problem(p, a);
}

// Renders the invariantized equations without expanding the outer total
// derivatives, one term per syzygy-table entry.
inline std::string render_invariant_el(const ProblemFile& pf) {
  InvariantProblem ip = to_invariant_problem(pf);
  HerglotzProblem hp = ip.as_herglotz();
  ExprPtr Laug = effective_lagrangian(hp);
  auto par = symbolic_params(pf);
  ExprPtr Fform = detail::closed_form_factor(simplify(substitute(Laug, par)), {});
  auto finish = [&](const ExprPtr& e) {
    ExprPtr s = simplify(substitute(simplify(expand_markers(e, Laug)), par));
    return is_zero(s) ? s : detail::display_with_factor(s, Fform);
  };

  SyzygyTable table = syzygies(ip.action);
  std::vector<ExprPtr> ehat(table.invariants.size());
  for (size_t j = 0; j < table.invariants.size(); ++j) {
    size_t idx = 0;
    while (ip.action.invariants[idx] != table.invariants[j]) ++idx;
    ehat[j] = invariant_euler_operator(ip, idx);
  }

  std::string out;
  for (size_t alpha = 0; alpha < ip.action.dim(); ++alpha) {
    std::string eq;
    for (size_t j = 0; j < table.invariants.size(); ++j) {
      const DiffOp& op = table.rows[j][alpha];
      for (size_t k = 0; k < op.coef.size(); ++k) {
        if (is_zero(op.coef[k])) continue;
        ExprPtr inner = finish(mul(op.coef[k], ehat[j]));
        if (is_zero(inner)) continue;
        bool negative = k % 2 == 1;
        std::string piece = render(inner);
        if (k == 1)
          piece = "D_l(" + piece + ")";
        else if (k >= 2)
          piece = "D_l^" + std::to_string(k) + "(" + piece + ")";
        if (eq.empty())
          eq = (negative ? "-" : "") + piece;
        else
          eq += (negative ? " - " : " + ") + piece;
      }
    }
    if (eq.empty()) eq = "0";
    if (!out.empty()) out += "; ";
    out += eq + " = 0";
  }
  return out;
}

inline std::string render_conserved(const ProblemFile& pf) {
  InvariantProblem ip = to_invariant_problem(pf);
  HerglotzProblem hp = ip.as_herglotz();
  ExprPtr Laug = effective_lagrangian(hp);
  auto par = symbolic_params(pf);
  ExprPtr Fform = detail::closed_form_factor(simplify(substitute(Laug, par)), {});
  ConservedStructure cs = structured_conserved_quantities(ip);
  std::string out = "(";
  for (size_t i = 0; i < cs.upsilon.size(); ++i) {
    ExprPtr s = simplify(substitute(cs.upsilon[i], par));
    if (!is_zero(s)) s = detail::display_with_factor(s, Fform);
    if (i) out += ", ";
    out += render(s);
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// Check suites

inline std::vector<CheckResult> run_checks(const ProblemFile& pf,
                                           const std::string& suite,
                                           unsigned seed) {
  std::vector<CheckResult> out;
  bool all = suite == "all";
  auto skipped = [&](const std::string& check, const std::string& why) {
    CheckResult r;
    r.check = check;
    r.params = {{"status", "skipped"}, {"reason", why}};
    r.pass = true;
    out.push_back(r);
  };

  HerglotzProblem p = to_herglotz(pf);
  Params params = numeric_params(pf);
  // surfaces the affineness guard before any suite runs
  action_coefficient(effective_lagrangian(p));

  if (all || suite == "frames") {
    if (pf.group.empty()) {
      skipped("frames", "no group");
    } else {
      GroupAction a = action_by_name(pf.group);
      for (auto& name : a.invariants) {
        CheckResult r;
        r.check = "frames";
        r.params = {{"invariant", name}, {"trials", 100}, {"seed", seed}};
        r.residual = invariance_check(a, invariant_closed_form(a, name), 100, seed);
        r.tolerance = 1e-9;
        r.pass = r.residual <= r.tolerance;
        out.push_back(r);
      }
      std::mt19937 rng(seed + 7);
      double worst = 0;
      for (int i = 0; i < 20; ++i) {
        GroupElement g = random_bounded_element(a, rng);
        JetPoint pt = random_domain_point(a, rng, 2);
        worst = std::max(worst, adjoint_identity_residual(a, g, pt, 2));
      }
      CheckResult r;
      r.check = "frames";
      r.params = {{"identity", "adjoint"}, {"trials", 20}, {"seed", seed}};
      r.residual = worst;
      r.tolerance = a.name == "iso11" ? 1e-10 : 1e-9;
      r.pass = r.residual <= r.tolerance;
      out.push_back(r);
    }
  }

  if (all || suite == "variation") {
    if (!p.constraints.empty()) {
      skipped("variation", "constrained problem");
    } else if (pf.init.empty()) {
      skipped("variation", "no initial data");
    } else {
      Trajectory tr = solve_extremal(p, params, pf.init, {}, pf.span0, pf.span1,
                                     {pf.rtol, pf.atol});
      ExprPtr b = bump_profile(pf.span0, pf.span1);
      double width = pf.span1 - pf.span0;
      ExprPtr s01 = mul(pow(num(Rat(static_cast<long long>(
                            std::llround(width * 1e6)), 1000000)), -1),
                        sub(lambda(), num(Rat(static_cast<long long>(
                            std::llround(pf.span0 * 1e6)), 1000000))));
      std::vector<ExprPtr> mods{one(), s01, pow(s01, 2), sub(one(), s01),
                                mul(s01, sub(one(), s01))};
      double worst = 0, scale = 1;
      for (auto& m : mods) {
        ExprPtr phi = mul(b, m);
        std::vector<ExprPtr> phis;
        for (size_t i = 0; i < p.deps.size(); ++i)
          phis.push_back(i % 2 ? mul(num(1, 2), phi) : phi);
        VariationResult r = first_variation_oracle(p, params, tr, phis);
        worst = std::max(worst, std::abs(r.fd) / r.scale);
        scale = r.scale;
      }
      CheckResult r;
      r.check = "variation";
      r.params = {{"bumps", 5}, {"scale", scale}};
      r.residual = worst;
      r.tolerance = 1e-8;
      r.pass = r.residual <= r.tolerance;
      out.push_back(r);
    }
  }

  if (all || suite == "syzygy") {
    if (pf.group.empty()) {
      skipped("syzygy", "no group");
    } else {
      GroupAction a = action_by_name(pf.group);
      std::vector<double> res = syzygy_check(a, default_family(a));
      for (size_t j = 0; j < res.size(); ++j) {
        CheckResult r;
        r.check = "syzygy";
        r.params = {{"row", j}, {"family", "builtin"}};
        r.residual = res[j];
        r.tolerance = 1e-6;
        r.pass = r.residual <= r.tolerance;
        out.push_back(r);
      }
    }
  }

  if (all || suite == "conservation") {
    GroupAction a{};
    bool coordinate = false;
    if (!pf.group.empty()) {
      a = action_by_name(pf.group);
      coordinate = pf.vars == a.deps;
    }
    if (!coordinate) {
      skipped("conservation", "needs a coordinate-posed group problem");
    } else if (pf.init.empty()) {
      skipped("conservation", "no initial data");
    } else {
      Trajectory tr = solve_extremal(p, params, pf.init, {}, pf.span0, pf.span1,
                                     {pf.rtol, pf.atol});
      InvariantProblem ip = invariantize_problem(p, a);
      ConservedStructure cs = structured_conserved_quantities(ip);
      std::vector<double> lo(cs.upsilon.size(), 1e300), hi(cs.upsilon.size(), -1e300);
      for (size_t k = 0; k < tr.samples(); ++k) {
        std::vector<double> c = conserved_vector(ip, cs, tr.point(k), params);
        for (size_t i = 0; i < c.size(); ++i) {
          lo[i] = std::min(lo[i], c[i]);
          hi[i] = std::max(hi[i], c[i]);
        }
      }
      for (size_t i = 0; i < cs.upsilon.size(); ++i) {
        CheckResult r;
        r.check = "conservation";
        r.params = {{"component", i}};
        r.residual = hi[i] - lo[i];
        r.tolerance = 100 * (pf.rtol + pf.atol);
        r.pass = r.residual <= r.tolerance;
        out.push_back(r);
      }
    }
  }

  if (out.empty()) throw problem_file_error("unknown check suite `" + suite + "`");
  return out;
}

}  // namespace hgf
