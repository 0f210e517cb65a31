#pragma once

// Independent numeric oracles: finite-difference first variation, invariance
// sampling, syzygy checks on analytic two-parameter families, and conserved
// quantity drift reports.  None of these rely on the symbolic derivation
// machinery they are used to cross-check: the first variation integrates the
// action functional directly, and the syzygy checks work purely through
// invariantization of jet points.

#include <hgf/expr.hpp>
#include <hgf/frames.hpp>
#include <hgf/herglotz.hpp>
#include <hgf/io.hpp>
#include <hgf/solver.hpp>

#include <json.hpp>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace hgf {

// ---------------------------------------------------------------------------
// Closed forms of the generating invariants in the coordinate jets

inline ExprPtr invariant_closed_form(const GroupAction& a, const std::string& name) {
  ParseContext ctx;
  ctx.deps = a.deps;
  if (a.name == "iso11") {
    if (name == "eta") return parse("sqrt(t'^2 - x'^2)", ctx);
    if (name == "kappa") return parse("(t'*x'' - x'*t'')/(t'^2 - x'^2)^(3/2)", ctx);
  } else {
    if (name == "tau") return parse("sqrt(t^2 - x^2 - y^2)", ctx);
    if (name == "h")
      return parse(
          "sqrt((y*t' - t*y')^2 + (t*x' - x*t')^2 - (x*y' - y*x')^2)"
          "/sqrt(t^2 - x^2 - y^2)",
          ctx);
    if (name == "chi")
      return parse(
          "(t*(x'*y'' - y'*x'') - x*(t'*y'' - y'*t'') + y*(t'*x'' - x'*t''))"
          "/sqrt((y*t' - t*y')^2 + (t*x' - x*t')^2 - (x*y' - y*x')^2)",
          ctx);
  }
  throw frames_error("no closed form catalogued for invariant " + name);
}

// ---------------------------------------------------------------------------
// First variation by direct perturbation of the action integral

struct VariationResult {
  double fd = 0;           // central difference of F(lbar) * A(lbar)
  double quadrature = 0;   // integral of F * sum dL/du_K * phi_K
  double discrepancy = 0;
  double scale = 1;        // 1 + max |u| along the base curve
};

// Polynomial bump (l-l0)^2 (l1-l)^2 with unit maximum.  Vanishing value and
// first derivative at l0 and l1 keep every boundary term of problems up to
// order two out of the identity.  Being a polynomial it is NOT zero outside
// [l0, l1]: span the full integration interval, and modulate by further
// polynomials to generate independent variations.
inline ExprPtr bump_profile(double l0, double l1) {
  ExprPtr l = lambda();
  auto c = [](double v) {
    // exact decimal -> rational
    return num(Rat(static_cast<long long>(std::llround(v * 1e6)), 1000000));
  };
  ExprPtr up = mul(pow(sub(l, c(l0)), 2), pow(sub(c(l1), l), 2));
  double mid = (l1 - l0) / 2;
  double peak = mid * mid * mid * mid;
  return mul(num(Rat(1000000, static_cast<long long>(std::llround(peak * 1e6)))), up);
}

// phi: one expression in l per dependent variable (compactly supported in
// (l0, l1)); base supplies the coordinate jets of the reference curve.
inline VariationResult first_variation_oracle(
    const HerglotzProblem& p, const Params& params,
    const std::function<JetPoint(double)>& base, double l0, double l1,
    const std::vector<ExprPtr>& phi, double eps = 0) {
  if (phi.size() != p.deps.size())
    throw solver_error("one variation per dependent variable required");
  std::vector<std::vector<ExprPtr>> phi_k(p.deps.size());
  for (size_t a = 0; a < p.deps.size(); ++a) {
    ExprPtr d = phi[a];
    for (int k = 0; k <= p.order; ++k) {
      phi_k[a].push_back(d);
      d = total_derivative(d);
    }
  }
  ExprPtr Q = simplify(partial(p.lagrangian, action_id()));

  VariationResult out;
  for (double l = l0; l <= l1 + 1e-12; l += (l1 - l0) / 64)
    for (auto& dep : p.deps)
      out.scale = std::max(out.scale, 1 + std::abs(base(l).get(dep, 0)));
  if (eps <= 0) eps = 1e-5 * out.scale;

  auto perturbed = [&](double l, double s) {
    JetPoint pt = base(l);
    JetPoint probe;
    probe.lambda = l;
    for (size_t a = 0; a < p.deps.size(); ++a)
      for (int k = 0; k <= p.order; ++k)
        pt.set(p.deps[a], k, pt.get(p.deps[a], k) + s * eval(phi_k[a][k], probe));
    return pt;
  };

  RKOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  opt.max_step = (l1 - l0) / 64;

  // A along the perturbed curves, and (A, F) along the base curve
  auto action_end = [&](double s) {
    auto rhs = [&](double l, const std::vector<double>& y) {
      JetPoint pt = perturbed(l, s);
      pt.A = y[0];
      return std::vector<double>{eval(p.lagrangian, pt, params)};
    };
    return rk45(rhs, {0.0}, l0, l1, opt).states.back()[0];
  };
  double Aplus = action_end(eps), Aminus = action_end(-eps);

  // base state: y = (A, F, quad)
  std::vector<ExprPtr> dL;
  for (size_t a = 0; a < p.deps.size(); ++a)
    for (int k = 0; k <= p.order; ++k)
      dL.push_back(simplify(partial(p.lagrangian, jet_id(p.deps[a], k))));
  auto rhs = [&](double l, const std::vector<double>& y) {
    JetPoint pt = base(l);
    pt.lambda = l;
    pt.A = y[0];
    pt.F = y[1];
    double sum = 0;
    size_t idx = 0;
    JetPoint probe;
    probe.lambda = l;
    for (size_t a = 0; a < p.deps.size(); ++a)
      for (int k = 0; k <= p.order; ++k, ++idx) {
        if (is_zero(dL[idx])) continue;
        sum += eval(dL[idx], pt, params) * eval(phi_k[a][k], probe);
      }
    return std::vector<double>{eval(p.lagrangian, pt, params),
                               -eval(Q, pt, params) * y[1], y[1] * sum};
  };
  auto end = rk45(rhs, {0.0, 1.0, 0.0}, l0, l1, opt).states.back();
  double Fbar = end[1];

  out.fd = Fbar * (Aplus - Aminus) / (2 * eps);
  out.quadrature = end[2];
  out.discrepancy = std::abs(out.fd - out.quadrature);
  return out;
}

inline VariationResult first_variation_oracle(const HerglotzProblem& p,
                                              const Params& params,
                                              const Trajectory& base,
                                              const std::vector<ExprPtr>& phi,
                                              double eps = 0) {
  double l0 = base.path.grid.front(), l1 = base.path.grid.back();
  return first_variation_oracle(
      p, params, [&](double l) { return base.point_at(l); }, l0, l1, phi, eps);
}

// ---------------------------------------------------------------------------
// Invariance sampling

inline JetPoint random_domain_point(const GroupAction& a, std::mt19937& rng,
                                    int max_lam) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int guard = 0; guard < 1000; ++guard) {
    JetPoint p;
    for (size_t i = 0; i < a.dim(); ++i)
      for (int k = 0; k <= max_lam; ++k) p.set(a.deps[i], k, U(rng));
    p.set(a.deps[0], 0, 2.0 + U(rng));
    p.set(a.deps[0], 1, 1.5 + U(rng));
    try {
      frame(a, p);
      // keep well away from the domain boundary, where the invariants lose
      // relative accuracy
      if (invariant_value(a, a.name == "iso11" ? "eta" : "h", p) < 0.2) continue;
      return p;
    } catch (const domain_error&) {
      continue;
    }
  }
  throw frames_error("could not sample a frame-domain point");
}

inline GroupElement random_bounded_element(const GroupAction& a, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  if (a.name == "iso11") return iso11_element(U(rng), 2 * U(rng), 2 * U(rng));
  return so12_element(U(rng), U(rng), U(rng));
}

inline double invariance_check(const GroupAction& a, const ExprPtr& e, int trials,
                               unsigned seed = 0) {
  int max_lam = 0;
  {
    std::set<VarId> vars;
    collect_vars(e, vars);
    for (auto& v : vars)
      if (v.kind == Kind::Jet) max_lam = std::max(max_lam, v.lam);
  }
  std::mt19937 rng(seed + 1);
  double worst = 0;
  int done = 0, guard = 0;
  while (done < trials && ++guard < 100 * trials) {
    JetPoint p = random_domain_point(a, rng, std::max(max_lam, 1));
    GroupElement g = random_bounded_element(a, rng);
    try {
      double v0 = eval(e, p);
      double v1 = eval(e, act(a, g, p, max_lam));
      worst = std::max(worst, std::abs(v1 - v0) / (1 + std::abs(v0)));
      ++done;
    } catch (const domain_error&) {
      continue;  // sample left the expression's own domain; resample
    }
  }
  if (done < trials) throw frames_error("invariance sampling exhausted its budget");
  return worst;
}

// ---------------------------------------------------------------------------
// Syzygy checks on analytic two-parameter families

// at(l, nu) must bind lambda-jets to max_lam and the mixed nu-slot jets the
// generating invariants reach (lambda-order + 1 more for operator coefficients).
struct AnalyticFamily {
  std::function<JetPoint(double, double)> at;
  int max_lam = 3;
  double nu0 = 0.0;
  std::vector<double> grid = {0.4, 0.8, 1.2};
};

// Built-in analytic families with hand-coded jets, one per action: a
// quadratic-in-nu reparametrization for the plane action and a boosted ray
// for the three-variable one.
inline AnalyticFamily default_family(const GroupAction& a) {
  AnalyticFamily f;
  if (a.name == "iso11") {
    f.nu0 = 0.05;
    f.at = [](double l, double nu) {
      JetPoint p;
      p.lambda = l;
      p.set("t", 0, l + nu * l * l);
      p.set("t", 1, 1 + 2 * nu * l);
      p.set("t", 2, 2 * nu);
      p.set("t", 3, 0.0);
      p.set("x", 0, 0.1 * l + nu * l * l * l);
      p.set("x", 1, 0.1 + 3 * nu * l * l);
      p.set("x", 2, 6 * nu * l);
      p.set("x", 3, 6 * nu);
      p.set("t", 0, l * l, 1);
      p.set("t", 1, 2 * l, 1);
      p.set("t", 2, 2.0, 1);
      p.set("t", 3, 0.0, 1);
      p.set("x", 0, l * l * l, 1);
      p.set("x", 1, 3 * l * l, 1);
      p.set("x", 2, 6 * l, 1);
      p.set("x", 3, 6.0, 1);
      return p;
    };
  } else {
    f.nu0 = 0.3;
    f.at = [](double l, double nu) {
      double c = std::cosh(nu), s = std::sinh(nu);
      JetPoint p;
      p.lambda = l;
      p.set("t", 0, c * (1 + l));
      p.set("t", 1, c);
      p.set("x", 0, 0.1 * s * (1 + l));
      p.set("x", 1, 0.1 * s);
      p.set("y", 0, 0.05 * l);
      p.set("y", 1, 0.05);
      p.set("t", 0, s * (1 + l), 1);
      p.set("t", 1, s, 1);
      p.set("x", 0, 0.1 * c * (1 + l), 1);
      p.set("x", 1, 0.1 * c, 1);
      p.set("y", 0, 0.0, 1);
      p.set("y", 1, 0.0, 1);
      for (auto dep : {"t", "x", "y"})
        for (int k = 2; k <= 3; ++k)
          for (int nu_ord = 0; nu_ord <= 1; ++nu_ord) p.set(dep, k, 0.0, nu_ord);
      return p;
    };
  }
  return f;
}

namespace detail {

// exact D_nu of a closed-form invariant through the chain rule with the
// family's mixed jets
inline double exact_nu_derivative(const ExprPtr& K, const JetPoint& pt) {
  std::set<VarId> vars;
  collect_vars(K, vars);
  double sum = 0;
  for (auto& v : vars) {
    if (v.kind != Kind::Jet) continue;
    sum += eval(partial(K, v), pt) * pt.get(v.name, v.lam, 1);
  }
  return sum;
}

// high-order central differences along lambda of a scalar family function
inline double lambda_derivative(const std::function<double(double)>& f, double l,
                                int order) {
  double s = 0.01;
  if (order == 0) return f(l);
  if (order == 1)
    return (f(l - 2 * s) - 8 * f(l - s) + 8 * f(l + s) - f(l + 2 * s)) / (12 * s);
  return (-f(l - 2 * s) + 16 * f(l - s) - 30 * f(l) + 16 * f(l + s) - f(l + 2 * s)) /
         (12 * s * s);
}

}  // namespace detail

// Residuals of D_nu K_j = sum_alpha H[j][alpha](I^alpha_nu), one per table row.
inline std::vector<double> syzygy_check(const GroupAction& a,
                                        const AnalyticFamily& family) {
  SyzygyTable table = syzygies(a);
  std::vector<ExprPtr> closed;
  std::map<std::string, ExprPtr> closed_by_name;
  for (auto& name : a.invariants)
    closed_by_name[name] = invariant_closed_form(a, name);
  for (auto& name : table.invariants) closed.push_back(closed_by_name[name]);

  std::vector<double> residuals(table.invariants.size(), 0.0);
  for (double l : family.grid) {
    JetPoint pt = family.at(l, family.nu0);
    // invariant jets needed by the operator coefficients
    JetPoint iq;
    iq.lambda = l;
    for (auto& [name, K] : closed_by_name) {
      ExprPtr d = K;
      for (int k = 0; k <= 2; ++k) {
        try {
          iq.set(name, k, eval(d, pt));
        } catch (const expr_error&) {
          break;  // family does not carry enough jets for this order
        }
        d = total_derivative(d);
      }
    }
    for (size_t j = 0; j < table.invariants.size(); ++j) {
      double lhs = detail::exact_nu_derivative(closed[j], pt);
      double rhs = 0;
      for (size_t alpha = 0; alpha < a.dim(); ++alpha) {
        const DiffOp& op = table.rows[j][alpha];
        for (size_t k = 0; k < op.coef.size(); ++k) {
          if (is_zero(op.coef[k])) continue;
          auto Inu = [&](double ll) {
            return invariantize(a, family.at(ll, family.nu0), 1, 1)
                .get(a.deps[alpha], 0, 1);
          };
          rhs += eval(op.coef[k], iq) *
                 detail::lambda_derivative(Inu, l, static_cast<int>(k));
        }
      }
      residuals[j] = std::max(residuals[j], std::abs(lhs - rhs));
    }
  }
  return residuals;
}

// ---------------------------------------------------------------------------
// Conservation drift

struct NamedQuantity {
  std::string name;
  std::function<double(const JetPoint&)> value;
};

struct DriftEntry {
  std::string name;
  double drift = 0;
  bool pass = false;
};

struct ConservationReport {
  std::vector<DriftEntry> entries;
  double tolerance = 0;
  bool pass = true;
};

inline ConservationReport conservation_report(const Trajectory& traj,
                                              const std::vector<NamedQuantity>& qs) {
  ConservationReport rep;
  rep.tolerance = 100 * (traj.rtol + traj.atol);
  for (auto& q : qs) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (size_t k = 0; k < traj.samples(); ++k) {
      double v = q.value(traj.point(k));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    DriftEntry e{q.name, hi - lo, hi - lo <= rep.tolerance};
    rep.pass = rep.pass && e.pass;
    rep.entries.push_back(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON reporting

struct CheckResult {
  std::string check;
  nlohmann::json params;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
};

inline nlohmann::json to_json(const CheckResult& r) {
  return {{"check", r.check},
          {"params", r.params},
          {"residual", r.residual},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

inline nlohmann::json to_json(const std::vector<CheckResult>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& r : rs) arr.push_back(to_json(r));
  return arr;
}

}  // namespace hgf
