#pragma once

// Numerical integration of extremal systems together with the action A and
// the integrating factor F; single shooting for two-point data; frame
// reconstruction from invariant solutions.

#include <hgf/herglotz.hpp>
#include <hgf/io.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hgf {

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                        std::vector<double> b) {
  size_t n = b.size();
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-300) throw solver_error("singular linear system");
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (size_t r = c + 1; r < n; ++r) {
      double f = A[r][c] / A[c][c];
      for (size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Generic adaptive embedded Runge-Kutta 5(4), Dormand-Prince coefficients,
// PI step-size control.  Steps are capped so the sample grid itself is dense;
// between-sample values use the cubic Hermite interpolant of each step.

struct RKOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  // called after each accepted step; may project the state
  std::function<void(double, std::vector<double>&)> postprocess;
};

struct RKResult {
  std::vector<double> grid;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> derivs;  // f(grid[k], states[k])

  std::vector<double> at(double l) const {
    if (grid.empty()) throw solver_error("empty trajectory");
    if (l <= grid.front()) return states.front();
    if (l >= grid.back()) return states.back();
    size_t hi = std::upper_bound(grid.begin(), grid.end(), l) - grid.begin();
    size_t lo = hi - 1;
    double h = grid[hi] - grid[lo];
    double s = (l - grid[lo]) / h;
    size_t n = states[lo].size();
    std::vector<double> y(n);
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    for (size_t i = 0; i < n; ++i)
      y[i] = h00 * states[lo][i] + h * h10 * derivs[lo][i] + h01 * states[hi][i] +
             h * h11 * derivs[hi][i];
    return y;
  }
};

template <class RHS>
RKResult rk45(RHS&& f, std::vector<double> y, double l0, double l1,
              const RKOptions& opt = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (l1 <= l0) throw solver_error("integration span must be increasing");
  size_t n = y.size();
  RKResult out;
  double l = l0;
  std::vector<double> k1 = f(l, y);
  out.grid.push_back(l);
  out.states.push_back(y);
  out.derivs.push_back(k1);

  double h = std::min({(l1 - l0) / 100.0, opt.max_step, 0.1});
  double err_prev = 1.0;
  int rejects_in_a_row = 0;
  auto axpy = [&](const std::vector<double>& base,
                  std::initializer_list<std::pair<double, const std::vector<double>*>> terms,
                  double hh) {
    std::vector<double> r = base;
    for (auto& [c, v] : terms)
      for (size_t i = 0; i < n; ++i) r[i] += hh * c * (*v)[i];
    return r;
  };

  while (l < l1) {
    if (l + h > l1) h = l1 - l;
    std::vector<double> k2 = f(l + c2 * h, axpy(y, {{a21, &k1}}, h));
    std::vector<double> k3 = f(l + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
    std::vector<double> k4 = f(l + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
    std::vector<double> k5 =
        f(l + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
    std::vector<double> k6 = f(
        l + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
    std::vector<double> y5 =
        axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
    std::vector<double> k7 = f(l + h, y5);

    double err = 0;
    for (size_t i = 0; i < n; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                      e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      double ratio = std::abs(e) / sc;
      if (!std::isfinite(y5[i]) || !std::isfinite(ratio))
        ratio = std::numeric_limits<double>::infinity();
      err = std::max(err, ratio);
    }
    if (err <= 1.0) {
      l += h;
      y = std::move(y5);
      k1 = std::move(k7);
      if (opt.postprocess) {
        opt.postprocess(l, y);
        k1 = f(l, y);  // state may have moved
      }
      out.grid.push_back(l);
      out.states.push_back(y);
      out.derivs.push_back(k1);
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2) *
                   std::pow(std::max(err_prev, 1e-10), 0.04);
      h *= std::min(5.0, std::max(0.2, fac));
      h = std::min(h, opt.max_step);
      err_prev = std::max(err, 1e-10);
      rejects_in_a_row = 0;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
      if (++rejects_in_a_row > 60 || h < 1e-14 * (1 + std::abs(l)))
        throw solver_error("step-size underflow");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// First-order ODE system built from a generalized EL system: states are the
// jets of each dependent variable up to order 2n-1, then the constraint
// multipliers, then A, then (when no closed form exists) F.

struct ODESystem {
  std::vector<std::string> deps;   // without multipliers
  std::vector<std::string> mults;
  int order = 1;                   // Lagrangian order n
  ExprPtr lagrangian;              // augmented, drives dA/dl
  ExprPtr Q;
  std::optional<ExprPtr> F_closed;
  std::vector<ExprPtr> constraints;
  Params params;

  std::vector<VarId> unknowns;               // u^a_{2n}, then mu_i'
  std::vector<std::vector<ExprPtr>> coef;    // per equation, per unknown
  std::vector<ExprPtr> resid;                // equation with unknowns at 0

  int jets_per_dep() const { return 2 * order; }
  size_t a_index() const { return deps.size() * jets_per_dep() + mults.size(); }
  size_t dim() const { return a_index() + 1 + (F_closed ? 0 : 1); }
  size_t slot(const std::string& dep, int k) const {
    for (size_t a = 0; a < deps.size(); ++a)
      if (deps[a] == dep) return a * jets_per_dep() + k;
    for (size_t i = 0; i < mults.size(); ++i)
      if (mults[i] == dep) return deps.size() * jets_per_dep() + i;
    throw solver_error("unknown state variable " + dep);
  }

  JetPoint point(double l, const std::vector<double>& y) const {
    JetPoint p;
    p.lambda = l;
    for (size_t a = 0; a < deps.size(); ++a) {
      for (int k = 0; k < jets_per_dep(); ++k)
        p.set(deps[a], k, y[a * jets_per_dep() + k]);
      p.set(deps[a], jets_per_dep(), 0.0);  // unknown slot, zeroed for residuals
    }
    for (size_t i = 0; i < mults.size(); ++i) {
      p.set(mults[i], 0, y[deps.size() * jets_per_dep() + i]);
      p.set(mults[i], 1, 0.0);
    }
    p.A = y[a_index()];
    p.F = F_closed ? eval(*F_closed, p, params) : y[a_index() + 1];
    return p;
  }

  std::vector<double> rhs(double l, const std::vector<double>& y) const {
    JetPoint p = point(l, y);
    size_t m = unknowns.size();
    std::vector<std::vector<double>> M(m, std::vector<double>(m));
    std::vector<double> r(m);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < m; ++j) M[i][j] = eval(coef[i][j], p, params);
      r[i] = -eval(resid[i], p, params);
    }
    std::vector<double> top = m ? solve_linear(std::move(M), std::move(r))
                                : std::vector<double>{};
    std::vector<double> dy(dim());
    for (size_t a = 0; a < deps.size(); ++a) {
      for (int k = 0; k + 1 < jets_per_dep(); ++k)
        dy[a * jets_per_dep() + k] = y[a * jets_per_dep() + k + 1];
      dy[a * jets_per_dep() + jets_per_dep() - 1] = top[a];
    }
    for (size_t i = 0; i < mults.size(); ++i)
      dy[deps.size() * jets_per_dep() + i] = top[deps.size() + i];
    dy[a_index()] = eval(lagrangian, p, params);
    if (!F_closed) dy[a_index() + 1] = -eval(Q, p, params) * p.F;
    return dy;
  }
};

inline int max_jet_order(const ExprPtr& e, const std::string& name) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  int m = -1;
  for (auto& v : vars)
    if (v.kind == Kind::Jet && v.name == name) m = std::max(m, v.lam);
  return m;
}

inline int max_jet_order(const ExprPtr& e) {
  std::set<VarId> vars;
  collect_vars(e, vars);
  int m = -1;
  for (auto& v : vars)
    if (v.kind == Kind::Jet) m = std::max(m, v.lam);
  return m;
}

inline ODESystem make_ode_system(const HerglotzProblem& p, Params params) {
  ELSystem el = generalized_EL_system(p);
  ODESystem sys;
  sys.order = p.order;
  sys.deps = p.deps;
  for (size_t i = 0; i < p.constraints.size(); ++i)
    sys.mults.push_back("mu" + std::to_string(i + 1));
  sys.lagrangian = el.augmented.lagrangian;
  sys.Q = el.factor.Q;
  sys.F_closed = el.factor.closed_form;
  sys.constraints = p.constraints;
  sys.params = std::move(params);

  int top = 2 * p.order;
  for (auto& d : sys.deps) sys.unknowns.push_back(jet_id(d, top));
  for (auto& m : sys.mults) sys.unknowns.push_back(jet_id(m, 1));

  std::vector<ExprPtr> eqs;
  for (size_t a = 0; a < sys.deps.size(); ++a)
    eqs.push_back(strip_integrating_factor(el.equations[a]));
  // multiplier rows: the constraint differentiated until the top jets appear
  for (auto& g : p.constraints) {
    int r = max_jet_order(g);
    if (r < 0) r = 0;
    eqs.push_back(simplify(nth_total_derivative(g, top - r)));
  }

  std::map<VarId, ExprPtr> zeros;
  for (auto& u : sys.unknowns) zeros[u] = zero();
  for (auto& e : eqs) {
    std::vector<ExprPtr> row;
    for (auto& u : sys.unknowns) {
      ExprPtr c = simplify(partial(e, u));
      for (auto& v : sys.unknowns)
        if (!is_zero(simplify(partial(c, v))))
          throw solver_error("equations are not affine in the top derivatives");
      row.push_back(substitute(c, zeros));
    }
    sys.coef.push_back(std::move(row));
    sys.resid.push_back(simplify(substitute(e, zeros)));
  }
  return sys;
}

// ---------------------------------------------------------------------------

struct Trajectory {
  ODESystem sys;
  RKResult path;
  double rtol = 0, atol = 0;

  double value(size_t k, const std::string& dep, int jet) const {
    return path.states[k][sys.slot(dep, jet)];
  }
  JetPoint point(size_t k) const { return sys.point(path.grid[k], path.states[k]); }
  JetPoint point_at(double l) const { return sys.point(l, path.at(l)); }
  size_t samples() const { return path.grid.size(); }
};

inline void project_constraints(const ODESystem& sys, double l, std::vector<double>& y) {
  if (sys.constraints.empty()) return;
  // Newton projection along the gradient, acting on the jet variables present
  std::vector<VarId> vars;
  {
    std::set<VarId> all;
    for (auto& g : sys.constraints) collect_vars(g, all);
    for (auto& v : all)
      if (v.kind == Kind::Jet && v.lam < sys.jets_per_dep()) vars.push_back(v);
  }
  for (int iter = 0; iter < 8; ++iter) {
    JetPoint p = sys.point(l, y);
    double worst = 0;
    for (auto& g : sys.constraints) {
      double gv = eval(g, p, sys.params);
      worst = std::max(worst, std::abs(gv));
      if (std::abs(gv) <= 1e-14) continue;
      double n2 = 0;
      std::vector<double> grad(vars.size());
      for (size_t j = 0; j < vars.size(); ++j) {
        grad[j] = eval(partial(g, vars[j]), p, sys.params);
        n2 += grad[j] * grad[j];
      }
      if (n2 < 1e-300) throw solver_error("constraint gradient vanished");
      for (size_t j = 0; j < vars.size(); ++j)
        y[sys.slot(vars[j].name, vars[j].lam)] -= gv * grad[j] / n2;
    }
    if (worst <= 1e-12) break;
  }
}

struct SolveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  size_t min_samples = 200;
};

inline Trajectory integrate(ODESystem sys, std::vector<double> init, double l0,
                            double l1, const SolveOptions& opt = {}) {
  RKOptions ro;
  ro.rtol = opt.rtol;
  ro.atol = opt.atol;
  ro.max_step = (l1 - l0) / static_cast<double>(opt.min_samples);
  const ODESystem* sp = &sys;
  if (!sys.constraints.empty())
    ro.postprocess = [sp](double l, std::vector<double>& y) {
      project_constraints(*sp, l, y);
    };
  Trajectory tr;
  tr.rtol = opt.rtol;
  tr.atol = opt.atol;
  tr.path = rk45([sp](double l, const std::vector<double>& y) { return sp->rhs(l, y); },
                 std::move(init), l0, l1, ro);
  tr.sys = std::move(sys);
  return tr;
}

// Initial/final data keyed by rendered state names: "t", "t'", "A", "F", "mu1".
using BoundaryData = std::map<std::string, double>;

inline size_t data_slot(const ODESystem& sys, const std::string& key) {
  if (key == "A") return sys.a_index();
  if (key == "F") {
    if (sys.F_closed) throw solver_error("F has a closed form; not a state");
    return sys.a_index() + 1;
  }
  std::string name = key;
  int jet = 0;
  while (!name.empty() && name.back() == '\'') {
    name.pop_back();
    ++jet;
  }
  auto lp = name.find('(');
  if (lp != std::string::npos) throw solver_error("bad boundary key " + key);
  return sys.slot(name, jet);
}

inline Trajectory solve_extremal(const HerglotzProblem& p, const Params& params,
                                 const BoundaryData& init, const BoundaryData& final_data,
                                 double l0, double l1, const SolveOptions& opt = {}) {
  ODESystem sys = make_ode_system(p, params);
  std::vector<double> y0(sys.dim(), 0.0);
  std::vector<bool> given(sys.dim(), false);
  for (auto& [k, v] : init) {
    size_t s = data_slot(sys, k);
    y0[s] = v;
    given[s] = true;
  }
  if (!sys.F_closed && !given[sys.a_index() + 1]) y0[sys.a_index() + 1] = 1.0;

  if (final_data.empty()) return integrate(sys, y0, l0, l1, opt);

  // single shooting on the ungiven jet slots
  std::vector<size_t> free_slots;
  for (size_t a = 0; a < sys.deps.size(); ++a)
    for (int k = 0; k < sys.jets_per_dep(); ++k) {
      size_t s = a * sys.jets_per_dep() + k;
      if (!given[s]) free_slots.push_back(s);
    }
  if (free_slots.size() < final_data.size()) throw solver_error("over-determined data");
  free_slots.resize(final_data.size());

  std::vector<std::pair<size_t, double>> targets;
  for (auto& [k, v] : final_data) targets.emplace_back(data_slot(sys, k), v);

  auto residual = [&](const std::vector<double>& guess) {
    std::vector<double> y = y0;
    for (size_t i = 0; i < guess.size(); ++i) y[free_slots[i]] = guess[i];
    Trajectory tr = integrate(sys, y, l0, l1, opt);
    std::vector<double> r(targets.size());
    for (size_t i = 0; i < targets.size(); ++i)
      r[i] = tr.path.states.back()[targets[i].first] - targets[i].second;
    return r;
  };

  size_t m = targets.size();
  std::vector<double> guess(m, 0.0);
  for (size_t i = 0; i < m; ++i) guess[i] = y0[free_slots[i]];
  std::vector<double> r = residual(guess);
  for (int iter = 0; iter < 50; ++iter) {
    double rn = 0;
    for (double v : r) rn = std::max(rn, std::abs(v));
    if (rn <= 1e-9) {
      std::vector<double> y = y0;
      for (size_t i = 0; i < m; ++i) y[free_slots[i]] = guess[i];
      return integrate(sys, y, l0, l1, opt);
    }
    // finite-difference Jacobian, Newton update
    std::vector<std::vector<double>> J(m, std::vector<double>(m));
    for (size_t j = 0; j < m; ++j) {
      double h = 1e-6 * (1 + std::abs(guess[j]));
      std::vector<double> g2 = guess;
      g2[j] += h;
      std::vector<double> r2 = residual(g2);
      for (size_t i = 0; i < m; ++i) J[i][j] = (r2[i] - r[i]) / h;
    }
    std::vector<double> step = solve_linear(J, r);
    for (size_t i = 0; i < m; ++i) guess[i] -= step[i];
    r = residual(guess);
  }
  throw solver_error("shooting did not converge in 50 iterations");
}

// ---------------------------------------------------------------------------
// Reconstruction of so12 coordinates from an invariant solution (tau, h) on
// the chi = 0 branch: the frame inverse R evolves by R' = R * N with
// N = [[0, h/tau, 0], [h/tau, 0, 0], [0, 0, 0]], and z = R * (tau, 0, 0)^T.
// R is re-orthonormalized against the Minkowski metric diag(1,-1,-1) after
// each step to control drift.

struct ReconstructedPoint {
  double l;
  std::array<double, 3> z;   // t, x, y
  std::array<double, 3> dz;  // t', x', y'
};

inline void minkowski_orthonormalize(std::array<std::array<double, 3>, 3>& R) {
  // columns are the moving basis vectors; metric signature (+,-,-)
  auto mdot = [](const std::array<double, 3>& u, const std::array<double, 3>& v) {
    return u[0] * v[0] - u[1] * v[1] - u[2] * v[2];
  };
  std::array<std::array<double, 3>, 3> col;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) col[j][i] = R[i][j];
  double n0 = std::sqrt(std::abs(mdot(col[0], col[0])));
  for (auto& c : col[0]) c /= n0;
  double p = mdot(col[1], col[0]);
  for (int i = 0; i < 3; ++i) col[1][i] -= p * col[0][i];
  double n1 = std::sqrt(std::abs(mdot(col[1], col[1])));
  for (auto& c : col[1]) c /= n1;
  double q0 = mdot(col[2], col[0]), q1 = mdot(col[2], col[1]);
  for (int i = 0; i < 3; ++i) col[2][i] -= q0 * col[0][i] - q1 * col[1][i];
  double n2 = std::sqrt(std::abs(mdot(col[2], col[2])));
  for (auto& c : col[2]) c /= n2;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) R[i][j] = col[j][i];
}

inline std::vector<ReconstructedPoint> reconstruct(
    const std::function<double(double)>& tau, const std::function<double(double)>& tau_l,
    const std::function<double(double)>& h, double l0, double l1,
    const std::vector<double>& sample_grid, const RKOptions& base_opt = {}) {
  auto rhs = [&](double l, const std::vector<double>& y) {
    double n = h(l) / tau(l);
    std::vector<double> dy(9);
    // R' = R * N, row-major R
    for (int i = 0; i < 3; ++i) {
      dy[i * 3 + 0] = y[i * 3 + 1] * n;
      dy[i * 3 + 1] = y[i * 3 + 0] * n;
      dy[i * 3 + 2] = 0;
    }
    return dy;
  };
  RKOptions opt = base_opt;
  opt.postprocess = [](double, std::vector<double>& y) {
    std::array<std::array<double, 3>, 3> R;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) R[i][j] = y[i * 3 + j];
    minkowski_orthonormalize(R);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) y[i * 3 + j] = R[i][j];
  };
  std::vector<double> R0 = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  RKResult res = rk45(rhs, R0, l0, l1, opt);
  std::vector<ReconstructedPoint> out;
  for (double l : sample_grid) {
    std::vector<double> y = res.at(l);
    ReconstructedPoint pt;
    pt.l = l;
    double tv = tau(l), tl = tau_l(l), hv = h(l);
    for (int i = 0; i < 3; ++i) {
      pt.z[i] = y[i * 3] * tv;
      pt.dz[i] = y[i * 3] * tl + y[i * 3 + 1] * hv;
    }
    out.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const Trajectory& tr, std::ostream& os,
                      const std::vector<std::pair<std::string, ExprPtr>>& extra = {}) {
  const ODESystem& sys = tr.sys;
  os << "lambda";
  for (auto& d : sys.deps)
    for (int k = 0; k < sys.jets_per_dep(); ++k)
      os << "," << d << (k ? "_" + std::to_string(k) : "");
  for (auto& m : sys.mults) os << "," << m;
  os << ",A,F";
  for (auto& [name, e] : extra) os << "," << name;
  for (size_t i = 0; i < sys.constraints.size(); ++i)
    os << ",constraint" << i + 1 << "_residual";
  os << "\n";
  for (size_t k = 0; k < tr.samples(); ++k) {
    JetPoint p = tr.point(k);
    os << fmt17(tr.path.grid[k]);
    for (auto& d : sys.deps)
      for (int j = 0; j < sys.jets_per_dep(); ++j) os << "," << fmt17(tr.value(k, d, j));
    for (auto& m : sys.mults) os << "," << fmt17(tr.value(k, m, 0));
    os << "," << fmt17(p.A) << "," << fmt17(p.F);
    for (auto& [name, e] : extra) os << "," << fmt17(eval(e, p, sys.params));
    for (auto& g : sys.constraints) os << "," << fmt17(eval(g, p, sys.params));
    os << "\n";
  }
}

}  // namespace hgf
