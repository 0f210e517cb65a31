#pragma once

// Group actions, moving frames, invariantization, infinitesimal generators,
// adjoint representations, and the differential syzygies between invariants.
//
// Two pseudo-Riemannian actions are cataloged:
//   iso11 -- boosts + translations of the (1+1) Minkowski plane acting on
//            curves (t(l), x(l)); generating invariants eta, kappa.
//   so12  -- the connected Lorentz group of (1+2) Minkowski space acting
//            linearly on curves (t(l), x(l), y(l)) on the timelike cone;
//            generating invariants tau, h, chi.
//
// Generator ordering (rows of the infinitesimal matrix and index order of the
// adjoint representation):
//   iso11: d/dt translation, d/dx translation, boost.
//   so12:  rotation in the (x,y) plane, boost in the (t,y) plane, boost in
//          the (t,x) plane.
// Jet columns are variable-major, lambda-order-minor: t, t', ..., x, x', ...

#include <hgf/expr.hpp>
#include <hgf/simplify.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgf {

struct frames_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupAction {
  std::string name;
  std::vector<std::string> deps;
  std::vector<std::string> invariants;  // generating differential invariants
  size_t dim() const { return deps.size(); }
  size_t generators() const { return 3; }
};

inline GroupAction action_iso11() {
  return {"iso11", {"t", "x"}, {"eta", "kappa"}};
}
inline GroupAction action_so12() {
  return {"so12", {"t", "x", "y"}, {"tau", "h", "chi"}};
}
inline GroupAction action_by_name(const std::string& name) {
  if (name == "iso11") return action_iso11();
  if (name == "so12") return action_so12();
  throw frames_error("unknown group action: " + name);
}

// ---------------------------------------------------------------------------
// Small dense matrix helpers (doubles)

namespace detail {

using Mat = std::vector<std::vector<double>>;

inline Mat matmul(const Mat& A, const Mat& B) {
  size_t n = A.size(), m = B[0].size(), k = B.size();
  Mat C(n, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t p = 0; p < k; ++p)
      for (size_t j = 0; j < m; ++j) C[i][j] += A[i][p] * B[p][j];
  return C;
}

inline Mat transpose(const Mat& A) {
  Mat T(A[0].size(), std::vector<double>(A.size()));
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A[0].size(); ++j) T[j][i] = A[i][j];
  return T;
}

inline Mat inverse(Mat A) {
  size_t n = A.size();
  Mat I(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) I[i][i] = 1.0;
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (A[piv][c] == 0.0) throw frames_error("singular matrix");
    std::swap(A[piv], A[c]);
    std::swap(I[piv], I[c]);
    double d = A[c][c];
    for (size_t j = 0; j < n; ++j) {
      A[c][j] /= d;
      I[c][j] /= d;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == c || A[r][c] == 0.0) continue;
      double f = A[r][c];
      for (size_t j = 0; j < n; ++j) {
        A[r][j] -= f * A[c][j];
        I[r][j] -= f * I[c][j];
      }
    }
  }
  return I;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Group elements

// An element acts affinely on the column of dependent variables:
//   z~ = lin * z + tr  (tr = 0 for so12).
// Jets of every order, including variation-slot jets, transform by lin alone
// because the action is affine and fixes both independent variables.
struct GroupElement {
  std::string action;
  detail::Mat lin;
  std::vector<double> tr;
};

inline GroupElement identity(const GroupAction& act) {
  size_t d = act.dim();
  GroupElement g{act.name, detail::Mat(d, std::vector<double>(d, 0.0)),
                 std::vector<double>(d, 0.0)};
  for (size_t i = 0; i < d; ++i) g.lin[i][i] = 1.0;
  return g;
}

inline GroupElement iso11_element(double theta, double a, double b) {
  GroupElement g;
  g.action = "iso11";
  double c = std::cosh(theta), s = std::sinh(theta);
  g.lin = {{c, -s}, {-s, c}};
  g.tr = {a, b};
  return g;
}

inline GroupElement so12_element(double theta, double sigma, double phi) {
  auto rot = [](double u) -> detail::Mat {
    return {{1, 0, 0}, {0, std::cos(u), -std::sin(u)}, {0, std::sin(u), std::cos(u)}};
  };
  auto boost_y = [](double u) -> detail::Mat {
    return {{std::cosh(u), 0, -std::sinh(u)}, {0, 1, 0}, {-std::sinh(u), 0, std::cosh(u)}};
  };
  auto boost_x = [](double u) -> detail::Mat {
    return {{std::cosh(u), -std::sinh(u), 0}, {-std::sinh(u), std::cosh(u), 0}, {0, 0, 1}};
  };
  GroupElement g;
  g.action = "so12";
  g.lin = detail::matmul(rot(theta), detail::matmul(boost_y(sigma), boost_x(phi)));
  g.tr = {0, 0, 0};
  return g;
}

// (g1*g2).z == g1.(g2.z)
inline GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
  if (g1.action != g2.action) throw frames_error("cannot compose elements of different actions");
  GroupElement g;
  g.action = g1.action;
  g.lin = detail::matmul(g1.lin, g2.lin);
  g.tr = g1.tr;
  for (size_t i = 0; i < g.tr.size(); ++i)
    for (size_t j = 0; j < g.tr.size(); ++j) g.tr[i] += g1.lin[i][j] * g2.tr[j];
  return g;
}

inline GroupElement inverse(const GroupElement& g) {
  GroupElement h;
  h.action = g.action;
  h.lin = detail::inverse(g.lin);
  h.tr.assign(g.tr.size(), 0.0);
  for (size_t i = 0; i < g.tr.size(); ++i)
    for (size_t j = 0; j < g.tr.size(); ++j) h.tr[i] -= h.lin[i][j] * g.tr[j];
  return h;
}

// Recover the boost parameter of an iso11 element (exp(theta) = cosh + sinh).
inline double iso11_theta(const GroupElement& g) {
  return std::log(g.lin[0][0] - g.lin[0][1]);
}

// ---------------------------------------------------------------------------
// Prolonged action on jet points

inline JetPoint act(const GroupAction& a, const GroupElement& g, const JetPoint& p,
                    int max_lam, int max_nu = 0) {
  if (g.action != a.name) throw frames_error("group element does not belong to this action");
  JetPoint q = p;
  size_t d = a.dim();
  for (int nu = 0; nu <= max_nu; ++nu) {
    for (int k = 0; k <= max_lam; ++k) {
      bool any = false;
      std::vector<double> z(d, 0.0);
      for (size_t i = 0; i < d; ++i)
        if (p.has(a.deps[i], k, nu)) {
          any = true;
          z[i] = p.get(a.deps[i], k, nu);
        }
      if (!any) continue;
      for (size_t i = 0; i < d; ++i) {
        double v = 0;
        for (size_t j = 0; j < d; ++j) v += g.lin[i][j] * z[j];
        if (k == 0 && nu == 0) v += g.tr[i];
        q.set(a.deps[i], k, v, nu);
      }
    }
  }
  return q;
}

// ---------------------------------------------------------------------------
// Moving frames (right normalization: act(frame(p), p) lies on the cross
// section x~ = 0, ... listed per action below)

// iso11 cross section: t~ = x~ = 0, x~' = 0, t~' = eta > 0.
// Domain: t' > |x'|.
inline GroupElement frame_iso11(const JetPoint& p) {
  double t = p.get("t", 0), x = p.get("x", 0);
  double t1 = p.get("t", 1), x1 = p.get("x", 1);
  if (t1 - x1 <= 0 || t1 + x1 <= 0)
    throw domain_error("frame domain requires t' > |x'|");
  double eta = std::sqrt(t1 * t1 - x1 * x1);
  double theta = 0.5 * std::log((t1 + x1) / (t1 - x1));
  double a = (x * x1 - t * t1) / eta;
  double b = (t * x1 - x * t1) / eta;
  return iso11_element(theta, a, b);
}

// so12 cross section: x~ = y~ = 0, y~' = 0, t~ = tau > 0, x~' = h > 0.
// Domain: t > 0, t^2 - x^2 - y^2 > 0, and the h-radicand positive.
inline GroupElement frame_so12(const JetPoint& p) {
  double t = p.get("t", 0), x = p.get("x", 0), y = p.get("y", 0);
  double t1 = p.get("t", 1), x1 = p.get("x", 1), y1 = p.get("y", 1);
  if (t <= 0) throw domain_error("frame domain requires t > 0");
  double tx2 = t * t - x * x;
  if (tx2 <= 0) throw domain_error("frame domain requires t^2 - x^2 > 0");
  double tau2 = tx2 - y * y;
  if (tau2 <= 0) throw domain_error("frame domain requires t^2 - x^2 - y^2 > 0");
  double m1 = y * t1 - t * y1, m2 = t * x1 - x * t1, m3 = x * y1 - y * x1;
  double hr = m1 * m1 + m2 * m2 - m3 * m3;
  if (hr <= 0)
    throw domain_error("frame domain requires a positive normal-speed radicand");
  double tau = std::sqrt(tau2);
  double theta = std::atan2(y * (t * t1 - x * x1) - y1 * tx2, tau * m2);
  double sigma = std::atanh(y / std::sqrt(tx2));
  double phi = std::atanh(x / t);
  return so12_element(theta, sigma, phi);
}

inline GroupElement frame(const GroupAction& a, const JetPoint& p) {
  return a.name == "iso11" ? frame_iso11(p) : frame_so12(p);
}

inline JetPoint invariantize(const GroupAction& a, const JetPoint& p, int max_lam,
                             int max_nu = 0) {
  return act(a, frame(a, p), p, max_lam, max_nu);
}

// Values of the generating invariants at a jet point.
inline double invariant_value(const GroupAction& a, const std::string& name,
                              const JetPoint& p) {
  if (a.name == "iso11") {
    JetPoint q = invariantize(a, p, 2);
    double eta = q.get("t", 1);
    if (name == "eta") return eta;
    if (name == "kappa") return q.get("x", 2) / (eta * eta);
  } else {
    JetPoint q = invariantize(a, p, 2);
    if (name == "tau") return q.get("t", 0);
    if (name == "h") return q.get("x", 1);
    if (name == "chi") return q.get("y", 2);
  }
  throw frames_error("unknown invariant " + name + " for action " + a.name);
}

// ---------------------------------------------------------------------------
// Replacement: rewrite a joint-invariant expression through the substitution
// jet -> invariantized jet, expressed in the generating invariants.

inline std::map<VarId, ExprPtr> replacement_table(const GroupAction& a) {
  std::map<VarId, ExprPtr> m;
  if (a.name == "iso11") {
    m[jet_id("t", 0)] = zero();
    m[jet_id("x", 0)] = zero();
    m[jet_id("t", 1)] = jet("eta", 0);
    m[jet_id("x", 1)] = zero();
    m[jet_id("t", 2)] = jet("eta", 1);
    m[jet_id("x", 2)] = mul(jet("kappa", 0), pow(jet("eta", 0), 2));
  } else {
    m[jet_id("t", 0)] = jet("tau", 0);
    m[jet_id("x", 0)] = zero();
    m[jet_id("y", 0)] = zero();
    m[jet_id("t", 1)] = jet("tau", 1);
    m[jet_id("x", 1)] = jet("h", 0);
    m[jet_id("y", 1)] = zero();
    // second-order entries follow from differentiating tau*tau' = t t' - ...
    m[jet_id("t", 2)] = add(jet("tau", 2), div(pow(jet("h", 0), 2), jet("tau", 0)));
    m[jet_id("y", 2)] = jet("chi", 0);
  }
  return m;
}

inline ExprPtr replacement(const GroupAction& a, const ExprPtr& e) {
  auto table = replacement_table(a);
  std::set<VarId> vars;
  collect_vars(e, vars);
  for (auto& v : vars) {
    if (v.kind != Kind::Jet) continue;
    bool dep = false;
    for (auto& d : a.deps) dep = dep || d == v.name;
    if (dep && !table.count(v))
      throw frames_error("no replacement rule for " + v.name + " at order " +
                         std::to_string(v.lam));
  }
  return simplify(substitute(e, table));
}

// ---------------------------------------------------------------------------
// Infinitesimal generators

// Row r, column (variable i, lambda-order k): coefficient of the prolonged
// generator r in direction d/d u^i_k, as an expression in the jets.
inline std::vector<std::vector<ExprPtr>> infinitesimals_sym(const GroupAction& a,
                                                            int order) {
  size_t d = a.dim();
  size_t cols = d * (order + 1);
  std::vector<std::vector<ExprPtr>> W(a.generators(),
                                      std::vector<ExprPtr>(cols, zero()));
  auto col = [&](size_t var, int k) { return var * (order + 1) + k; };
  if (a.name == "iso11") {
    W[0][col(0, 0)] = one();  // d/dt translation
    W[1][col(1, 0)] = one();  // d/dx translation
    for (int k = 0; k <= order; ++k) {
      W[2][col(0, k)] = neg(jet("x", k));  // boost
      W[2][col(1, k)] = neg(jet("t", k));
    }
  } else {
    for (int k = 0; k <= order; ++k) {
      W[0][col(1, k)] = neg(jet("y", k));  // rotation in (x,y)
      W[0][col(2, k)] = jet("x", k);
      W[1][col(0, k)] = neg(jet("y", k));  // boost in (t,y)
      W[1][col(2, k)] = neg(jet("t", k));
      W[2][col(0, k)] = neg(jet("x", k));  // boost in (t,x)
      W[2][col(1, k)] = neg(jet("t", k));
    }
  }
  return W;
}

inline detail::Mat infinitesimals(const GroupAction& a, const JetPoint& p, int order) {
  auto W = infinitesimals_sym(a, order);
  detail::Mat M(W.size(), std::vector<double>(W[0].size()));
  for (size_t r = 0; r < W.size(); ++r)
    for (size_t c = 0; c < W[0].size(); ++c) M[r][c] = eval(W[r][c], p);
  return M;
}

// ---------------------------------------------------------------------------
// Adjoint representation, defined through the prolonged-generator identity
//   Ad(g) W(z) = W(z~) J^{-T},   z~ = g.z,  J = d z~ / d z.

// J is block diagonal over jet orders with every block equal to lin, so
// J^{-T} acts columnwise by lin^{-T}.
inline detail::Mat generator_pushforward(const GroupAction& a, const GroupElement& g,
                                         const JetPoint& p, int order) {
  JetPoint q = act(a, g, p, order);
  detail::Mat W = infinitesimals(a, q, order);
  detail::Mat linv = detail::transpose(detail::inverse(g.lin));
  size_t d = a.dim(), rows = W.size();
  detail::Mat R(rows, std::vector<double>(W[0].size(), 0.0));
  for (size_t r = 0; r < rows; ++r)
    for (size_t i = 0; i < d; ++i)
      for (int k = 0; k <= order; ++k) {
        double v = 0;
        for (size_t j = 0; j < d; ++j) v += W[r][j * (order + 1) + k] * linv[j][i];
        R[r][i * (order + 1) + k] = v;
      }
  return R;
}

inline detail::Mat adjoint_rep(const GroupAction& a, const GroupElement& g) {
  // Solve Ad(g) W(z) = W(z~) J^{-T} in the least-squares sense at a fixed
  // generic point; the identity is exact, so the residual is at rounding level.
  const int order = 2;
  for (int attempt = 0; attempt < 2; ++attempt) {
    JetPoint p;
    double base = attempt == 0 ? 0.0 : 0.37;
    double vals[3][3] = {{2.1 + base, 1.1, 0.4}, {0.5, 0.8 + base, -0.6}, {0.3, -0.2, 0.9}};
    for (size_t i = 0; i < a.dim(); ++i)
      for (int k = 0; k <= order; ++k) p.set(a.deps[i], k, vals[i][k]);
    detail::Mat W = infinitesimals(a, p, order);
    detail::Mat R = generator_pushforward(a, g, p, order);
    detail::Mat Wt = detail::transpose(W);
    detail::Mat G = detail::matmul(W, Wt);  // r x r Gram matrix
    try {
      return detail::matmul(detail::matmul(R, Wt), detail::inverse(G));
    } catch (const frames_error&) {
      continue;  // degenerate sample; retry with the alternate point
    }
  }
  throw frames_error("adjoint representation: generic point sampling failed");
}

inline double adjoint_identity_residual(const GroupAction& a, const GroupElement& g,
                                        const JetPoint& p, int order) {
  detail::Mat Ad = adjoint_rep(a, g);
  detail::Mat lhs = detail::matmul(Ad, infinitesimals(a, p, order));
  detail::Mat rhs = generator_pushforward(a, g, p, order);
  double worst = 0;
  for (size_t r = 0; r < lhs.size(); ++r)
    for (size_t c = 0; c < lhs[0].size(); ++c)
      worst = std::max(worst, std::abs(lhs[r][c] - rhs[r][c]));
  return worst;
}

// Closed form of the iso11 adjoint representation in the generator ordering
// (d/dt, d/dx, boost); theta, a, b are the element parameters.
inline detail::Mat adjoint_iso11_closed(const GroupElement& g) {
  double theta = iso11_theta(g);
  double c = std::cosh(theta), s = std::sinh(theta);
  double a = g.tr[0], b = g.tr[1];
  return {{c, s, 0}, {s, c, 0}, {-b * c - a * s, -b * s - a * c, 1}};
}

// ---------------------------------------------------------------------------
// Differential syzygies
//
// For each generating invariant K_j, the variation derivative satisfies
//   D_nu K_j = sum_alpha H[j][alpha] (I^alpha_nu)
// with H a matrix of differential operators in D_lambda whose coefficients
// are expressions in the generating invariants.

struct DiffOp {
  std::vector<ExprPtr> coef;  // sum_k coef[k] * D_lambda^k

  ExprPtr applied(const ExprPtr& e) const {
    std::vector<ExprPtr> terms;
    ExprPtr d = e;
    for (size_t k = 0; k < coef.size(); ++k) {
      if (!is_zero(coef[k])) terms.push_back(mul(coef[k], d));
      d = total_derivative(d);
    }
    return terms.empty() ? zero() : add(std::move(terms));
  }
};

struct SyzygyTable {
  std::vector<std::string> invariants;           // row labels
  std::vector<std::vector<DiffOp>> rows;         // columns follow action deps
};

inline SyzygyTable syzygies(const GroupAction& a) {
  SyzygyTable s;
  if (a.name == "iso11") {
    // D_nu eta = D_lambda I^t_nu + kappa*eta * I^x_nu
    s.invariants = {"eta"};
    s.rows = {{DiffOp{{zero(), one()}},
               DiffOp{{mul(jet("kappa", 0), jet("eta", 0))}}}};
  } else {
    ExprPtr tau = jet("tau", 0), tau1 = jet("tau", 1), tau2 = jet("tau", 2);
    ExprPtr h = jet("h", 0), h1 = jet("h", 1);
    ExprPtr chi = jet("chi", 0), chi1 = jet("chi", 1);
    s.invariants = {"tau", "h", "chi"};
    DiffOp t_t{{one()}}, t_x{{zero()}}, t_y{{zero()}};
    DiffOp h_t{{div(h, tau)}};
    DiffOp h_x{{neg(div(tau1, tau)), one()}};
    DiffOp h_y{{neg(div(chi, h))}};
    DiffOp c_t{{div(chi, tau)}};
    DiffOp c_x{{add({div(chi1, h), neg(mul(num(2), div(mul(chi, h1), pow(h, 2)))),
                     neg(div(mul(chi, tau1), mul(h, tau)))}),
                mul(num(2), div(chi, h))}};
    DiffOp c_y{{add({div(mul(tau1, h1), mul(tau, h)), div(pow(tau1, 2), pow(tau, 2)),
                     neg(div(tau2, tau)), neg(div(pow(h, 2), pow(tau, 2))),
                     neg(div(pow(chi, 2), pow(h, 2)))}),
                neg(div(add(mul(tau1, h), mul(tau, h1)), mul(tau, h))), one()}};
    s.rows = {{t_t, t_x, t_y}, {h_t, h_x, h_y}, {c_t, c_x, c_y}};
  }
  return s;
}

}  // namespace hgf
