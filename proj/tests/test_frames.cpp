#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hgf/frames.hpp>
#include <hgf/io.hpp>

#include <random>

using namespace hgf;

namespace {

JetPoint iso11_point() {
  JetPoint p;
  p.set("t", 0, 0.3);
  p.set("x", 0, 0.1);
  p.set("t", 1, 5);
  p.set("x", 1, 3);
  p.set("t", 2, 1);
  p.set("x", 2, 2);
  p.set("t", 3, 0.5);
  p.set("x", 3, -0.7);
  return p;
}

JetPoint so12_point() {
  JetPoint p;
  p.set("t", 0, 2.0);
  p.set("x", 0, 0.4);
  p.set("y", 0, 0.3);
  p.set("t", 1, 1.3);
  p.set("x", 1, 0.5);
  p.set("y", 1, 0.2);
  p.set("t", 2, 0.1);
  p.set("x", 2, -0.3);
  p.set("y", 2, 0.25);
  return p;
}

JetPoint random_iso11(std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  JetPoint p;
  for (int k = 0; k <= 3; ++k) {
    p.set("t", k, U(rng));
    p.set("x", k, U(rng));
  }
  p.set("t", 1, 1.5 + std::abs(U(rng)));  // keep t' > |x'|
  return p;
}

JetPoint random_so12(std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (;;) {
    JetPoint p;
    p.set("t", 0, 2.0 + U(rng));
    p.set("x", 0, U(rng));
    p.set("y", 0, U(rng));
    for (int k = 1; k <= 2; ++k) {
      p.set("t", k, U(rng));
      p.set("x", k, U(rng));
      p.set("y", k, U(rng));
    }
    try {
      frame_so12(p);
      return p;
    } catch (const domain_error&) {
      continue;
    }
  }
}

GroupElement random_element(const GroupAction& a, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  if (a.name == "iso11") return iso11_element(U(rng), 2 * U(rng), 2 * U(rng));
  return so12_element(U(rng), U(rng), U(rng));
}

double eta_closed(const JetPoint& p) {
  double t1 = p.get("t", 1), x1 = p.get("x", 1);
  return std::sqrt(t1 * t1 - x1 * x1);
}

}  // namespace

TEST_CASE("iso11 frame normalizes onto the cross section") {
  JetPoint p = iso11_point();
  GroupElement rho = frame_iso11(p);
  CHECK(iso11_theta(rho) == doctest::Approx(std::log(2.0)));  // t'=5, x'=3
  JetPoint q = act(action_iso11(), rho, p, 2);
  CHECK(std::abs(q.get("t", 0)) < 1e-12);
  CHECK(std::abs(q.get("x", 0)) < 1e-12);
  CHECK(std::abs(q.get("x", 1)) < 1e-12);
  CHECK(q.get("t", 1) == doctest::Approx(4.0));  // eta
}

TEST_CASE("iso11 generating invariants match their closed forms") {
  JetPoint p = iso11_point();
  auto a = action_iso11();
  double t1 = p.get("t", 1), x1 = p.get("x", 1);
  double t2 = p.get("t", 2), x2 = p.get("x", 2);
  double eta = eta_closed(p);
  CHECK(invariant_value(a, "eta", p) == doctest::Approx(eta));
  double Ix11 = (t1 * x2 - x1 * t2) / eta;
  CHECK(invariant_value(a, "kappa", p) == doctest::Approx(Ix11 / (eta * eta)));
  // normalized second jets: t~'' = eta', x~'' = I^x_11
  JetPoint q = invariantize(a, p, 2);
  CHECK(q.get("t", 2) == doctest::Approx((t1 * t2 - x1 * x2) / eta));
  CHECK(q.get("x", 2) == doctest::Approx(Ix11));
}

TEST_CASE("so12 frame normalizes onto the cross section") {
  JetPoint p = so12_point();
  auto a = action_so12();
  JetPoint q = invariantize(a, p, 2);
  CHECK(std::abs(q.get("x", 0)) < 1e-12);
  CHECK(std::abs(q.get("y", 0)) < 1e-12);
  CHECK(std::abs(q.get("y", 1)) < 1e-12);

  double t = p.get("t", 0), x = p.get("x", 0), y = p.get("y", 0);
  double t1 = p.get("t", 1), x1 = p.get("x", 1), y1 = p.get("y", 1);
  double t2 = p.get("t", 2), x2 = p.get("x", 2), y2 = p.get("y", 2);
  double tau = std::sqrt(t * t - x * x - y * y);
  double m1 = y * t1 - t * y1, m2 = t * x1 - x * t1, m3 = x * y1 - y * x1;
  double hr = m1 * m1 + m2 * m2 - m3 * m3;
  double h = std::sqrt(hr) / tau;
  double chi = (t * (x1 * y2 - y1 * x2) - x * (t1 * y2 - y1 * t2) + y * (t1 * x2 - x1 * t2)) /
               std::sqrt(hr);
  CHECK(q.get("t", 0) == doctest::Approx(tau));
  CHECK(q.get("x", 1) == doctest::Approx(h));
  CHECK(q.get("y", 2) == doctest::Approx(chi));
  // t~' is the derivative of tau along the curve
  CHECK(q.get("t", 1) == doctest::Approx((t * t1 - x * x1 - y * y1) / tau));
  CHECK(invariant_value(a, "tau", p) == doctest::Approx(tau));
  CHECK(invariant_value(a, "h", p) == doctest::Approx(h));
  CHECK(invariant_value(a, "chi", p) == doctest::Approx(chi));
}

TEST_CASE("frame domain violations raise domain errors") {
  JetPoint sp;
  sp.set("t", 0, 0);
  sp.set("x", 0, 0);
  sp.set("t", 1, 1);
  sp.set("x", 1, 2);
  CHECK_THROWS_AS(frame_iso11(sp), domain_error);

  JetPoint neg = so12_point();
  neg.set("t", 0, -2.0);
  CHECK_THROWS_AS(frame_so12(neg), domain_error);
  JetPoint wide = so12_point();
  wide.set("x", 0, 3.0);
  CHECK_THROWS_AS(frame_so12(wide), domain_error);
}

TEST_CASE("generating invariants are unchanged under random group elements") {
  std::mt19937 rng(11);
  for (auto a : {action_iso11(), action_so12()}) {
    for (int trial = 0; trial < 30; ++trial) {
      JetPoint p = a.name == "iso11" ? random_iso11(rng) : random_so12(rng);
      GroupElement g = random_element(a, rng);
      JetPoint q = act(a, g, p, 2);
      for (auto& name : a.invariants) {
        double v0 = invariant_value(a, name, p);
        double v1 = invariant_value(a, name, q);
        CHECK(std::abs(v1 - v0) < 1e-9 * (1 + std::abs(v0)));
      }
    }
  }
  // negative control: a plain jet coordinate is not invariant
  JetPoint p = iso11_point();
  JetPoint q = act(action_iso11(), iso11_element(0.5, 0, 0), p, 1);
  CHECK(std::abs(q.get("t", 1) - p.get("t", 1)) > 1e-3);
}

TEST_CASE("adjoint representation: identity, homomorphism, pushforward residual") {
  std::mt19937 rng(23);
  for (auto a : {action_iso11(), action_so12()}) {
    auto Ad_e = adjoint_rep(a, identity(a));
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j)
        CHECK(std::abs(Ad_e[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);

    double tol = a.name == "iso11" ? 1e-10 : 1e-9;
    for (int trial = 0; trial < 20; ++trial) {
      GroupElement g1 = random_element(a, rng), g2 = random_element(a, rng);
      auto lhs = adjoint_rep(a, compose(g1, g2));
      auto rhs = detail::matmul(adjoint_rep(a, g1), adjoint_rep(a, g2));
      for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(std::abs(lhs[i][j] - rhs[i][j]) < 1e-10);

      JetPoint p = a.name == "iso11" ? random_iso11(rng) : random_so12(rng);
      CHECK(adjoint_identity_residual(a, g1, p, 2) < tol);
    }
  }
}

TEST_CASE("iso11 adjoint representation matches the closed form") {
  std::mt19937 rng(31);
  auto a = action_iso11();
  for (int trial = 0; trial < 20; ++trial) {
    GroupElement g = random_element(a, rng);
    auto num = adjoint_rep(a, g);
    auto closed = adjoint_iso11_closed(g);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) CHECK(std::abs(num[i][j] - closed[i][j]) < 1e-10);
  }
}

TEST_CASE("inverse adjoint of the iso11 frame is the conserved-quantity matrix") {
  JetPoint p = iso11_point();
  auto a = action_iso11();
  auto M = detail::inverse(adjoint_rep(a, frame_iso11(p)));
  double t = p.get("t", 0), x = p.get("x", 0);
  double t1 = p.get("t", 1), x1 = p.get("x", 1);
  double eta = eta_closed(p);
  detail::Mat expect = {{t1 / eta, -x1 / eta, 0},
                        {-x1 / eta, t1 / eta, 0},
                        {(t * x1 - x * t1) / eta, (x * x1 - t * t1) / eta, 1}};
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) CHECK(std::abs(M[i][j] - expect[i][j]) < 1e-10);
}

TEST_CASE("replacement rewrites joint invariants through the normalized jets") {
  ParseContext ctx;
  ctx.deps = {"t", "x", "y"};
  auto i11 = action_iso11();
  ExprPtr L = replacement(i11, parse("0.5*(t'^2 - x'^2)", ctx));
  ParseContext inv;
  inv.deps = {"eta", "kappa"};
  CHECK(is_zero(simplify(sub(L, parse("0.5*eta^2", inv)))));

  auto s12 = action_so12();
  ExprPtr T = replacement(s12, parse("t^2 - x^2 - y^2", ctx));
  ParseContext inv2;
  inv2.deps = {"tau", "h", "chi"};
  CHECK(is_zero(simplify(sub(T, parse("tau^2", inv2)))));

  CHECK_THROWS_AS(replacement(i11, parse("t'''", ctx)), frames_error);
}

TEST_CASE("first syzygy row holds along a two-parameter analytic family") {
  // family t = l + nu l^2, x = 0.1 l + nu l^3, evaluated off nu = 0 so the
  // curvature term contributes
  auto a = action_iso11();
  auto family = [](double l, double nu) {
    JetPoint p;
    p.set("t", 0, l + nu * l * l);
    p.set("t", 1, 1 + 2 * nu * l);
    p.set("t", 2, 2 * nu);
    p.set("t", 3, 0.0);
    p.set("x", 0, 0.1 * l + nu * l * l * l);
    p.set("x", 1, 0.1 + 3 * nu * l * l);
    p.set("x", 2, 6 * nu * l);
    p.set("x", 3, 6 * nu);
    p.set("t", 0, l * l, 1);  // nu-slot jets: dt/dnu and friends
    p.set("t", 1, 2 * l, 1);
    p.set("x", 0, l * l * l, 1);
    p.set("x", 1, 3 * l * l, 1);
    return p;
  };
  double nu0 = 0.05;
  for (double l : {0.4, 0.8, 1.2}) {
    double d = 1e-5;
    double lhs = (invariant_value(a, "eta", family(l, nu0 + d)) -
                  invariant_value(a, "eta", family(l, nu0 - d))) /
                 (2 * d);
    auto It2 = [&](double ll) {
      return invariantize(a, family(ll, nu0), 1, 1).get("t", 0, 1);
    };
    double DIt2 = (It2(l + d) - It2(l - d)) / (2 * d);
    JetPoint q = invariantize(a, family(l, nu0), 2, 1);
    double eta = q.get("t", 1);
    double kappa = q.get("x", 2) / (eta * eta);
    double rhs = DIt2 + kappa * eta * q.get("x", 0, 1);
    CHECK(std::abs(lhs - rhs) < 1e-6 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("invariantization does not commute with the total derivative") {
  // witness at a documented generic point: D_lambda(I^x_11) != I^x_111
  auto a = action_iso11();
  auto curve = [](double l) {
    JetPoint p;
    p.set("t", 0, 0.3 + 2 * l + 0.15 * l * l + 0.05 * l * l * l);
    p.set("t", 1, 2 + 0.3 * l + 0.15 * l * l);
    p.set("t", 2, 0.3 + 0.3 * l);
    p.set("t", 3, 0.3);
    p.set("x", 0, 0.1 + 0.5 * l - 0.2 * l * l + 0.08 * l * l * l);
    p.set("x", 1, 0.5 - 0.4 * l + 0.24 * l * l);
    p.set("x", 2, -0.4 + 0.48 * l);
    p.set("x", 3, 0.48);
    return p;
  };
  double l = 0.7, d = 1e-5;
  double D_Ix11 = (invariantize(a, curve(l + d), 2).get("x", 2) -
                   invariantize(a, curve(l - d), 2).get("x", 2)) /
                  (2 * d);
  double Ix111 = invariantize(a, curve(l), 3).get("x", 3);
  CHECK(std::abs(D_Ix11 - Ix111) > 1e-6);
}

TEST_CASE("syzygy table shapes and leading entries") {
  auto s1 = syzygies(action_iso11());
  REQUIRE(s1.rows.size() == 1);
  REQUIRE(s1.rows[0].size() == 2);
  CHECK(s1.rows[0][0].coef.size() == 2);  // pure D_lambda
  CHECK(is_one(s1.rows[0][0].coef[1]));

  auto s2 = syzygies(action_so12());
  REQUIRE(s2.rows.size() == 3);
  CHECK(is_one(s2.rows[0][0].coef[0]));       // D_nu tau = I^t_nu
  CHECK(s2.rows[2][2].coef.size() == 3);      // chi row carries D_lambda^2
  CHECK(is_one(s2.rows[2][2].coef[2]));
}
