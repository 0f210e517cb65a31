#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hgf/solver.hpp>

#include <sstream>

using namespace hgf;

namespace {

HerglotzProblem motivating() {
  ParseContext ctx;
  ctx.deps = {"t", "x"};
  ctx.params = {"alpha"};
  HerglotzProblem p;
  p.deps = {"t", "x"};
  p.order = 1;
  p.lagrangian = parse("0.5*(t'^2 - x'^2) - alpha*A", ctx);
  p.params = {"alpha"};
  return p;
}

}  // namespace

TEST_CASE("scalar exponential decay") {
  auto rhs = [](double, const std::vector<double>& y) {
    return std::vector<double>{-0.3 * y[0]};
  };
  RKResult r = rk45(rhs, {1.0}, 0, 5);
  CHECK(std::abs(r.states.back()[0] - std::exp(-1.5)) < 1e-9);

  auto rhs0 = [](double, const std::vector<double>& y) {
    return std::vector<double>{0.0, 0.0};
  };
  RKResult c = rk45(rhs0, {2.0, -1.0}, 0, 5);
  for (auto& s : c.states) {
    CHECK(s[0] == 2.0);
    CHECK(s[1] == -1.0);
  }
}

TEST_CASE("fifth-order convergence under step halving") {
  auto rhs = [](double, const std::vector<double>& y) {
    return std::vector<double>{-0.3 * y[0]};
  };
  auto endpoint_error = [&](double h) {
    RKOptions opt;
    opt.rtol = 1.0;  // effectively fixed step at max_step
    opt.atol = 1.0;
    opt.max_step = h;
    RKResult r = rk45(rhs, {1.0}, 0, 5, opt);
    return std::abs(r.states.back()[0] - std::exp(-1.5));
  };
  double e1 = endpoint_error(0.05);
  double e2 = endpoint_error(0.025);
  CHECK(e1 / e2 >= 16.0);
}

TEST_CASE("motivating EL system matches the closed form") {
  ODESystem sys = make_ode_system(motivating(), {{"alpha", 0.3}});
  CHECK(sys.dim() == 5);  // t, t', x, x', A (F closed form)
  std::vector<double> y0(5, 0.0);
  y0[sys.slot("t", 1)] = 2.0;
  y0[sys.slot("x", 1)] = 1.0;
  Trajectory tr = integrate(sys, y0, 0, 5);
  CHECK(tr.samples() >= 200);
  double a = 0.3;
  double worst = 0, worstA = 0, worstF = 0;
  for (size_t k = 0; k < tr.samples(); ++k) {
    double l = tr.path.grid[k];
    double tex = (2.0 / a) * (1 - std::exp(-a * l));
    double xex = (1.0 / a) * (1 - std::exp(-a * l));
    worst = std::max(worst, std::abs(tr.value(k, "t", 0) - tex));
    worst = std::max(worst, std::abs(tr.value(k, "x", 0) - xex));
    double Aex = 5.0 * std::exp(-a * l) * (1 - std::exp(-a * l));
    worstA = std::max(worstA, std::abs(tr.point(k).A - Aex));
    worstF = std::max(worstF, std::abs(tr.point(k).F - std::exp(a * l)));
  }
  CHECK(worst < 1e-7);
  CHECK(worstA < 1e-7);
  CHECK(worstF < 1e-8);
}

TEST_CASE("straight lines at alpha = 0") {
  ODESystem sys = make_ode_system(motivating(), {{"alpha", 0.0}});
  std::vector<double> y0(5, 0.0);
  y0[sys.slot("t", 1)] = 2.0;
  y0[sys.slot("x", 1)] = 1.0;
  Trajectory tr = integrate(sys, y0, 0, 5);
  for (size_t k = 0; k < tr.samples(); ++k) {
    double l = tr.path.grid[k];
    CHECK(std::abs(tr.value(k, "t", 0) - 2 * l) < 1e-9);
    CHECK(std::abs(tr.value(k, "x", 0) - l) < 1e-9);
    CHECK(tr.point(k).F == 1.0);
  }
}

TEST_CASE("conserved quantity drift along the extremal") {
  ODESystem sys = make_ode_system(motivating(), {{"alpha", 0.3}});
  std::vector<double> y0(5, 0.0);
  y0[sys.slot("t", 1)] = 2.0;
  y0[sys.slot("x", 1)] = 1.0;
  Trajectory tr = integrate(sys, y0, 0, 5);
  // e^{al} t' and e^{al} x' are first integrals
  double mx = -1e300, mn = 1e300;
  for (size_t k = 0; k < tr.samples(); ++k) {
    double v = tr.point(k).F * tr.value(k, "t", 1);
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  CHECK(mx - mn < 1e-8);
}

TEST_CASE("integrating factor as an extra state when Q has jet variables") {
  ParseContext ctx;
  ctx.deps = {"u"};
  HerglotzProblem p;
  p.deps = {"u"};
  p.order = 1;
  p.lagrangian = parse("0.5*u'^2 - u*A", ctx);
  ODESystem sys = make_ode_system(p, {});
  CHECK(!sys.F_closed.has_value());
  CHECK(sys.dim() == 4);  // u, u', A, F
  std::vector<double> y0(4, 0.0);
  y0[sys.slot("u", 0)] = 0.5;
  y0[sys.slot("u", 1)] = 0.2;
  y0[3] = 1.0;
  Trajectory tr = integrate(sys, y0, 0, 3);
  // F * exp(int Q) = 1 with Q = -u, via Simpson with dense-output midpoints
  size_t uslot = sys.slot("u", 0);
  double acc = 0;
  for (size_t k = 1; k < tr.samples(); ++k) {
    double h = tr.path.grid[k] - tr.path.grid[k - 1];
    double um = tr.path.at(0.5 * (tr.path.grid[k] + tr.path.grid[k - 1]))[uslot];
    acc += -(h / 6) * (tr.value(k - 1, "u", 0) + 4 * um + tr.value(k, "u", 0));
    double F = tr.point(k).F;
    CHECK(F > 0);
    CHECK(std::abs(F * std::exp(acc) - 1.0) < 1e-6);
  }
}

TEST_CASE("two-point data by shooting") {
  auto p = motivating();
  double a = 0.3;
  Trajectory tr = solve_extremal(p, {{"alpha", a}}, {{"t", 0.0}, {"x", 0.0}, {"x'", 0.0}},
                                 {{"t", 3.0}}, 0, 5);
  double expect_slope = 3.0 * a / (1 - std::exp(-1.5));
  CHECK(std::abs(tr.value(0, "t", 1) - expect_slope) < 1e-8);
  CHECK(std::abs(tr.path.states.back()[tr.sys.slot("t", 0)] - 3.0) < 1e-8);
}

TEST_CASE("constrained arclength problem: DAE closure and projection") {
  ParseContext ctx;
  ctx.deps = {"t", "x", "y"};
  ctx.params = {"alpha"};
  HerglotzProblem p;
  p.deps = {"t", "x", "y"};
  p.order = 1;
  p.lagrangian = parse("0.5*(t'^2 - x'^2 - y'^2) - alpha*A", ctx);
  p.constraints = {parse("t'^2 - x'^2 - y'^2 - 1", ctx)};
  p.params = {"alpha"};

  double a = 0.3;
  ODESystem sys = make_ode_system(p, {{"alpha", a}});
  CHECK(sys.mults == std::vector<std::string>{"mu1"});
  std::vector<double> y0(sys.dim(), 0.0);
  double xp = 0.3, yp = 0.1, tp = std::sqrt(1 + xp * xp + yp * yp);
  y0[sys.slot("t", 1)] = tp;
  y0[sys.slot("x", 1)] = xp;
  y0[sys.slot("y", 1)] = yp;
  Trajectory tr = integrate(sys, y0, 0, 4);
  for (size_t k = 0; k < tr.samples(); ++k) {
    double l = tr.path.grid[k];
    JetPoint pt = tr.point(k);
    double g = eval(p.constraints[0], pt, sys.params);
    CHECK(std::abs(g) < 1e-6);
    // extremals are straight: u'' = 0, and mu = (1 - e^{-al})/2
    CHECK(std::abs(tr.value(k, "t", 0) - tp * l) < 1e-7);
    CHECK(std::abs(tr.value(k, "x", 0) - xp * l) < 1e-7);
    CHECK(std::abs(tr.value(k, "mu1", 0) - 0.5 * (1 - std::exp(-a * l))) < 1e-7);
  }
}

TEST_CASE("frame reconstruction keeps Minkowski relations") {
  auto tau = [](double l) { return 1.0 + l; };
  auto tau_l = [](double) { return 1.0; };
  auto h = [](double) { return 0.2; };
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i * 0.1);
  auto pts = reconstruct(tau, tau_l, h, 0, 4, grid);
  CHECK(pts.front().z[0] == doctest::Approx(1.0));
  CHECK(pts.front().z[1] == doctest::Approx(0.0));
  CHECK(pts.front().z[2] == doctest::Approx(0.0));
  for (auto& pt : pts) {
    double q = pt.z[0] * pt.z[0] - pt.z[1] * pt.z[1] - pt.z[2] * pt.z[2];
    CHECK(std::abs(q - tau(pt.l) * tau(pt.l)) < 1e-6);
    double v = pt.dz[0] * pt.dz[0] - pt.dz[1] * pt.dz[1] - pt.dz[2] * pt.dz[2];
    CHECK(std::abs(v - (1.0 - 0.04)) < 1e-6);
  }
}

TEST_CASE("CSV export: header and 17-significant-digit round trip") {
  ODESystem sys = make_ode_system(motivating(), {{"alpha", 0.3}});
  std::vector<double> y0(5, 0.0);
  y0[sys.slot("t", 1)] = 2.0;
  y0[sys.slot("x", 1)] = 1.0;
  Trajectory tr = integrate(sys, y0, 0, 1);
  std::ostringstream os;
  write_csv(tr, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "lambda,t,t_1,x,x_1,A,F");
  std::string line;
  std::getline(is, line);  // skip row 0
  std::getline(is, line);
  auto cell = [&](int idx) {
    std::istringstream ls(line);
    std::string c;
    for (int i = 0; i <= idx; ++i) std::getline(ls, c, ',');
    return std::stod(c);
  };
  CHECK(cell(1) == tr.value(1, "t", 0));  // bit-exact round trip
  CHECK(cell(6) == tr.point(1).F);
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(solve_linear({{0, 0}, {0, 0}}, {1, 1}), solver_error);
  auto rhs = [](double, const std::vector<double>& y) {
    return std::vector<double>{y[0] * y[0]};  // blows up at l = 1
  };
  CHECK_THROWS_AS(rk45(rhs, {1.0}, 0, 2), solver_error);
}
