#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/euler.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/strip_elliptic.hpp"
#include "roughflow/taylor_jet.hpp"

using namespace roughflow;
namespace {
constexpr double kPi = std::numbers::pi;

StripGrid euler_grid(int n1, int n2, double L) {
  StripGrid g;
  g.n1 = n1;
  g.period = 1.0;
  g.x2 = uniform_nodes(L, n2);
  return g;
}

// Discrete divergence matching the solver's operators: spectral d1, FD d2.
double discrete_divergence(const VectorField& u) {
  const StripGrid& g = u.grid();
  RealFourier ft(g.n1);
  auto st = fd_stencils(g.x2);
  std::vector<double> row(g.n1);
  double worst = 0.0;
  for (int m = 0; m < g.n2(); ++m) {
    for (int i = 0; i < g.n1; ++i) row[i] = u.c1.at(i, m);
    auto d1 = ft.derivative(row, g.period);
    for (int i = 0; i < g.n1; ++i) {
      double d2 = 0.0;
      for (int q = 0; q < 3; ++q) d2 += st.d1[m][q] * u.c2.at(i, st.idx[m][q]);
      worst = std::max(worst, std::abs(d1[i] + d2));
    }
  }
  return worst;
}
}  // namespace

TEST_CASE("zero forcing keeps the flow identically at rest") {
  auto grid = euler_grid(16, 33, 4.0);
  auto series = solve_euler_base(grid, ForcingSpec{}, 0.3, 4);
  for (auto& s : series) {
    CHECK(s.omega.max_abs() == 0.0);
    CHECK(s.u.c1.max_abs() == 0.0);
    CHECK(s.u.c2.max_abs() == 0.0);
  }
}

TEST_CASE("x2-independent forcing reduces to the exact shear ODE") {
  // f = (a(t), 0) with bump == 1 on the whole strip: u = (int_0^t a, 0).
  double L = 4.0;
  ForcingMode m;
  m.amplitude = 0.8;
  m.m = 0;
  m.ramp_time = 0.2;
  m.bump_top = 2 * L;  // constant over the domain
  m.bump_width = 1.0;
  ForcingSpec f({m});
  auto grid = euler_grid(8, 41, L);
  auto series = solve_euler_base(grid, f, 0.5, 6);
  for (auto& s : series) {
    // Exact ramp integral from the closed form used by the solver's momentum
    // bookkeeping, cross-checked against dense Simpson quadrature.
    int n = 4000;
    double acc = 0.0;
    for (int q = 0; q <= n; ++q) {
      double tq = s.t * q / n;
      double w = (q == 0 || q == n) ? 1.0 : (q % 2 ? 4.0 : 2.0);
      acc += w * 0.8 * smoothstep(tq / 0.2);
    }
    double exact = acc * s.t / (3.0 * n);
    for (int i = 0; i < grid.n1; ++i)
      for (int mm = 0; mm < grid.n2(); ++mm) {
        CHECK(std::abs(s.u.c1.at(i, mm) - exact) < 1e-10 + 1e-9 * exact);
        CHECK(std::abs(s.u.c2.at(i, mm)) < 1e-12);
      }
  }
}

TEST_CASE("manufactured solution converges at second order") {
  double L = 2.0, T = 0.2;
  auto Phi = [&](Jet2 x1, Jet2 x2) {
    Jet2 s = sin(kPi * x2 * (1.0 / L));
    return s * s * cos(2 * kPi * x1);
  };
  auto A = [](double t) { return 0.4 * smoothstep(t / 0.15); };
  auto dA = [](double t) { return 0.4 * smoothstep_deriv(t / 0.15) / 0.15; };

  std::vector<double> errs;
  for (int n2 : {33, 65, 129}) {
    auto grid = euler_grid(16, n2, L);
    EulerOptions opt;
    opt.dt_max = 0.1 * (L / (n2 - 1));
    opt.vorticity_source = [&](double t, double x1, double x2) {
      Jet2 jx = Jet2::var_x(x1), jy = Jet2::var_y(x2);
      Jet2 phi = Phi(jx, jy);
      double lap = phi.deriv(2, 0) + phi.deriv(0, 2);
      double dlap_dx1 = phi.deriv(3, 0) + phi.deriv(1, 2);
      double dlap_dx2 = phi.deriv(2, 1) + phi.deriv(0, 3);
      double u1 = -phi.deriv(0, 1), u2 = phi.deriv(1, 0);
      double a = A(t);
      return dA(t) * lap + a * a * (u1 * dlap_dx1 + u2 * dlap_dx2);
    };
    auto series = solve_euler_base(grid, ForcingSpec{}, T, 3, opt);
    const auto& last = series.back();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        Jet2 jx = Jet2::var_x(grid.node_x1(i)), jy = Jet2::var_y(grid.x2[m]);
        Jet2 phi = Phi(jx, jy);
        double w_exact = A(T) * (phi.deriv(2, 0) + phi.deriv(0, 2));
        double diff = last.omega.at(i, m) - w_exact;
        num += diff * diff;
        den += w_exact * w_exact;
      }
    errs.push_back(std::sqrt(num / den));
  }
  double order1 = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 > 1.7);
  CHECK(order2 > 1.7);
}

TEST_CASE("lift_trace: zero, exact wall trace, machine-zero divergence") {
  auto grid = euler_grid(32, 65, 4.0);
  std::vector<double> zero(grid.n1, 0.0);
  auto u0 = lift_trace(grid, zero);
  CHECK(u0.c1.max_abs() == 0.0);
  CHECK(u0.c2.max_abs() == 0.0);

  std::vector<double> h(grid.n1);
  for (int i = 0; i < grid.n1; ++i) h[i] = std::sin(2 * kPi * grid.node_x1(i));
  auto u = lift_trace(grid, h);
  for (int i = 0; i < grid.n1; ++i)
    CHECK(u.c2.at(i, 0) == doctest::Approx(h[i]).epsilon(1e-13).scale(1.0));
  CHECK(discrete_divergence(u) < 1e-12);

  std::vector<double> bad(grid.n1, 0.3);
  CHECK_THROWS_AS(lift_trace(grid, bad), CompatibilityError);
}

TEST_CASE("linearized order: zero data gives the zero corrector") {
  auto grid = euler_grid(16, 33, 4.0);
  auto base = solve_euler_base(grid, ForcingSpec{}, 0.2, 3);
  LinearizedProblem prob;
  prob.k = 2;
  prob.h = [&](double) { return std::vector<double>(grid.n1, 0.0); };
  auto series = solve_linearized(grid, prob, base, 0.2, 3);
  for (auto& s : series) {
    CHECK(s.omega.max_abs() < 1e-14);
    CHECK(s.u.c1.max_abs() < 1e-14);
    CHECK(s.u.c2.max_abs() < 1e-14);
  }
  LinearizedProblem missing;
  CHECK_THROWS_AS(solve_linearized(grid, missing, base, 0.2, 3),
                  DependencyError);
}

TEST_CASE("linearized order around a zero base flow has a closed form") {
  // h = sin(2 pi x1) rho(t), u0 = 0, F = 0: the corrector is the harmonic
  // extension u = perp-grad(corr) with corr_1 = H_1 sinh(2pi(L-x2))/sinh(2piL).
  double L = 4.0;
  auto rho = [](double t) { return smoothstep(t / 0.2); };
  std::vector<double> errs;
  for (int n2 : {65, 129}) {
    auto grid = euler_grid(16, n2, L);
    auto base = solve_euler_base(grid, ForcingSpec{}, 0.4, 3);
    LinearizedProblem prob;
    prob.k = 3;
    prob.h = [&](double t) {
      std::vector<double> h(grid.n1);
      for (int i = 0; i < grid.n1; ++i)
        h[i] = rho(t) * std::sin(2 * kPi * grid.node_x1(i));
      return h;
    };
    auto series = solve_linearized(grid, prob, base, 0.4, 5);
    const auto& s = series.back();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        double x1 = grid.node_x1(i), x2 = grid.x2[m];
        double amp = rho(s.t) / (2 * kPi);
        double shape = std::sinh(2 * kPi * (L - x2)) / std::sinh(2 * kPi * L);
        double dshape = -2 * kPi * std::cosh(2 * kPi * (L - x2)) /
                        std::sinh(2 * kPi * L);
        // corr = -amp cos(2 pi x1) shape; u = perp-grad corr
        double u1 = amp * std::cos(2 * kPi * x1) * dshape;
        double u2 = amp * std::sin(2 * kPi * x1) * shape * 2 * kPi;
        num += std::pow(s.u.c1.at(i, m) - u1, 2) +
               std::pow(s.u.c2.at(i, m) - u2, 2);
        den += u1 * u1 + u2 * u2;
      }
    errs.push_back(std::sqrt(num / den));
  }
  CHECK(errs[0] < 4e-2);
  CHECK(std::log2(errs[0] / errs[1]) > 1.6);
}

TEST_CASE("linearized order: exact wall trace and divergence-free fields") {
  double L = 4.0;
  auto grid = euler_grid(32, 65, L);
  ForcingMode fm;
  fm.amplitude = 1.0;
  fm.m = 1;
  fm.ramp_time = 0.15;
  fm.bump_top = 1.0;
  fm.bump_width = 1.0;
  auto base = solve_euler_base(grid, ForcingSpec({fm}), 0.3, 5);
  LinearizedProblem prob;
  prob.k = 3;
  prob.h = [&](double t) {
    std::vector<double> h(grid.n1);
    for (int i = 0; i < grid.n1; ++i)
      h[i] = 0.2 * smoothstep(t / 0.2) * std::sin(2 * kPi * grid.node_x1(i));
    return h;
  };
  auto series = solve_linearized(grid, prob, base, 0.3, 4);
  for (auto& s : series) {
    auto h = prob.h(s.t);
    double worst = 0.0;
    for (int i = 0; i < grid.n1; ++i)
      worst = std::max(worst, std::abs(s.u.c2.at(i, 0) - h[i]));
    CHECK(worst < 1e-11);                      // trace met exactly
    CHECK(discrete_divergence(s.u) < 1e-10);   // perp-gradient structure
    CHECK(s.u.c2.at(0, grid.n2() - 1) == doctest::Approx(0.0).scale(1).epsilon(1e-11));
  }
  // Causality: the first snapshot is the rest state.
  CHECK(series.front().omega.max_abs() == 0.0);
}
