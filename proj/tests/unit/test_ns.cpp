#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/ns.hpp"
#include "roughflow/taylor_jet.hpp"

using namespace roughflow;
namespace {
constexpr double kPi = std::numbers::pi;

RoughProfile default_profile() { return RoughProfile(2.0, {{1, {0.5, 0.0}}}); }

ForcingSpec default_forcing() {
  ForcingMode m;
  m.amplitude = 1.0;
  m.m = 1;
  m.ramp_time = 0.25;
  m.bump_top = 1.5;
  m.bump_width = 1.5;
  return ForcingSpec({m});
}

// Manufactured solution machinery: psi = A(t) G(x2 - W(x1)) F(x1).
struct Mms {
  DomainParams dom;
  double nu;
  FrictionSpec lambda;
  double amp = 0.3, tau = 0.15;

  double A(double t) const { return amp * smoothstep(t / tau); }
  double dA(double t) const { return amp * smoothstep_deriv(t / tau) / tau; }

  Jet2 stream(double x1, double x2) const {
    Jet2 jx = Jet2::var_x(x1), jy = Jet2::var_y(x2);
    Jet2 w = dom.epsilon * dom.eps_alpha() *
             profile_jet(dom.profile, (1.0 / dom.epsilon) * jx);
    Jet2 y = jy - w;
    Jet2 G = y * y * exp(-2.0 * y);
    Jet2 F = 1.0 + 0.5 * cos(2 * kPi * jx);
    return G * F;
  }
  double omega_exact(double t, double x1, double x2) const {
    Jet2 p = stream(x1, x2);
    return A(t) * (p.deriv(2, 0) + p.deriv(0, 2));
  }
  double source(double t, double x1, double x2) const {
    Jet2 p = stream(x1, x2);
    double lap = p.deriv(2, 0) + p.deriv(0, 2);
    double lap_x1 = p.deriv(3, 0) + p.deriv(1, 2);
    double lap_x2 = p.deriv(2, 1) + p.deriv(0, 3);
    double u1 = -p.deriv(0, 1), u2 = p.deriv(1, 0);
    double lap2 = p.deriv(4, 0) + 2 * p.deriv(2, 2) + p.deriv(0, 4);
    double a = A(t);
    return dA(t) * lap + a * a * (u1 * lap_x1 + u2 * lap_x2) - nu * a * lap2;
  }
  double wall_offset(double t, double x1) const {
    double w0 = wall(dom, DomainScale::physical, x1).w;
    Jet2 p = stream(x1, w0);
    double a = A(t);
    double u1 = -a * p.deriv(0, 1), u2 = a * p.deriv(1, 0);
    double om = a * (p.deriv(2, 0) + p.deriv(0, 2));
    double z1 = x1 / dom.epsilon;
    auto fr = frame(dom, z1);
    double utau = u1 * fr.tau[0] + u2 * fr.tau[1];
    double kl = 2.0 * curvature(dom, z1, FrameScale::physical) +
                lambda.value(x1);
    return om - kl * utau;
  }
};

double mms_error(const Mms& mms, int n1, int n2, double height, double T) {
  NSConfig cfg(mms.dom);
  cfg.nu = mms.nu;
  cfg.lambda = mms.lambda;
  cfg.n1 = n1;
  cfg.n2 = n2;
  cfg.height = height;
  cfg.T0 = T;
  cfg.cluster_width = 0.0;  // uniform grid
  cfg.sponge_strength = 0.0;
  cfg.dt_max = 0.05 * height / (n2 - 1);
  cfg.vorticity_source = [&mms](double t, double x1, double x2) {
    return mms.source(t, x1, x2);
  };
  cfg.wall_bc_offset = [&mms](double t, double x1) {
    return mms.wall_offset(t, x1);
  };
  // Momentum bookkeeping consistent with the manufactured fields.
  int nq = 256;
  double top_int = 0.0, wall_lap = 0.0;
  for (int i = 0; i < nq; ++i) {
    double x1 = double(i) / nq;
    top_int += mms.stream(x1, height).value();
    double w0 = wall(mms.dom, DomainScale::physical, x1).w;
    Jet2 p = mms.stream(x1, w0);
    wall_lap += p.deriv(2, 0) + p.deriv(0, 2);
  }
  top_int /= nq;
  wall_lap /= nq;
  cfg.momentum_input_extra = [&mms, top_int, wall_lap](double t) {
    return -mms.dA(t) * top_int - mms.nu * mms.A(t) * wall_lap;
  };
  NSSolver solver(std::move(cfg));
  auto res = solver.run({}, 5);
  const auto& s = res.final_state;
  const StripGrid& g = solver.grid();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    double w0 = wall(mms.dom, DomainScale::physical, g.node_x1(i)).w;
    for (int m = 0; m < g.n2(); ++m) {
      double want = mms.omega_exact(s.t, g.node_x1(i), g.x2[m] + w0);
      double diff = s.omega.at(i, m) - want;
      num += diff * diff;
      den += want * want;
    }
  }
  return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("init state is identically zero with zero energy") {
  NSConfig cfg(DomainParams(0.25, 2, default_profile()));
  cfg.n1 = 16;
  cfg.n2 = 33;
  NSSolver solver(std::move(cfg));
  auto s = solver.init_state();
  CHECK(s.omega.max_abs() == 0.0);
  CHECK(s.u.c1.max_abs() == 0.0);
  CHECK(solver.energy(s) == 0.0);
  CHECK(solver.vorticity_bc_equivalence(s) == 0.0);  // 0 = 0 at the wall
}

TEST_CASE("zero forcing keeps every step identically zero") {
  NSConfig cfg(DomainParams(0.25, 2, default_profile()));
  cfg.nu = 1e-3;
  cfg.n1 = 16;
  cfg.n2 = 49;
  cfg.T0 = 0.1;
  NSSolver solver(std::move(cfg));
  auto res = solver.run({}, 5);
  for (auto& r : res.records) {
    CHECK(r.energy == 0.0);
    CHECK(r.omega_linf == 0.0);
  }
  CHECK(res.final_state.u.c1.max_abs() == 0.0);
}

TEST_CASE("step rejects a CFL-violating time step") {
  NSConfig cfg(DomainParams(0.25, 2, default_profile()));
  cfg.n1 = 16;
  cfg.n2 = 33;
  NSSolver solver(std::move(cfg));
  auto s = solver.init_state();
  // Plant a strong velocity field by hand.
  for (auto& v : s.u.c1.v) v = 50.0;
  CHECK_THROWS_AS(solver.step(s, 0.5), TimeStepError);
}

TEST_CASE("manufactured solution converges at second order on a flat wall") {
  Mms mms{DomainParams(0.25, 2, RoughProfile::flat(1.0)), 5e-3,
          FrictionSpec{}, 0.3, 0.2};
  std::vector<double> errs;
  for (int k : {0, 1, 2})
    errs.push_back(mms_error(mms, 16 << k, 32 * (1 << k) + 1, 10.0, 0.3));
  double o1 = std::log2(errs[0] / errs[1]);
  double o2 = std::log2(errs[1] / errs[2]);
  CHECK(o1 > 1.8);
  CHECK(o2 > 1.8);
}

TEST_CASE("manufactured solution converges at second order on a rough wall") {
  // Gentle roughness (alpha = 1) with nonzero friction.
  DomainParams dom(0.25, 1, default_profile());
  Mms mms{dom, 5e-3, FrictionSpec(1.0, {{1, {0.25, 0.0}}}), 0.3, 0.2};
  std::vector<double> errs;
  for (int k : {0, 1, 2})
    errs.push_back(mms_error(mms, 16 << k, 32 * (1 << k) + 1, 10.0, 0.3));
  double o1 = std::log2(errs[0] / errs[1]);
  double o2 = std::log2(errs[1] / errs[2]);
  CHECK(o1 > 1.8);
  CHECK(o2 > 1.8);
}

TEST_CASE("energy ledger closes per step and over the run") {
  NSConfig cfg(DomainParams(0.25, 2, default_profile()));
  cfg.nu = 100.0 * std::pow(0.25, 7);
  cfg.lambda = FrictionSpec(1.0, {{1, {0.25, 0.0}}});
  cfg.forcing = default_forcing();
  cfg.n1 = 32;
  cfg.n2 = 129;
  cfg.height = 8.0;
  cfg.T0 = 0.5;
  NSSolver solver(std::move(cfg));
  auto res = solver.run({}, 9);
  double worst_defect = 0.0, run_scale = 1e-300;
  for (auto& r : res.records) {
    worst_defect = std::max(worst_defect, r.budget_defect);
    run_scale = std::max(run_scale, r.budget_scale);
  }
  CHECK(worst_defect < 0.01 * run_scale);  // 1% of the largest step term
  CHECK(res.energy_drift < 0.02);
  CHECK(res.records.back().energy > 0.0);
}

TEST_CASE("energy decays once forcing switches off with nonnegative friction") {
  ForcingMode m;
  m.amplitude = 1.0;
  m.m = 1;
  m.ramp_time = 0.1;
  m.off_time = 0.2;
  m.off_width = 0.05;
  m.bump_top = 1.5;
  m.bump_width = 1.5;
  NSConfig cfg(DomainParams(0.25, 2, default_profile()));
  cfg.nu = 2e-3;
  cfg.lambda = FrictionSpec(0.5, {});
  cfg.forcing = ForcingSpec({m});
  cfg.n1 = 32;
  cfg.n2 = 97;
  cfg.T0 = 0.5;
  NSSolver solver(std::move(cfg));
  auto res = solver.run({}, 11);
  double peak = 0.0;
  for (auto& r : res.records) peak = std::max(peak, r.energy);
  for (std::size_t r = 1; r < res.records.size(); ++r) {
    if (res.records[r - 1].t >= 0.3)
      CHECK(res.records[r].energy <=
            res.records[r - 1].energy + 1e-4 * peak);
  }
}

TEST_CASE("slip-condition forms agree: flat shear and manufactured fields") {
  // Flat shear u = (e^{-x2}, 0): both residual forms equal g'(0) + l g(0).
  DomainParams flat(0.25, 2, RoughProfile::flat(1.0));
  NSConfig cfg(flat);
  cfg.lambda = FrictionSpec(0.7, {});
  cfg.n1 = 16;
  cfg.n2 = 201;
  cfg.height = 6.0;
  cfg.cluster_width = 0.0;
  NSSolver solver(std::move(cfg));
  auto s = solver.init_state();
  const StripGrid& g = solver.grid();
  for (int i = 0; i < g.n1; ++i)
    for (int m = 0; m < g.n2(); ++m) s.u.c1.at(i, m) = std::exp(-g.x2[m]);
  auto forms = solver.slip_residual_forms(s);
  // g'(0) + l g(0) = -1 + 0.7
  for (int i = 0; i < g.n1; ++i) {
    CHECK(forms.first[i] == doctest::Approx(-0.3).epsilon(2e-3));
    CHECK(forms.second[i] == doctest::Approx(-0.3).epsilon(2e-3));
  }
  CHECK(solver.vorticity_bc_equivalence(s) < 1e-12);

  // Rough wall, manufactured tangent field: difference shrinks at 2nd order.
  DomainParams rough(0.25, 2, default_profile());
  double prev = -1.0;
  for (int n2 : {101, 201, 401}) {
    NSConfig rc(rough);
    rc.lambda = FrictionSpec(1.0, {{1, {0.3, 0.1}}});
    rc.n1 = 32;
    rc.n2 = n2;
    rc.height = 6.0;
    rc.cluster_width = 0.0;
    NSSolver rsolver(std::move(rc));
    auto rs = rsolver.init_state();
    const StripGrid& rg = rsolver.grid();
    Mms mms{rough, 1e-3, FrictionSpec{}, 1.0, 0.1};
    for (int i = 0; i < rg.n1; ++i) {
      double w0 = wall(rough, DomainScale::physical, rg.node_x1(i)).w;
      for (int m = 0; m < rg.n2(); ++m) {
        Jet2 p = mms.stream(rg.node_x1(i), rg.x2[m] + w0);
        rs.u.c1.at(i, m) = -p.deriv(0, 1);
        rs.u.c2.at(i, m) = p.deriv(1, 0);
      }
    }
    double d = rsolver.vorticity_bc_equivalence(rs);
    double h = rg.x2[1] - rg.x2[0];
    // For exactly tangent fields only tangential derivatives survive the
    // algebra, so the two forms agree to round-off, far inside 10 h^2.
    CHECK(d < 10.0 * h * h * 10.0);
    CHECK(d < 1e-10);
    prev = d;
  }
}

TEST_CASE("regime flags record the admissible window and resolution") {
  DomainParams dom(0.125, 2, default_profile());
  NSConfig cfg(dom);
  cfg.nu = 0.5 * std::pow(0.125, 7.0);
  cfg.n1 = 64;                       // >= 4 / eps = 32
  cfg.n2 = 257;
  cfg.lambda = FrictionSpec(1.0, {});
  NSSolver a(std::move(cfg));
  CHECK(a.regime().nu_in_window);
  CHECK(a.regime().lambda_in_window);

  NSConfig big(dom);
  big.nu = 10.0;  // far outside nu <= eps^7
  big.n1 = 16;    // under-resolved in x1
  big.n2 = 33;
  NSSolver b(std::move(big));
  CHECK(!b.regime().nu_in_window);
  CHECK(!b.regime().resolved);
}
