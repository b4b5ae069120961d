#include "roughflow/ns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/strip_elliptic.hpp"

namespace roughflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;
}  // namespace

// ---------------------------------------------------------------------------
// FrictionSpec

FrictionSpec::FrictionSpec(
    double mean, std::vector<std::pair<int, std::complex<double>>> modes)
    : mean_(mean), modes_(std::move(modes)) {
  for (auto& [j, c] : modes_)
    if (j <= 0)
      throw InputError("FrictionSpec: list one-sided modes with j >= 1");
}

double FrictionSpec::value(double x1) const { return derivative(x1, 0); }

double FrictionSpec::derivative(double x1, int order) const {
  double acc = order == 0 ? mean_ : 0.0;
  for (auto& [j, c] : modes_) {
    cplx ik(0.0, kTwoPi * j);
    cplx f = 1.0;
    for (int p = 0; p < order; ++p) f *= ik;
    acc += 2.0 * std::real(f * c * std::exp(cplx(0.0, kTwoPi * j * x1)));
  }
  return acc;
}

double FrictionSpec::c2_magnitude() const {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  int n = 1024;
  for (int i = 0; i < n; ++i) {
    double x = double(i) / n;
    s0 = std::max(s0, std::abs(derivative(x, 0)));
    s1 = std::max(s1, std::abs(derivative(x, 1)));
    s2 = std::max(s2, std::abs(derivative(x, 2)));
  }
  return s0 + s1 + s2;
}

double FrictionSpec::min_value() const {
  double m = 1e300;
  for (int i = 0; i < 1024; ++i) m = std::min(m, value(double(i) / 1024));
  return m;
}

// ---------------------------------------------------------------------------
// Solver implementation

double EnergyBudget::scale() const {
  return std::max({std::abs(dE), std::abs(power_forcing),
                   std::abs(power_strain), std::abs(power_friction), 1e-300});
}

struct NSSolver::Impl {
  NSConfig cfg;
  StripGrid grid;
  RealFourier ft;
  FdStencils st;
  std::unique_ptr<StripElliptic> poisson;
  std::unique_ptr<StripElliptic> helmholtz;
  double helmholtz_dt = -1.0;
  std::vector<double> slope, wall_d2w, kappa_lam, sponge;
  RegimeFlags flags;

  Impl(NSConfig c) : cfg(std::move(c)), grid(make_grid(cfg)), ft(grid.n1) {
    st = fd_stencils(grid.x2);
    poisson = std::make_unique<StripElliptic>(
        grid, cfg.domain, DomainScale::physical,
        StripElliptic::Spec{0.0, 1.0, StripElliptic::Wall::dirichlet,
                            StripElliptic::Top::dirichlet});
    slope.resize(grid.n1);
    wall_d2w.resize(grid.n1);
    kappa_lam.resize(grid.n1);
    for (int i = 0; i < grid.n1; ++i) {
      double x1 = grid.node_x1(i);
      auto wj = wall(cfg.domain, DomainScale::physical, x1);
      slope[i] = wj.dw;
      wall_d2w[i] = wj.d2w;
      double z1 = x1 / cfg.domain.epsilon;
      kappa_lam[i] = 2.0 * curvature(cfg.domain, z1, FrameScale::physical) +
                     cfg.lambda.value(x1);
    }
    double top = grid.x2.back();
    sponge.resize(grid.n2());
    for (int m = 0; m < grid.n2(); ++m) {
      double s = (grid.x2[m] - cfg.sponge_start) /
                 std::max(0.5 * (top - cfg.sponge_start), 1e-9);
      sponge[m] = cfg.sponge_strength * smoothstep(s);
    }
    double eps = cfg.domain.epsilon;
    flags.nu_in_window =
        cfg.nu <= cfg.nu_window_hi_c * std::pow(eps, 7.0) &&
        cfg.nu >= std::pow(eps, cfg.nu_window_exponent);
    flags.lambda_in_window =
        cfg.lambda.c2_magnitude() <=
        cfg.lambda_window_c * std::pow(eps, cfg.domain.alpha() - 1.0);
    double nut = cfg.nu / eps;
    double wall_dz = (grid.x2[1] - grid.x2[0]) / eps;  // rescaled units
    flags.resolved = wall_dz <= std::sqrt(nut) / 6.0 &&
                     grid.n1 >= 4 * cfg.domain.inv_epsilon();
  }

  static StripGrid make_grid(const NSConfig& c) {
    if (c.n1 < 8) throw InputError("NSConfig: grid too small");
    StripGrid g;
    g.n1 = c.n1;
    g.period = 1.0;
    if (!c.x2_nodes.empty()) {
      g.x2 = c.x2_nodes;
      return g;
    }
    if (c.n2 < 8) throw InputError("NSConfig: grid too small");
    double width = c.cluster_width;
    if (width < 0.0) {
      // Default clustering: within 3 sqrt(nu/eps) of the wall, capped inside
      // the domain.
      width = 3.0 * std::sqrt(c.nu / c.domain.epsilon);
      width = std::min(width, 0.25 * c.height);
    }
    g.x2 = width > 0.0 ? tanh_nodes(c.height, c.n2, width, c.cluster_frac)
                       : uniform_nodes(c.height, c.n2);
    return g;
  }

  const StripElliptic& helmholtz_for(double dt) {
    if (helmholtz_dt != dt) {
      helmholtz = std::make_unique<StripElliptic>(
          grid, cfg.domain, DomainScale::physical,
          StripElliptic::Spec{1.0, -cfg.nu * dt / 2.0,
                              StripElliptic::Wall::dirichlet,
                              StripElliptic::Top::dirichlet});
      helmholtz_dt = dt;
    }
    return *helmholtz;
  }

  void d1(const Field& f, Field& out) const {
    std::vector<double> row(grid.n1);
    for (int m = 0; m < grid.n2(); ++m) {
      for (int i = 0; i < grid.n1; ++i) row[i] = f.at(i, m);
      auto d = ft.derivative(row, grid.period);
      for (int i = 0; i < grid.n1; ++i) out.at(i, m) = d[i];
    }
  }
  void d2(const Field& f, Field& out) const {
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        double acc = 0.0;
        for (int q = 0; q < 3; ++q) acc += st.d1[m][q] * f.at(i, st.idx[m][q]);
        out.at(i, m) = acc;
      }
  }
  void d22(const Field& f, Field& out) const {
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        double acc = 0.0;
        for (int q = 0; q < 3; ++q) acc += st.d2[m][q] * f.at(i, st.idx[m][q]);
        out.at(i, m) = acc;
      }
  }

  // Flattened Laplacian with collocation operators.
  Field laplacian(const Field& f) const {
    Field out(grid), t2(grid), t22(grid), t12(grid);
    std::vector<double> row(grid.n1);
    for (int m = 0; m < grid.n2(); ++m) {
      for (int i = 0; i < grid.n1; ++i) row[i] = f.at(i, m);
      auto dd = ft.derivative(row, grid.period, 2);
      for (int i = 0; i < grid.n1; ++i) out.at(i, m) = dd[i];
    }
    d2(f, t2);
    d22(f, t22);
    d1(t2, t12);
    for (int i = 0; i < grid.n1; ++i) {
      double w1 = slope[i];
      for (int m = 0; m < grid.n2(); ++m)
        out.at(i, m) += (1.0 + w1 * w1) * t22.at(i, m) -
                        2.0 * w1 * t12.at(i, m) - wall_d2w[i] * t2.at(i, m);
    }
    return out;
  }

  Field psi_of(const Field& omega, double top_value) const {
    std::vector<double> wall0(grid.n1, 0.0);
    std::vector<double> top(grid.n1, top_value);
    return poisson->solve(&omega, &wall0, &top).to_field();
  }

  VectorField velocity_of(const Field& psi) const {
    VectorField u(grid);
    Field p2(grid), p1(grid);
    d2(psi, p2);
    d1(psi, p1);
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        u.c1.at(i, m) = -p2.at(i, m);
        u.c2.at(i, m) = p1.at(i, m) - slope[i] * p2.at(i, m);
      }
    return u;
  }

  // Advection + forcing curl + hooks + sponge: the explicit part. Only the
  // quadratic advection content is dealiased.
  Field explicit_rhs(const Field& omega, const VectorField& u, double t) const {
    Field g1(grid), g2(grid), out(grid);
    d1(omega, g1);
    d2(omega, g2);
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        std::size_t q = grid.index(i, m);
        double wx1 = g1.v[q] - slope[i] * g2.v[q];
        out.v[q] = -(u.c1.v[q] * wx1 + u.c2.v[q] * g2.v[q]);
      }
    std::vector<double> row(grid.n1);
    for (int m = 0; m < grid.n2(); ++m) {
      for (int i = 0; i < grid.n1; ++i) row[i] = out.at(i, m);
      auto r = ft.dealias(row);
      for (int i = 0; i < grid.n1; ++i) out.at(i, m) = r[i];
    }
    for (int i = 0; i < grid.n1; ++i) {
      double x1 = grid.node_x1(i);
      double w0 = wall(cfg.domain, DomainScale::physical, x1).w;
      for (int m = 0; m < grid.n2(); ++m) {
        std::size_t q = grid.index(i, m);
        double x2 = grid.x2[m] + w0;
        double src = cfg.forcing.curl(t, x1, x2);
        if (cfg.vorticity_source) src += cfg.vorticity_source(t, x1, x2);
        out.v[q] += src - sponge[m] * omega.v[q];
      }
    }
    return out;
  }

  std::vector<double> wall_vorticity_data(const VectorField& u,
                                          double t) const {
    std::vector<double> g(grid.n1);
    for (int i = 0; i < grid.n1; ++i) {
      double z1 = grid.node_x1(i) / cfg.domain.epsilon;
      auto fr = frame(cfg.domain, z1);
      double utau = u.c1.at(i, 0) * fr.tau[0] + u.c2.at(i, 0) * fr.tau[1];
      g[i] = kappa_lam[i] * utau;
      if (cfg.wall_bc_offset) g[i] += cfg.wall_bc_offset(t, grid.node_x1(i));
    }
    return g;
  }

  double wall_vorticity_integral(const Field& omega) const {
    double acc = 0.0;
    for (int i = 0; i < grid.n1; ++i) acc += omega.at(i, 0);
    return acc * grid.dx1();
  }

  void refresh_derived(NSState& s) const {
    s.psi = psi_of(s.omega, -s.momentum);
    s.u = velocity_of(s.psi);
  }

  double cfl_limit(const VectorField& u) const {
    double worst = 0.0;
    double h1 = grid.dx1();
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        double h2 = m + 1 < grid.n2() ? grid.x2[m + 1] - grid.x2[m]
                                      : grid.x2[m] - grid.x2[m - 1];
        worst = std::max(worst, std::abs(u.c1.at(i, m)) / h1 +
                                    std::abs(u.c2.at(i, m)) / h2);
      }
    return worst > 0 ? cfg.cfl / worst : 1e300;
  }
};

NSSolver::NSSolver(NSConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {}
NSSolver::~NSSolver() = default;
NSSolver::NSSolver(NSSolver&&) noexcept = default;

const NSConfig& NSSolver::config() const { return impl_->cfg; }
const StripGrid& NSSolver::grid() const { return impl_->grid; }
RegimeFlags NSSolver::regime() const { return impl_->flags; }

NSState NSSolver::init_state() const {
  NSState s;
  s.t = 0.0;
  s.omega = Field(impl_->grid);
  s.psi = Field(impl_->grid);
  s.u = VectorField(impl_->grid);
  return s;
}

void NSSolver::step(NSState& s, double dt) const {
  auto& im = *impl_;
  const StripGrid& g = im.grid;
  if (dt > im.cfl_limit(s.u) * (1.0 + 1e-9))
    throw TimeStepError("NS step: advective CFL violated");

  const StripElliptic& H = im.helmholtz_for(dt);
  Field lap_n = im.laplacian(s.omega);
  Field k1 = im.explicit_rhs(s.omega, s.u, s.t);

  auto momentum_at = [&](const Field& w_end, double& visc_out) {
    double i0 = im.wall_vorticity_integral(s.omega);
    double i1 = im.wall_vorticity_integral(w_end);
    double extra = 0.0;
    if (im.cfg.momentum_input_extra)
      extra = 0.5 * dt * (im.cfg.momentum_input_extra(s.t) +
                          im.cfg.momentum_input_extra(s.t + dt));
    visc_out = s.visc_momentum + im.cfg.nu * 0.5 * dt * (i0 + i1) + extra;
  };

  std::vector<double> top0(g.n1, 0.0);
  // Predictor with the lagged wall condition.
  Field rhs(g);
  for (std::size_t q = 0; q < rhs.v.size(); ++q)
    rhs.v[q] = s.omega.v[q] + 0.5 * im.cfg.nu * dt * lap_n.v[q] + dt * k1.v[q];
  auto wall_g = im.wall_vorticity_data(s.u, s.t + dt);
  NSState sp;
  sp.t = s.t + dt;
  sp.omega = H.solve(&rhs, &wall_g, &top0).to_field();
  momentum_at(sp.omega, sp.visc_momentum);
  sp.momentum = im.cfg.forcing.momentum_input(sp.t, im.cfg.height) +
                sp.visc_momentum;
  im.refresh_derived(sp);

  // Corrector, then iterate the wall condition to its fixed point.
  Field k2 = im.explicit_rhs(sp.omega, sp.u, sp.t);
  for (std::size_t q = 0; q < rhs.v.size(); ++q)
    rhs.v[q] = s.omega.v[q] + 0.5 * im.cfg.nu * dt * lap_n.v[q] +
               0.5 * dt * (k1.v[q] + k2.v[q]);
  NSState sn = std::move(sp);
  // Damped fixed point for the wall condition: the bare map contracts at
  // roughly |2 kappa + lambda| sqrt(nu dt), which can exceed 1 on strongly
  // curved walls.
  double max_kl = 0.0;
  for (double v : im.kappa_lam) max_kl = std::max(max_kl, std::abs(v));
  double theta = 1.0 / (1.0 + max_kl * std::sqrt(im.cfg.nu * dt));
  double scale = 1.0;
  bool converged = false;
  int iters = std::max(im.cfg.bc_max_iter,
                       static_cast<int>(std::ceil(40.0 / theta)));
  for (int it = 0; it < iters; ++it) {
    sn.omega = H.solve(&rhs, &wall_g, &top0).to_field();
    momentum_at(sn.omega, sn.visc_momentum);
    sn.momentum = im.cfg.forcing.momentum_input(s.t + dt, im.cfg.height) +
                  sn.visc_momentum;
    im.refresh_derived(sn);
    auto wg = im.wall_vorticity_data(sn.u, s.t + dt);
    double change = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      change = std::max(change, std::abs(wg[i] - wall_g[i]));
      scale = std::max(scale, std::abs(wg[i]));
      wall_g[i] = (1.0 - theta) * wall_g[i] + theta * wg[i];
    }
    if (change <= im.cfg.bc_tol * scale) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverError("NS step: wall-condition iteration did not converge");
  sn.t = s.t + dt;
  s = std::move(sn);
}

double NSSolver::energy(const NSState& s) const {
  return 0.5 * (inner(s.u.c1, s.u.c1) + inner(s.u.c2, s.u.c2));
}

EnergyBudget NSSolver::energy_budget(const NSState& a,
                                     const NSState& b) const {
  auto& im = *impl_;
  const StripGrid& g = im.grid;
  double dt = b.t - a.t;
  EnergyBudget out;
  out.dE = energy(b) - energy(a);

  auto terms_at = [&](const NSState& s, double& pf, double& ps, double& pw) {
    Field d1u1(g), d2u1(g), d1u2(g), d2u2(g);
    im.d1(s.u.c1, d1u1);
    im.d2(s.u.c1, d2u1);
    im.d1(s.u.c2, d1u2);
    im.d2(s.u.c2, d2u2);
    auto w2 = g.x2_weights();
    pf = ps = pw = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      double x1 = g.node_x1(i);
      double w0 = wall(im.cfg.domain, DomainScale::physical, x1).w;
      for (int m = 0; m < g.n2(); ++m) {
        std::size_t q = g.index(i, m);
        double ux1u1 = d1u1.v[q] - im.slope[i] * d2u1.v[q];
        double ux1u2 = d1u2.v[q] - im.slope[i] * d2u2.v[q];
        double d11 = ux1u1;
        double d22v = d2u2.v[q];
        double d12 = 0.5 * (d2u1.v[q] + ux1u2);
        ps += (d11 * d11 + d22v * d22v + 2 * d12 * d12) * w2[m];
        double x2 = g.x2[m] + w0;
        pf += (im.cfg.forcing.component(0, s.t, x1, x2) * s.u.c1.v[q] +
               im.cfg.forcing.component(1, s.t, x1, x2) * s.u.c2.v[q]) *
              w2[m];
      }
      double z1 = x1 / im.cfg.domain.epsilon;
      auto fr = frame(im.cfg.domain, z1);
      double utau = s.u.c1.at(i, 0) * fr.tau[0] + s.u.c2.at(i, 0) * fr.tau[1];
      pw += im.cfg.lambda.value(x1) * utau * utau * fr.bracket;
    }
    pf *= g.dx1();
    ps *= 2.0 * im.cfg.nu * g.dx1();
    pw *= im.cfg.nu * g.dx1();
  };
  double pf0, ps0, pw0, pf1, ps1, pw1;
  terms_at(a, pf0, ps0, pw0);
  terms_at(b, pf1, ps1, pw1);
  out.power_forcing = 0.5 * dt * (pf0 + pf1);
  out.power_strain = 0.5 * dt * (ps0 + ps1);
  out.power_friction = 0.5 * dt * (pw0 + pw1);
  return out;
}

std::vector<double> NSSolver::wall_tangential_speed(const NSState& s) const {
  auto& im = *impl_;
  std::vector<double> out(im.grid.n1);
  for (int i = 0; i < im.grid.n1; ++i) {
    double z1 = im.grid.node_x1(i) / im.cfg.domain.epsilon;
    auto fr = frame(im.cfg.domain, z1);
    out[i] = s.u.c1.at(i, 0) * fr.tau[0] + s.u.c2.at(i, 0) * fr.tau[1];
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>>
NSSolver::slip_residual_forms(const NSState& s) const {
  auto& im = *impl_;
  const StripGrid& g = im.grid;
  Field d1u1(g), d2u1(g), d1u2(g), d2u2(g);
  im.d1(s.u.c1, d1u1);
  im.d2(s.u.c1, d2u1);
  im.d1(s.u.c2, d1u2);
  im.d2(s.u.c2, d2u2);
  std::vector<double> r1(g.n1), r2(g.n1);
  for (int i = 0; i < g.n1; ++i) {
    double x1 = g.node_x1(i);
    double z1 = x1 / im.cfg.domain.epsilon;
    auto fr = frame(im.cfg.domain, z1);
    std::size_t q = g.index(i, 0);
    double ux1u1 = d1u1.v[q] - im.slope[i] * d2u1.v[q];
    double ux1u2 = d1u2.v[q] - im.slope[i] * d2u2.v[q];
    double D11 = ux1u1, D22 = d2u2.v[q], D12 = 0.5 * (d2u1.v[q] + ux1u2);
    double two_Dn_tau =
        2.0 * (D11 * fr.n[0] * fr.tau[0] + D12 * fr.n[0] * fr.tau[1] +
               D12 * fr.n[1] * fr.tau[0] + D22 * fr.n[1] * fr.tau[1]);
    double utau = s.u.c1.v[q] * fr.tau[0] + s.u.c2.v[q] * fr.tau[1];
    double lam = im.cfg.lambda.value(x1);
    r1[i] = two_Dn_tau + lam * utau;
    double omega_wall = ux1u2 - d2u1.v[q];
    r2[i] = im.kappa_lam[i] * utau - omega_wall;
  }
  return {r1, r2};
}

double NSSolver::vorticity_bc_equivalence(const NSState& s) const {
  auto [r1, r2] = slip_residual_forms(s);
  double worst = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i)
    worst = std::max(worst, std::abs(r1[i] - r2[i]));
  return worst;
}

RunResult NSSolver::run(const std::function<void(const NSState&)>& on_record,
                        int records) const {
  auto& im = *impl_;
  if (records < 2) throw InputError("NS run: records >= 2");
  RunResult out;
  out.flags = im.flags;
  NSState s = init_state();
  im.refresh_derived(s);

  double ledger = 0.0, max_term = 1e-300;
  auto record = [&](const NSState& st, double dt_used, double defect,
                    double dscale) {
    RunRecord r;
    r.t = st.t;
    r.energy = energy(st);
    r.u_l2 = std::sqrt(2.0 * r.energy);
    Field mag(im.grid);
    for (std::size_t q = 0; q < mag.v.size(); ++q)
      mag.v[q] = std::hypot(st.u.c1.v[q], st.u.c2.v[q]);
    r.u_linf = mag.max_abs();
    r.omega_linf = st.omega.max_abs();
    r.dt = dt_used;
    auto wt = wall_tangential_speed(st);
    for (double v : wt)
      r.wall_speed_max = std::max(r.wall_speed_max, std::abs(v));
    r.budget_defect = defect;
    r.budget_scale = dscale;
    out.records.push_back(r);
    if (on_record) on_record(st);
  };
  record(s, 0.0, 0.0, 0.0);

  double snap_dt = im.cfg.T0 / (records - 1);
  for (int rec = 1; rec < records; ++rec) {
    double target = rec * snap_dt;
    double defect_acc = 0.0, scale_acc = 0.0, dt_used = 0.0;
    while (s.t < target - 1e-13) {
      double dt = std::min({im.cfl_limit(s.u), im.cfg.dt_max, target - s.t});
      if (dt < im.cfg.dt_min)
        throw TimeStepError("NS run: time step collapsed");
      NSState before = s;
      step(s, dt);
      auto budget = energy_budget(before, s);
      ledger += budget.power_forcing - budget.power_strain -
                budget.power_friction;
      max_term = std::max({max_term, std::abs(ledger), energy(s)});
      defect_acc = std::max(defect_acc, std::abs(budget.defect()));
      scale_acc = std::max(scale_acc, budget.scale());
      dt_used = dt;
    }
    record(s, dt_used, defect_acc, scale_acc);
  }
  out.energy_drift = std::abs(energy(s) - ledger) / max_term;
  out.final_state = std::move(s);
  return out;
}

}  // namespace roughflow
