#include <chrono>
#include <cmath>
#include <future>

#include "roughflow/errors.hpp"
#include "roughflow/expansion.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/harness.hpp"
#include "roughflow/strip_elliptic.hpp"

namespace roughflow {

namespace {

// Wall-clustered study grid: uniform sqrt(nu eps)/6 cells across the viscous
// sublayer, then geometric growth (~15 points per decade), which also
// resolves the eps-thick inviscid layer.
std::vector<double> study_nodes(double eps, double nu, double height) {
  double layer = std::sqrt(nu * eps);
  double hw = std::min(layer / 6.0, eps / 16.0);
  return stretched_nodes(hw, 12.0 * layer, height, 1.07);
}

Field discrete_curl(const VectorField& u, const DomainParams& dom) {
  const StripGrid& g = u.grid();
  RealFourier ft(g.n1);
  auto st = fd_stencils(g.x2);
  Field curl(g);
  std::vector<double> row(g.n1);
  for (int m = 0; m < g.n2(); ++m) {
    for (int i = 0; i < g.n1; ++i) row[i] = u.c2.at(i, m);
    auto d = ft.derivative(row, g.period);
    for (int i = 0; i < g.n1; ++i) curl.at(i, m) = d[i];
  }
  for (int i = 0; i < g.n1; ++i) {
    double dw = wall(dom, DomainScale::physical, g.node_x1(i)).dw;
    for (int m = 0; m < g.n2(); ++m) {
      double d2c1 = 0.0, d2c2 = 0.0;
      for (int q = 0; q < 3; ++q) {
        d2c1 += st.d1[m][q] * u.c1.at(i, st.idx[m][q]);
        d2c2 += st.d1[m][q] * u.c2.at(i, st.idx[m][q]);
      }
      curl.at(i, m) += -dw * d2c2 - d2c1;
    }
  }
  return curl;
}

SweepResult run_pair(const RunConfig& cfg, const ApproximationBundle& bundle,
                     double eps, double nu) {
  auto t0 = std::chrono::steady_clock::now();
  const DomainParams& dom = bundle.domain();
  SweepResult r;
  r.epsilon = eps;
  r.nu = nu;
  r.alpha = dom.alpha();
  r.N = bundle.order();
  r.T0 = cfg.T0;

  NSConfig ns(dom);
  ns.nu = nu;
  ns.lambda = cfg.lambda();
  ns.forcing = cfg.forcing;
  ns.n1 = std::max(32, cfg.ns_per_period * dom.inv_epsilon());
  ns.x2_nodes = study_nodes(eps, nu, cfg.ns_height);
  ns.height = cfg.ns_height;
  ns.T0 = cfg.T0;
  ns.cfl = cfg.ns_cfl;
  ns.theorem_mode = cfg.theorem_mode;
  r.grid_x1 = ns.n1;
  r.grid_x2 = static_cast<int>(ns.x2_nodes.size());

  NSSolver solver(std::move(ns));
  const StripGrid& grid = solver.grid();
  auto flags = solver.regime();
  r.resolved = flags.resolved;

  double q_l2 = 0.0, q_linf = 0.0, q_curl = 0.0;
  auto on_record = [&](const NSState& s) {
    VectorField ua = bundle.velocity(grid, std::min(s.t, cfg.T0));
    Field dmag(grid);
    for (std::size_t q = 0; q < dmag.v.size(); ++q)
      dmag.v[q] = std::hypot(s.u.c1.v[q] - ua.c1.v[q],
                             s.u.c2.v[q] - ua.c2.v[q]);
    q_linf = std::max(q_linf, dmag.max_abs());
    q_l2 = std::max(q_l2, l2_norm(dmag) / std::sqrt(eps));
    Field ca = discrete_curl(ua, dom);
    for (std::size_t q = 0; q < ca.v.size(); ++q)
      ca.v[q] = s.omega.v[q] - ca.v[q];
    // One-sided double-difference rows carry no curl information.
    for (int i = 0; i < grid.n1; ++i) {
      ca.at(i, 0) = 0.0;
      ca.at(i, grid.n2() - 1) = 0.0;
    }
    q_curl = std::max(q_curl, eps * ca.max_abs());
  };
  auto run = solver.run(on_record, cfg.ns_records);
  r.q_l2_scaled = q_l2;
  r.q_linf = q_linf;
  r.q_curl_scaled = q_curl;

  StripGrid eval = default_eval_grid(dom, 6.0, cfg.ns_per_period);
  auto rr = residual_curl(bundle, cfg.forcing, eval, 0.7 * cfg.T0);
  r.resid_linf = rr.linf;
  r.resid_l2 = rr.l2;

  r.status = flags.resolved ? "ok" : "extrapolated";
  r.runtime_s = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<SweepResult> run_sweep(const RunConfig& cfg,
                                   const ProgressFn& progress) {
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  // The base flow lives in the flat domain and is shared across the sweep.
  StripGrid eg;
  eg.n1 = cfg.euler_n1;
  eg.period = 1.0;
  eg.x2 = uniform_nodes(cfg.euler_height, cfg.euler_n2);
  say("solving the base flow");
  auto base = solve_euler_base(eg, cfg.forcing, cfg.T0, cfg.snapshots);

  struct Slot {
    double eps, nu;
    const ApproximationBundle* bundle;
  };
  std::vector<std::unique_ptr<ApproximationBundle>> bundles;
  std::vector<Slot> slots;
  for (std::size_t q = 0; q < cfg.epsilons.size(); ++q) {
    double eps = cfg.epsilons[q];
    say("building the approximation for epsilon = " + std::to_string(eps));
    bundles.push_back(std::make_unique<ApproximationBundle>(
        cfg.domain(eps), base,
        ApproximationBundle::Build{cfg.N, {}, 1e-10}));
    slots.push_back({eps, cfg.nu_for(eps, q), bundles.back().get()});
  }

  std::vector<SweepResult> out(slots.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t q = next.fetch_add(1);
      if (q >= slots.size()) return;
      const auto& s = slots[q];
      say("running pair epsilon = " + std::to_string(s.eps) +
          ", nu = " + std::to_string(s.nu));
      try {
        out[q] = run_pair(cfg, *s.bundle, s.eps, s.nu);
      } catch (const std::exception& e) {
        SweepResult r;
        r.epsilon = s.eps;
        r.nu = s.nu;
        r.alpha = 1.0 / cfg.n0;
        r.N = cfg.N;
        r.T0 = cfg.T0;
        r.status = std::string("error: ") + e.what();
        out[q] = std::move(r);
      }
    }
  };
  int degree = std::max(1, std::min<int>(cfg.parallel,
                                         static_cast<int>(slots.size())));
  if (degree == 1) {
    worker();
  } else {
    std::vector<std::future<void>> pool;
    for (int w = 0; w < degree; ++w)
      pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }
  return out;
}

}  // namespace roughflow
