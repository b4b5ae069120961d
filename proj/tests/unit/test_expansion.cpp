#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "roughflow/diagnostics.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/expansion.hpp"

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

StripGrid euler_grid() {
  StripGrid g;
  g.n1 = 64;
  g.period = 1.0;
  g.x2 = uniform_nodes(8.0, 257);
  return g;
}

struct Study {
  DomainParams dom;
  std::vector<EulerState> base;
  std::unique_ptr<ApproximationBundle> bundle;
};

const Study& study() {
  static Study s = [] {
    Study st{DomainParams(0.25, 2, default_profile()), {}, nullptr};
    st.base = solve_euler_base(euler_grid(), default_forcing(), 0.5, 17);
    st.bundle = std::make_unique<ApproximationBundle>(
        st.dom, st.base, ApproximationBundle::Build{3, {}, 1e-10});
    return st;
  }();
  return s;
}
}  // namespace

TEST_CASE("zero data gives a zero bundle") {
  DomainParams dom(0.25, 2, default_profile());
  auto base = solve_euler_base(euler_grid(), ForcingSpec{}, 0.3, 5);
  auto b = build_uapp(3, dom, base);
  StripGrid eval = default_eval_grid(dom, 4.0);
  for (double t : {0.1, 0.25}) {
    auto u = b.velocity(eval, t);
    CHECK(u.c1.max_abs() < 1e-14);
    CHECK(u.c2.max_abs() < 1e-14);
  }
  auto rr = residual_curl(b, ForcingSpec{}, eval, 0.15);
  CHECK(rr.linf == 0.0);
  CHECK(rr.l2 == 0.0);
}

TEST_CASE("orders up to n0 carry no interior correction") {
  const auto& st = study();
  auto b2 = build_uapp(2, st.dom, st.base);
  StripGrid eval = default_eval_grid(st.dom, 4.0);
  auto corr = b2.interior_correction(eval, 0.4);
  CHECK(corr.c1.max_abs() == 0.0);
  CHECK(corr.c2.max_abs() == 0.0);
  // The layer of a N <= n0 bundle is the order-1 gradient layer only.
  auto lay = b2.layer_velocity(eval, 0.4);
  CHECK(lay.c1.max_abs() > 0.0);
}

TEST_CASE("N above n0+1 is rejected until higher jets exist") {
  const auto& st = study();
  CHECK_THROWS_AS(build_uapp(4, st.dom, st.base), DependencyError);
}

TEST_CASE("h^3 from the general machinery matches its separable form") {
  const auto& st = study();
  const auto& b = *st.bundle;
  double eta_mean = st.dom.profile.mean();
  double C1 = b.layer_flux_constant();
  for (double t : {0.2, 0.45}) {
    auto h = b.h_table(3).eval(t);
    auto bfac = b.trace_factor_b(t, (int)h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
      CHECK(h[i] == doctest::Approx((eta_mean - C1) * bfac[i]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("corrector trace meets h^3 and the bundle reports finite defects") {
  const auto& st = study();
  const auto& b = *st.bundle;
  const auto& u3 = b.corrector();
  REQUIRE(!u3.empty());
  for (std::size_t s = 2; s < u3.size(); s += 7) {
    auto h = b.h_table(3).eval(u3[s].t);
    double worst = 0.0;
    for (int i = 0; i < u3[s].u.grid().n1; ++i)
      worst = std::max(worst, std::abs(u3[s].u.c2.at(i, 0) - h[i]));
    CHECK(worst < 1e-10);
  }
  double bd = b.boundary_defect(0.4, 256);
  CHECK(bd < 5e-3);  // Taylor remainder of order eps^{alpha(N+1)} = eps^2
  StripGrid eval = default_eval_grid(st.dom, 4.0);
  double dd = b.divergence_defect(eval, 0.4);
  CHECK(std::isfinite(dd));
}

TEST_CASE("layer evaluation matches the per-sample profiles at aligned nodes") {
  const auto& st = study();
  const auto& b = *st.bundle;
  const StripGrid& cg = b.cell().grid();
  // x1 = 0 is simultaneously a trace sample and the z1 = 0 collocation
  // point; choosing x2 nodes as eps * (cell nodes) makes the vertical
  // interpolation exact as well.
  StripGrid eval;
  eval.period = 1.0;
  eval.n1 = 64;
  int n2e = 60;
  eval.x2.resize(n2e);
  for (int m = 0; m < n2e; ++m) eval.x2[m] = st.dom.epsilon * cg.x2[m];
  int t_index = 8;
  double t = b.base()[t_index].t;
  auto lay = b.layer_velocity(eval, t);
  auto p1 = b.layer_profile(1, 0, t_index);
  auto p3 = b.layer_profile(3, 0, t_index);
  double ea = st.dom.eps_alpha();
  double amp3 = std::pow(ea, 3);
  for (int m = 0; m < n2e; m += 7) {
    double want1 = ea * p1->v.c1.at(0, m) + amp3 * p3->v.c1.at(0, m);
    double want2 = ea * p1->v.c2.at(0, m) + amp3 * p3->v.c2.at(0, m);
    CHECK(lay.c1.at(0, m) == doctest::Approx(want1).epsilon(1e-10).scale(1e-6));
    CHECK(lay.c2.at(0, m) == doctest::Approx(want2).epsilon(1e-10).scale(1e-6));
  }
}

TEST_CASE("residual resolution guard triggers on coarse wall grids") {
  const auto& st = study();
  StripGrid coarse;
  coarse.period = 1.0;
  coarse.n1 = 64;
  coarse.x2 = uniform_nodes(4.0, 33);  // wall spacing far above eps/4
  CHECK_THROWS_AS(residual_curl(*st.bundle, default_forcing(), coarse, 0.3),
                  ResolutionError);
}

TEST_CASE("layer curl structure: gradient layer is curl-free, order-3 bounded") {
  const auto& st = study();
  auto [curl_max, amp] = st.bundle->layer_curl_structure(0.4);
  double ea = st.dom.eps_alpha();
  int N = st.bundle->order(), n0 = st.dom.n0;
  double bound = 10.0 * std::pow(ea, N + 1 - n0) * amp;
  CHECK(curl_max > 0.0);
  CHECK(curl_max <= bound);
}

TEST_CASE("layer cache serves per-sample profiles") {
  const auto& st = study();
  auto p = st.bundle->layer_profile(1, 3, 8);
  REQUIRE(p != nullptr);
  auto p2 = st.bundle->layer_profile(1, 3, 8);
  CHECK(p.get() == p2.get());  // cached
  // The profile is the unit layer scaled by the trace factor at that sample.
  auto a = st.bundle->trace_factor_a(st.bundle->base()[8].t, 64);
  const auto& psi1 = st.bundle->psi1_unit();
  Field unit = psi1.to_field();
  double f = a[3];
  for (int i = 0; i < 8; ++i)
    CHECK(p->psi.at(i * 7, 10) ==
          doctest::Approx(f * unit.at(i * 7, 10)).epsilon(1e-12).scale(1e-8));
  CHECK_THROWS_AS(st.bundle->layer_profile(2, 0, 0), DependencyError);
}
