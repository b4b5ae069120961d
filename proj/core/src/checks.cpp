#include "roughflow/checks.hpp"

#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/ns.hpp"
#include "roughflow/taylor_jet.hpp"

namespace roughflow {

namespace {
constexpr double kPi = std::numbers::pi;
}

ScalarJetField random_decaying_scalar(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), beta(0.5, 2.5),
      phase(0.0, 2 * kPi);
  struct Term {
    double a, b, th;
    int j;
  };
  std::vector<Term> terms;
  for (int j = 0; j <= 3; ++j)
    terms.push_back({amp(rng), beta(rng), phase(rng), j});
  return [terms](const Jet2& x1, const Jet2& x2) {
    Jet2 acc(0.0);
    for (auto& t : terms)
      acc = acc + t.a * cos(2 * kPi * t.j * x1 + t.th) * exp(-t.b * x2);
    return acc;
  };
}

ScalarJetField random_admissible_stream(std::mt19937_64& rng,
                                        const DomainParams& dom) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), beta(0.5, 1.5),
      phase(0.0, 2 * kPi);
  struct Term {
    double a, b, th;
    int j;
  };
  std::vector<Term> terms;
  for (int j = 0; j <= 2; ++j)
    terms.push_back({amp(rng), beta(rng), phase(rng), j});
  double eps = dom.epsilon;
  RoughProfile prof = dom.profile;
  double ea = dom.eps_alpha();
  return [terms, eps, prof, ea](const Jet2& z1, const Jet2& z2) {
    Jet2 wallj = ea * profile_jet(prof, z1);
    Jet2 y = z2 - wallj;  // wall-fitted height, zero on the boundary
    Jet2 acc(0.0);
    for (auto& t : terms) {
      Jet2 g = (1.0 - exp(-0.8 * y)) * exp(-t.b * y);
      acc = acc + t.a * cos(2 * kPi * t.j * eps * z1 + t.th) * g;
    }
    return acc;
  };
}

std::vector<CheckRecord> run_trace_suite(const DomainParams& dom, int count,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckRecord> out;
  for (int it = 0; it < count; ++it) {
    auto f = random_decaying_scalar(rng);
    auto c = trace_inequality_check(f, dom, 24, 0, 30.0);
    out.push_back({"trace_plain/" + std::to_string(it), c.ratio,
                   1.0 + 3.0 * c.error_est, c.pass()});
  }
  for (int it = 0; it < count; ++it) {
    auto phi = random_admissible_stream(rng, dom);
    auto a = curl_trace_check(phi, dom, 16, 0, 30.0);
    out.push_back({"trace_curl/" + std::to_string(it), a.ratio,
                   1.0 + 3.0 * a.error_est, a.pass()});
    auto b = grad_curl_check(phi, dom, 16, 0, 30.0);
    out.push_back({"grad_curl/" + std::to_string(it), b.ratio,
                   1.0 + 3.0 * b.error_est, b.pass()});
  }
  return out;
}

std::vector<CheckRecord> run_identity_suite(const DomainParams& dom, int count,
                                            std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::vector<CheckRecord> out;
  for (int it = 0; it < count; ++it) {
    auto sv = random_admissible_stream(rng, dom);
    auto su = random_admissible_stream(rng, dom);
    auto ref = stretch_identity_check(sv, su, dom, 64, 1601, 25.0);
    out.push_back({"stretch/" + std::to_string(it), ref.normalized(), tol,
                   ref.normalized() < tol});
    if (it == 0) {
      // One refinement probe: 4th-order quadrature should shrink >= 6x.
      auto fine = stretch_identity_check(sv, su, dom, 64, 3201, 25.0);
      bool ok = fine.normalized() < ref.normalized() / 6.0 ||
                ref.normalized() < 1e-12;
      out.push_back({"stretch_refinement", fine.normalized(),
                     ref.normalized() / 6.0, ok});
    }
  }
  return out;
}

std::vector<CheckRecord> run_slip_equivalence_suite(const DomainParams& dom,
                                                    int count,
                                                    std::uint64_t seed,
                                                    double tol) {
  std::mt19937_64 rng(seed);
  NSConfig cfg(dom);
  cfg.n1 = 32;
  cfg.n2 = 201;
  cfg.height = 6.0;
  cfg.cluster_width = 0.0;
  cfg.lambda = FrictionSpec(1.0, {{1, {0.3, 0.1}}});
  NSSolver solver(std::move(cfg));
  const StripGrid& g = solver.grid();
  std::vector<CheckRecord> out;
  for (int it = 0; it < count; ++it) {
    // Physical-domain stream: wall-vanishing potential of the fast variable.
    auto phi = random_admissible_stream(rng, dom);
    auto s = solver.init_state();
    double eps = dom.epsilon;
    for (int i = 0; i < g.n1; ++i) {
      double z1 = g.node_x1(i) / eps;
      for (int m = 0; m < g.n2(); ++m) {
        double z2 = (g.x2[m] + wall(dom, DomainScale::physical,
                                    g.node_x1(i)).w) / eps;
        Jet2 p = phi(Jet2::var_x(z1), Jet2::var_y(z2));
        // velocity of the rescaled stream, carried to physical variables
        s.u.c1.at(i, m) = -p.deriv(0, 1);
        s.u.c2.at(i, m) = p.deriv(1, 0);
      }
    }
    double scale = std::max(1e-300, s.u.c1.max_abs() + s.u.c2.max_abs());
    double d = solver.vorticity_bc_equivalence(s) / scale;
    out.push_back(
        {"slip_forms/" + std::to_string(it), d, tol, d < tol});
  }
  return out;
}

std::vector<CheckRecord> run_weight_suite(double nu_tilde, double m) {
  WeightSpec w{nu_tilde, m};
  std::vector<CheckRecord> out;
  out.push_back({"weight_zero_at_wall", std::abs(weight_phi(w, 0.0)), 0.0,
                 weight_phi(w, 0.0) == 0.0});
  double slope_err = std::abs(weight_phi_deriv(w, 0.0) - std::sqrt(m));
  out.push_back({"weight_wall_slope", slope_err, 1e-12, slope_err < 1e-12});
  double limit_err =
      std::abs(weight_phi(w, 1e9) - std::sqrt(nu_tilde * kPi / 2));
  out.push_back({"weight_far_limit", limit_err, 1e-10, limit_err < 1e-10});
  bool monotone = true, bounded = true;
  double prev = -1.0;
  for (int q = 0; q <= 10000; ++q) {
    double z = 4.0 * std::sqrt(nu_tilde) * q / 10000;
    double v = weight_phi(w, z);
    monotone &= v >= prev;
    bounded &= v <= weight_phi_limit(w) * (1 + 1e-14);
    prev = v;
  }
  out.push_back({"weight_monotone", monotone ? 1.0 : 0.0, 1.0, monotone});
  out.push_back({"weight_bounded", bounded ? 1.0 : 0.0, 1.0, bounded});
  if (m == 1.0) {
    double v = weight_phi(w, std::sqrt(nu_tilde));
    out.push_back({"weight_lower_bound", v, 0.34 * std::sqrt(nu_tilde),
                   v >= 0.34 * std::sqrt(nu_tilde)});
  }
  return out;
}

std::vector<CheckRecord> run_scaling_flat_check(double gamma) {
  std::vector<CheckRecord> out;
  for (double eps : {0.25, 0.125}) {
    DomainParams dom(eps, 2, RoughProfile::flat(1e-12));
    auto prof = [](double, double, double z2) { return std::exp(-z2); };
    double have = rescaled_l2_norm(prof, 1.0, gamma, dom, 8);
    double want = std::sqrt(eps / (2 * (1 - gamma)));
    double err = std::abs(have - want) / want;
    out.push_back({"scaling_flat_closed_form/eps=" + std::to_string(eps), err,
                   1e-8, err < 1e-8});
  }
  return out;
}

}  // namespace roughflow
