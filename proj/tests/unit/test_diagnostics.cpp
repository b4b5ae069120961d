#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "roughflow/diagnostics.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/halfplane.hpp"
#include "../support/random_fields.hpp"

using namespace roughflow;
namespace {
constexpr double kPi = std::numbers::pi;

RoughProfile default_profile() { return RoughProfile(2.0, {{1, {0.5, 0.0}}}); }
}  // namespace

TEST_CASE("weight function: boundary value, slope, limit, monotonicity") {
  for (double nu_t : {1e-2, 1e-4}) {
    for (double m : {1.0, 2.5}) {
      WeightSpec w{nu_t, m};
      CHECK(weight_phi(w, 0.0) == 0.0);
      // phi'(0) = sqrt(m), exactly from the closed form and confirmed by a
      // finite-difference probe.
      CHECK(weight_phi_deriv(w, 0.0) == doctest::Approx(std::sqrt(m)).epsilon(1e-13));
      double h = 1e-7 * std::sqrt(nu_t);
      double fd = (weight_phi(w, h) - weight_phi(w, 0.0)) / h;
      CHECK(fd == doctest::Approx(std::sqrt(m)).epsilon(1e-5));
      // phi(inf) = sqrt(nu_tilde pi / 2)
      CHECK(weight_phi(w, 1e6) ==
            doctest::Approx(std::sqrt(nu_t * kPi / 2)).epsilon(1e-12));
      CHECK(weight_phi_limit(w) ==
            doctest::Approx(std::sqrt(nu_t * kPi / 2)).epsilon(1e-14));
      // Monotone, bounded, and quadrature cross-check of the closed form.
      double prev = -1.0;
      for (int q = 0; q <= 10000; ++q) {
        double z = 3.0 * std::sqrt(nu_t) * q / 10000;
        double v = weight_phi(w, z);
        CHECK(v >= prev);
        CHECK(v <= weight_phi_limit(w) * (1 + 1e-14));
        prev = v;
      }
      double z0 = 1.7 * std::sqrt(nu_t);
      double quad = std::sqrt(nu_t) *
                    integrate_gk([&](double s) { return std::exp(-s * s / 2); },
                                 0.0, std::sqrt(m / nu_t) * z0, 1e-13);
      CHECK(weight_phi(w, z0) == doctest::Approx(quad).epsilon(1e-11));
    }
    // phi(z) >= 0.34 sqrt(nu_tilde) once z >= sqrt(nu_tilde), for m = 1.
    WeightSpec w1{nu_t, 1.0};
    CHECK(weight_phi(w1, std::sqrt(nu_t)) >= 0.34 * std::sqrt(nu_t));
    CHECK(weight_phi(w1, std::sqrt(nu_t)) ==
          doctest::Approx(0.8556 * std::sqrt(nu_t)).epsilon(1e-3));
  }
}

TEST_CASE("norms: zero field, unit box, exponential closed form, homogeneity") {
  DomainParams dom(0.125, 2, RoughProfile::flat(1e-12));
  StripGrid g;
  g.n1 = 16;
  g.period = 1.0;
  g.x2 = uniform_nodes(1.0, 2001);
  Field zero(g);
  for (auto kind : {NormKind::l2(), NormKind::linf(), NormKind::wexp(0.5),
                    NormKind::l2_phi({1e-3, 1.0}), NormKind::hs(2, 0.5)})
    CHECK(norm(zero, kind, dom, DomainScale::physical) == 0.0);

  Field one(g);
  for (auto& v : one.v) v = 1.0;
  CHECK(norm(one, NormKind::l2(), dom, DomainScale::physical) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // f = e^{-x2/eps}: squared weighted norm = eps / (2 (1 - gamma)).
  double gamma = 0.4, eps = dom.epsilon;
  StripGrid gf;
  gf.n1 = 8;
  gf.period = 1.0;
  gf.x2 = uniform_nodes(1.0, 20001);
  Field f(gf);
  for (int i = 0; i < gf.n1; ++i)
    for (int m = 0; m < gf.n2(); ++m)
      f.at(i, m) = std::exp(-gf.x2[m] / eps);
  double have = norm(f, NormKind::wexp(gamma), dom, DomainScale::physical);
  CHECK(have * have ==
        doctest::Approx(eps / (2 * (1 - gamma))).epsilon(1e-5));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field r(g);
  for (auto& v : r.v) v = u(rng);
  Field r3 = r;
  r3 *= -3.5;
  for (auto kind : {NormKind::l2(), NormKind::linf(), NormKind::wexp(0.3)}) {
    double a = norm(r, kind, dom, DomainScale::physical);
    double b = norm(r3, kind, dom, DomainScale::physical);
    CHECK(b == doctest::Approx(3.5 * a).epsilon(1e-12));
  }
}

TEST_CASE("trace inequality: equality case, degenerate case, random fields") {
  DomainParams flat(0.125, 2, RoughProfile::flat(1e-12));
  // f = e^{-x2}: LHS = 1, ||f||^2 = ||d2 f||^2 = 1/2, C = sqrt(2): ratio 1.
  auto fexp = [](const Jet2&, const Jet2& x2) { return exp(-1.0 * x2); };
  auto r = trace_inequality_check(fexp, flat, 16, 0, 25.0);
  CHECK(!r.degenerate);
  CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.pass());

  auto fzero = [](const Jet2&, const Jet2&) { return Jet2(0.0); };
  CHECK(trace_inequality_check(fzero, flat, 8, 0, 10.0).degenerate);

  DomainParams rough(0.125, 2, default_profile());
  std::mt19937_64 rng(11);
  for (int it = 0; it < 20; ++it) {
    auto f = roughflow::testing::random_decaying_scalar(rng);
    auto c = trace_inequality_check(f, rough, 24, 0, 30.0);
    CHECK(c.pass());
    CHECK(c.ratio < 1.01);
  }
}

TEST_CASE("curl trace inequality and gradient-curl corollary") {
  DomainParams flat(0.125, 2, RoughProfile::flat(1e-12));
  // v = (e^{-z2}, 0) comes from the stream Phi = e^{-z2} - 1 (wall at 0).
  auto stream = [](const Jet2&, const Jet2& z2) {
    return exp(-1.0 * z2) - 1.0;
  };
  auto c = curl_trace_check(stream, flat, 8, 0, 30.0);
  CHECK(!c.degenerate);
  CHECK(c.ratio <= 1.0 + 3 * c.error_est + 1e-9);

  DomainParams rough(0.125, 2, default_profile());
  std::mt19937_64 rng(21);
  for (int it = 0; it < 12; ++it) {
    auto phi = roughflow::testing::random_admissible_stream(rng, rough);
    auto a = curl_trace_check(phi, rough, 16, 0, 30.0);
    CHECK(a.pass());
    auto b = grad_curl_check(phi, rough, 16, 0, 30.0);
    CHECK(b.pass());
  }
}

TEST_CASE("curl trace field variant rejects inadmissible fields") {
  DomainParams rough(0.25, 2, default_profile());
  StripGrid g;
  g.n1 = 16;
  g.period = 1.0 / rough.epsilon;
  g.x2 = uniform_nodes(6.0, 121);
  VectorField bad(g);
  for (auto& v : bad.c1.v) v = 1.0;
  for (auto& v : bad.c2.v) v = 1.0;
  CHECK_THROWS_AS(curl_trace_check_field(bad, rough), InputError);
}

TEST_CASE("stretch identity: zero, constant-u, random pairs, refinement") {
  DomainParams flat(0.125, 2, RoughProfile::flat(1e-12));
  auto zero = [](const Jet2&, const Jet2&) { return Jet2(0.0); };
  auto any = [](const Jet2& z1, const Jet2& z2) {
    return cos(2 * kPi * 0.125 * z1) * (1.0 - exp(-1.0 * z2)) * exp(-0.7 * z2);
  };
  auto c0 = stretch_identity_check(zero, any, flat, 8, 101, 20.0);
  CHECK(c0.discrepancy == 0.0);

  // u = (1, 0): stream Phi_u = -z2; both sides vanish for tangent v, so the
  // discrepancy is the raw quadrature error of integrating zero.
  auto uconst = [](const Jet2&, const Jet2& z2) { return -1.0 * z2; };
  auto c1 = stretch_identity_check(any, uconst, flat, 16, 201, 25.0);
  CHECK(c1.discrepancy < 1e-7);

  DomainParams rough(0.125, 2, default_profile());
  std::mt19937_64 rng(31);
  for (int it = 0; it < 8; ++it) {
    auto sv = roughflow::testing::random_admissible_stream(rng, rough);
    auto su = roughflow::testing::random_admissible_stream(rng, rough);
    auto ref = stretch_identity_check(sv, su, rough, 64, 1601, 25.0);
    CHECK(ref.normalized() < 1e-6);
    auto fine = stretch_identity_check(sv, su, rough, 64, 3201, 25.0);
    // 4th-order quadrature: expect ~16x; allow slack for round-off floors.
    if (ref.normalized() > 1e-12)
      CHECK(fine.normalized() < ref.normalized() / 6.0);
  }
}

TEST_CASE("rescaled norm: closed form and parameter validation") {
  DomainParams flat(0.125, 2, RoughProfile::flat(1e-12));
  double gamma = 0.4;
  auto prof = [](double, double, double z2) { return std::exp(-z2); };
  double have = rescaled_l2_norm(prof, 1.0, gamma, flat, 8);
  double want = std::sqrt(flat.epsilon / (2 * (1 - gamma)));
  CHECK(have == doctest::Approx(want).epsilon(1e-8));
  CHECK_THROWS_AS(rescaled_l2_norm(prof, 1.0, 1.1, flat, 8), InputError);
}

TEST_CASE("rate_fit: exact powers, noisy slope, arity") {
  std::vector<std::pair<double, double>> pts;
  for (double e : {0.25, 0.125, 0.0625, 0.03125}) pts.push_back({e, e * e});
  auto f = rate_fit(pts);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<std::pair<double, double>> noisy;
  for (double e : {0.25, 0.125, 0.0625, 0.03125})
    noisy.push_back({e, 3.0 * std::sqrt(e) * (1.0 + noise(rng))});
  auto g = rate_fit(noisy);
  CHECK(g.slope > 0.45);
  CHECK(g.slope < 0.55);

  CHECK_THROWS_AS(rate_fit({{0.5, 1.0}, {0.25, 0.5}}), InputError);
  CHECK_THROWS_AS(rate_fit({{0.5, 1.0}, {0.25, 0.5}, {0.125, -0.1}}),
                  InputError);
}
