#include <doctest.h>

#include <cmath>
#include <random>

#include "roughflow/errors.hpp"
#include "roughflow/halfplane.hpp"

using namespace roughflow;

namespace {
// FD oracle: solve (d^2 - k^2) G = delta(z - y0) on [0, L], G(0) = 0, G decaying,
// by a dense tridiagonal solve with the delta collocated on the grid.
double fd_green_oracle(double k, double z_eval, double y0, int n, double L) {
  double h = L / n;
  std::vector<double> a(n - 1), b(n - 1), c(n - 1), r(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    double z = (i + 1) * h;
    a[i] = 1.0 / (h * h);
    b[i] = -2.0 / (h * h) - k * k;
    c[i] = 1.0 / (h * h);
    r[i] = std::abs(z - y0) < h / 2 ? 1.0 / h : 0.0;  // discrete delta
  }
  // Thomas algorithm; G(L) = 0 approximates decay.
  for (int i = 1; i < n - 1; ++i) {
    double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  std::vector<double> g(n - 1);
  g[n - 2] = r[n - 2] / b[n - 2];
  for (int i = n - 3; i >= 0; --i) g[i] = (r[i] - c[i] * g[i + 1]) / b[i];
  int idx = static_cast<int>(std::round(z_eval / h)) - 1;
  return g[idx];
}
}  // namespace

TEST_CASE("green_dirichlet: boundary value, symmetry, frozen value") {
  CHECK(green_dirichlet(1.0, 0.0, 2.0) == 0.0);
  CHECK(green_dirichlet(2.0, 1.0, 3.0) ==
        doctest::Approx(green_dirichlet(2.0, 3.0, 1.0)).epsilon(1e-15));
  // (k=1, z=2, y=1) = -e^{-2} sinh(1) ~ -0.159003
  CHECK(green_dirichlet(1.0, 2.0, 1.0) ==
        doctest::Approx(-std::exp(-2.0) * std::sinh(1.0)).epsilon(1e-15));
  CHECK(green_dirichlet(1.0, 2.0, 1.0) == doctest::Approx(-0.159).epsilon(1e-3));
  CHECK_THROWS_AS(green_dirichlet(0.0, 1.0, 1.0), InputError);
}

TEST_CASE("green_dirichlet agrees with the FD delta-solve oracle") {
  double v = fd_green_oracle(1.0, 2.0, 1.0, 6000, 30.0);
  CHECK(green_dirichlet(1.0, 2.0, 1.0) == doctest::Approx(v).epsilon(2e-3));
}

TEST_CASE("green kernel bound with c0 = 1/2") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uz(0.0, 12.0);
  for (double k : {0.7, 1.0, 2.0, 6.0, 12.5}) {
    for (int it = 0; it < 400; ++it) {
      double z = uz(rng), y = uz(rng);
      double bound = (1.0 / std::abs(k)) * std::exp(-0.5 * std::abs(k) * std::abs(z - y));
      CHECK(std::abs(green_dirichlet(k, z, y)) <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("poisson_dirichlet_mode: zero source, closed forms") {
  auto zero = ModeFunction::zero(1.0);
  auto psi0 = poisson_dirichlet_mode(1.0, zero);
  for (double z : {0.0, 0.5, 2.0}) CHECK(psi0(z) == doctest::Approx(0.0));

  // k=1, F = e^{-y}: Psi(z) = -(z/2) e^{-z}
  ModeFunction F1{1.0, [](double y) { return std::exp(-y); }};
  auto psi1 = poisson_dirichlet_mode(1.0, F1);
  for (double z : {0.0, 0.3, 1.0, 2.5, 5.0})
    CHECK(psi1(z) == doctest::Approx(-(z / 2) * std::exp(-z)).epsilon(1e-10));

  // k=2, F = e^{-3y}: Psi(z) = (e^{-3z} - e^{-2z}) / 5
  ModeFunction F2{2.0, [](double y) { return std::exp(-3 * y); }};
  auto psi2 = poisson_dirichlet_mode(2.0, F2);
  for (double z : {0.0, 0.4, 1.2, 3.0})
    CHECK(psi2(z) ==
          doctest::Approx((std::exp(-3 * z) - std::exp(-2 * z)) / 5).epsilon(1e-10));

  CHECK_THROWS_AS(poisson_dirichlet_mode(0.0, F1), InputError);
  ModeFunction bad{1.0, [](double) { return 1.0; }};
  CHECK_THROWS_AS(poisson_dirichlet_mode(1.0, bad), DecayError);
}

TEST_CASE("poisson_dirichlet_mode satisfies the mode ODE") {
  ModeFunction F{1.5, [](double y) { return std::exp(-2 * y) * std::cos(y); }};
  auto psi = poisson_dirichlet_mode(1.5, F);
  double fscale = 1.0;
  for (double z : {0.5, 1.0, 2.0, 4.0}) {
    double r = mode_ode_residual(1.5, psi, F, z);
    CHECK(std::abs(r) < 1e-8 * fscale);
  }
  CHECK(psi(0.0) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("neumann_flat_mode: homogeneous closed forms") {
  auto zero1 = ModeFunction::zero(1.0);
  // k=1, S=0, g=1 -> psi = -e^{-z}
  auto p1 = neumann_flat_mode(1.0, 1.0, zero1);
  for (double z : {0.0, 0.7, 2.0})
    CHECK(p1(z) == doctest::Approx(-std::exp(-z)).epsilon(1e-12));
  // k=3, S=0, g=-3 -> psi = e^{-3z}
  auto p3 = neumann_flat_mode(3.0, -3.0, ModeFunction::zero(3.0));
  for (double z : {0.0, 0.5, 1.5})
    CHECK(p3(z) == doctest::Approx(std::exp(-3 * z)).epsilon(1e-12));
}

TEST_CASE("neumann_flat_mode: zero-mode compatibility") {
  // k=0, S=0, g=0.1 violates the flux balance with mismatch 0.1.
  try {
    neumann_flat_mode(0.0, 0.1, ModeFunction::zero(0.0));
    CHECK(false);
  } catch (const CompatibilityError& e) {
    CHECK(e.mismatch == doctest::Approx(0.1).epsilon(1e-12));
  }
  // Compatible zero-mode data: S = e^{-z}, g = -1; psi = e^{-z}.
  ModeFunction S{0.0, [](double y) { return std::exp(-y); }};
  auto psi = neumann_flat_mode(0.0, -1.0, S);
  for (double z : {0.0, 1.0, 3.0})
    CHECK(psi(z) == doctest::Approx(std::exp(-z)).epsilon(1e-10));
}

TEST_CASE("neumann_flat_mode with source satisfies ODE and datum") {
  ModeFunction S{2.0, [](double y) { return std::exp(-1.5 * y) * (1 + y); }};
  auto psi = neumann_flat_mode(2.0, 0.4, S);
  for (double z : {0.5, 1.0, 3.0})
    CHECK(std::abs(mode_ode_residual(2.0, psi, S, z)) < 1e-8);
  // Neumann datum via one-sided 4-point derivative.
  double h = 0.005;
  double d = (-11 * psi(0.0) + 18 * psi(h) - 9 * psi(2 * h) + 2 * psi(3 * h)) / (6 * h);
  CHECK(d == doctest::Approx(0.4).epsilon(1e-6));
}
