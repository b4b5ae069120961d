#include "roughflow/halfplane.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {

// Truncation height: both the kernel tail e^{-|k| Y} and a generous margin
// for slowly decaying sources fall below 1e-14.
double quad_ymax(double k) { return 33.0 / std::max(std::abs(k), 0.5) + 60.0; }

double gk_integrate(const std::function<double(double)>& f, double a, double b,
                    double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, 12, rel_tol);
}

}  // namespace

double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double rel_tol) {
  return gk_integrate(f, a, b, rel_tol);
}

void check_decay(const ModeFunction& F, double tail0, double tail1,
                 double rel_tol) {
  double head = 0.0, tail = 0.0;
  for (int i = 0; i <= 64; ++i) {
    head = std::max(head, std::abs(F(4.0 * i / 64.0)));
    tail = std::max(tail, std::abs(F(tail0 + (tail1 - tail0) * i / 64.0)));
  }
  if (tail > rel_tol * (1.0 + head))
    throw DecayError("mode function fails its decay certificate");
}

double green_dirichlet(double k, double z, double y) {
  if (k == 0.0) throw InputError("green_dirichlet: k = 0 handled separately");
  double ak = std::abs(k);
  double lo = std::min(z, y), hi = std::max(z, y);
  return -(1.0 / ak) * std::exp(-ak * hi) * std::sinh(ak * lo);
}

ModeFunction poisson_dirichlet_mode(double k, const ModeFunction& F,
                                    double quad_tol) {
  if (k == 0.0)
    throw InputError("poisson_dirichlet_mode: k = 0 handled separately");
  check_decay(F);
  double ymax = quad_ymax(k);
  auto eval = [k, F, ymax, quad_tol](double z) {
    auto g = [&](double y) { return green_dirichlet(k, z, y) * F(y); };
    // Split at the kink y = z of the kernel.
    double zc = std::min(z, ymax);
    double a = gk_integrate(g, 0.0, zc, quad_tol);
    double b = zc < ymax ? gk_integrate(g, zc, ymax, quad_tol) : 0.0;
    return a + b;
  };
  return {k, eval};
}

ModeFunction neumann_flat_mode(double k, double g, const ModeFunction& S,
                               double quad_tol, double compat_tol) {
  check_decay(S);
  double ymax = quad_ymax(k);
  if (k == 0.0) {
    double total = gk_integrate([&](double y) { return S(y); }, 0.0, ymax,
                                quad_tol);
    double scale = 1.0 + std::abs(g) +
                   gk_integrate([&](double y) { return std::abs(S(y)); }, 0.0,
                                ymax, quad_tol);
    double mismatch = total + g;
    if (std::abs(mismatch) > compat_tol * scale)
      throw CompatibilityError(
          "neumann_flat_mode: zero-mode data violates int S = -g", mismatch);
    // Double antiderivative with decay: psi(z) = int_z^inf (y - z) S(y) dy.
    auto eval = [S, ymax, quad_tol](double z) {
      if (z >= ymax) return 0.0;
      return gk_integrate([&](double y) { return (y - z) * S(y); }, z, ymax,
                          quad_tol);
    };
    return {0.0, eval};
  }
  double ak = std::abs(k);
  // Free-space particular solution psi_p(z) = -(1/2|k|) int e^{-|k||z-y|} S,
  // then the decaying homogeneous mode A e^{-|k| z} matches the Neumann datum.
  double dpsi_p0 =
      -0.5 * gk_integrate([&](double y) { return std::exp(-ak * y) * S(y); },
                          0.0, ymax, quad_tol);
  double A = (dpsi_p0 - g) / ak;
  auto eval = [k, ak, A, S, ymax, quad_tol](double z) {
    auto f = [&](double y) {
      return -(0.5 / ak) * std::exp(-ak * std::abs(z - y)) * S(y);
    };
    double zc = std::min(z, ymax);
    double a = gk_integrate(f, 0.0, zc, quad_tol);
    double b = zc < ymax ? gk_integrate(f, zc, ymax, quad_tol) : 0.0;
    return a + b + A * std::exp(-ak * z);
  };
  return {k, eval};
}

double mode_ode_residual(double k, const ModeFunction& Psi,
                         const ModeFunction& F, double z, double h) {
  double zm2 = Psi(z - 2 * h), zm1 = Psi(z - h), z0 = Psi(z), zp1 = Psi(z + h),
         zp2 = Psi(z + 2 * h);
  double d2 = (-zm2 + 16 * zm1 - 30 * z0 + 16 * zp1 - zp2) / (12 * h * h);
  return d2 - k * k * z0 - F(z);
}

}  // namespace roughflow
