#pragma once
#include <functional>

namespace roughflow {

/// One Fourier mode of a function on the flat periodic half-plane: a function
/// of the wall-normal coordinate z >= 0 that decays at infinity.
struct ModeFunction {
  double wavenumber = 0.0;
  std::function<double(double)> f;

  double operator()(double z) const { return f(z); }
  static ModeFunction zero(double k) {
    return {k, [](double) { return 0.0; }};
  }
};

/// Certifies decay by comparing a tail sup against the near-wall sup.
/// Throws DecayError if sup_{[tail0, tail1]} |f| > rel_tol * (1 + sup_{[0,4]} |f|).
void check_decay(const ModeFunction& F, double tail0 = 24.0,
                 double tail1 = 40.0, double rel_tol = 1e-6);

/// Green function of (d^2/dz^2 - k^2) on z >= 0 with Dirichlet condition at
/// z = 0 and decay at infinity:
///   G_k(z, y) = -(1/|k|) e^{-|k| max(z,y)} sinh(|k| min(z,y)),  k != 0.
double green_dirichlet(double k, double z, double y);

/// Decaying solution of (d^2 - k^2) Psi = F with Psi(0) = 0, evaluated by
/// adaptive Gauss-Kronrod quadrature of the Green representation.
ModeFunction poisson_dirichlet_mode(double k, const ModeFunction& F,
                                    double quad_tol = 1e-13);

/// Decaying solution of (d^2 - k^2) psi = S with inward Neumann datum
/// psi'(0) = g. For k == 0 the data must balance: int_0^inf S = -g,
/// otherwise a CompatibilityError carrying the mismatch is thrown.
ModeFunction neumann_flat_mode(double k, double g, const ModeFunction& S,
                               double quad_tol = 1e-13,
                               double compat_tol = 1e-9);

/// Pointwise residual (d^2 - k^2) Psi - F at z, via a 5-point 4th-order
/// stencil (step h). Used to verify mode solutions independently.
double mode_ode_residual(double k, const ModeFunction& Psi,
                         const ModeFunction& F, double z, double h = 0.01);

/// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double rel_tol = 1e-13);

}  // namespace roughflow
