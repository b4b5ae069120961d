#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "roughflow/fields.hpp"

namespace roughflow {

/// One separable forcing mode a(t) * trig(2 pi m x1) * bump(x2): the ramp
/// a(t) = amplitude * smoothstep(t / ramp_time) is polynomial in t and
/// vanishes for t <= 0; bump equals 1 on [0, bump_top] and falls smoothly to
/// zero at bump_top + bump_width.
struct ForcingMode {
  double amplitude = 1.0;
  int m = 1;
  bool use_sin = false;
  double ramp_time = 0.25;
  double bump_top = 1.5;
  double bump_width = 1.5;
  int component = 0;      // applies to u_1 (0) or u_2 (1)
  double off_time = -1.0;  // if >= 0, ramp back to zero starting here
  double off_width = 0.05;
};

class ForcingSpec {
 public:
  ForcingSpec() = default;
  explicit ForcingSpec(std::vector<ForcingMode> modes);

  bool empty() const { return modes_.empty(); }
  const std::vector<ForcingMode>& modes() const { return modes_; }

  double component(int c, double t, double x1, double x2) const;
  /// curl f = d_x1 f2 - d_x2 f1, differentiated analytically.
  double curl(double t, double x1, double x2) const;
  /// Exact double integral M_f(t) = int_0^t int_Omega f_1 dx ds (closed
  /// form; the bump is clipped at the domain height).
  double momentum_input(double t, double height) const;
  /// Largest height below which all bumps are supported.
  double support_top() const;

 private:
  std::vector<ForcingMode> modes_;
};

/// Base-flow state on the flat strip T x [0, L].
struct EulerState {
  double t = 0.0;
  Field omega;
  Field psi;
  VectorField u;
};

struct EulerOptions {
  double cfl = 0.5;
  double dt_max = 0.02;
  double dt_min = 1e-7;
  /// Extra vorticity source s(t, x1, x2) (manufactured-solution hook).
  std::function<double(double, double, double)> vorticity_source;
};

/// Nonlinear base flow from rest under the given forcing; returns
/// `snapshots` evenly spaced states on [0, T0] (the first is the rest state).
std::vector<EulerState> solve_euler_base(const StripGrid& grid,
                                         const ForcingSpec& f, double T0,
                                         int snapshots,
                                         const EulerOptions& opt = {});

/// Smooth cutoff for trace lifting: 1 on [0, one_until], 0 from zero_from on.
struct Cutoff {
  double one_until = 0.25;
  double zero_from = 0.5;
  double value(double x2) const;
  double d1(double x2) const;
  double d2(double x2) const;
};

/// Divergence-free lift of a zero-mean trace: u = perp-grad(chi(x2) H(x1))
/// with H' = h, so u2(x1, 0) = h(x1) exactly. Throws CompatibilityError when
/// the trace mean exceeds tol.
VectorField lift_trace(const StripGrid& grid, const std::vector<double>& h,
                       const Cutoff& cutoff = {}, double tol = 1e-10);
/// The lift's stream potential chi(x2) H(x1) and vorticity, for callers that
/// need the pieces.
Field lift_stream(const StripGrid& grid, const std::vector<double>& h,
                  const Cutoff& cutoff = {});
Field lift_vorticity(const StripGrid& grid, const std::vector<double>& h,
                     const Cutoff& cutoff = {});

/// Interior corrector state of one cascade order.
struct CorrectorState {
  double t = 0.0;
  int k = 1;
  VectorField u;
  Field omega;
};

/// Data of the order-k linearized problem around the base flow: trace datum
/// h(t), its time derivative, and the quadratic interaction forcing of the
/// lower orders (curl and x1-momentum integral), all optional except h.
struct LinearizedProblem {
  int k = 1;
  std::function<std::vector<double>(double)> h;
  std::function<std::vector<double>(double)> dh_dt;
  std::function<void(double, Field&)> forcing_curl;   // adds curl F^k(t)
  std::function<double(double)> forcing_momentum;     // int F^k_1 dx
  Cutoff cutoff;
};

/// Linearized Euler evolution with inhomogeneous wall trace, solved as
/// u^k = U + lift with U impermeable. Base snapshots are interpolated in
/// time. Returns `snapshots` evenly spaced corrector states on [0, T0].
std::vector<CorrectorState> solve_linearized(
    const StripGrid& grid, const LinearizedProblem& prob,
    const std::vector<EulerState>& base, double T0, int snapshots,
    const EulerOptions& opt = {});

/// Cubic-in-time interpolation across snapshot series.
Field interp_state_field(const std::vector<EulerState>& series,
                         Field EulerState::* member, double t);
VectorField interp_state_velocity(const std::vector<EulerState>& series,
                                  double t);

/// Wall traces of a snapshot: u1(., 0) and d_x1 u1(., 0).
std::vector<double> wall_trace_u1(const EulerState& s);
std::vector<double> wall_trace_d1u1(const EulerState& s);

}  // namespace roughflow
