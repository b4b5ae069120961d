#pragma once
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "roughflow/euler.hpp"
#include "roughflow/fields.hpp"
#include "roughflow/geometry.hpp"

namespace roughflow {

/// Friction coefficient lambda(x1): a real finite Fourier series with exact
/// derivatives (no sign constraint).
class FrictionSpec {
 public:
  FrictionSpec() = default;
  FrictionSpec(double mean,
               std::vector<std::pair<int, std::complex<double>>> modes);
  double value(double x1) const;
  double derivative(double x1, int order) const;
  /// |lambda|_{C^2} = sup|l| + sup|l'| + sup|l''| (sampled exactly for the
  /// band-limited series).
  double c2_magnitude() const;
  double min_value() const;

 private:
  double mean_ = 0.0;
  std::vector<std::pair<int, std::complex<double>>> modes_;
};

struct NSConfig {
  DomainParams domain;
  double nu = 1e-3;
  FrictionSpec lambda;
  ForcingSpec forcing;
  int n1 = 64;
  int n2 = 257;
  double height = 8.0;
  double T0 = 0.5;
  double cfl = 0.5;
  double dt_max = 0.02;
  double dt_min = 1e-8;
  // tanh clustering: fraction of points inside `cluster_width` of the wall;
  // non-positive width gives a uniform grid. An explicit node set overrides
  // both (n2 and height are then taken from it).
  double cluster_width = -1.0;
  double cluster_frac = 1.0 / 3.0;
  std::vector<double> x2_nodes;
  // Vorticity absorption above sponge_start.
  double sponge_start = 4.0;
  double sponge_strength = 2.0;
  // Wall-condition correction loop.
  double bc_tol = 1e-9;
  int bc_max_iter = 16;
  // Theorem-regime bookkeeping.
  bool theorem_mode = false;
  double nu_window_hi_c = 1.0;   // nu <= c eps^7
  double nu_window_exponent = 12.0;  // nu >= eps^{N1}
  double lambda_window_c = 10.0;     // |lambda|_C2 <= c eps^{alpha-1}
  // Manufactured-solution hooks.
  std::function<double(double, double, double)> vorticity_source;
  std::function<double(double, double)> wall_bc_offset;
  std::function<double(double)> momentum_input_extra;  // adds to dM/dt

  NSConfig(DomainParams dom) : domain(std::move(dom)) {}
};

/// Regime flags recorded next to every run.
struct RegimeFlags {
  bool nu_in_window = false;
  bool lambda_in_window = false;
  bool resolved = false;
};

struct NSState {
  double t = 0.0;
  Field omega;
  Field psi;
  VectorField u;
  double momentum = 0.0;       // int u1 dx
  double visc_momentum = 0.0;  // accumulated wall-vorticity contribution
};

struct EnergyBudget {
  double dE = 0.0;           // measured energy change over the step
  double power_forcing = 0.0;
  double power_strain = 0.0;    // 2 nu int |D(u)|^2
  double power_friction = 0.0;  // nu int_wall lambda (u.tau)^2
  double defect() const {
    return dE - (power_forcing - power_strain - power_friction);
  }
  double scale() const;
};

struct RunRecord {
  double t = 0.0;
  double energy = 0.0;
  double u_l2 = 0.0;
  double u_linf = 0.0;
  double omega_linf = 0.0;
  double dt = 0.0;
  double wall_speed_max = 0.0;
  double budget_defect = 0.0;  // max per-step |defect| in the interval
  double budget_scale = 0.0;   // max per-step largest budget term
};

struct RunResult {
  std::vector<RunRecord> records;
  NSState final_state;
  double energy_drift = 0.0;  // cumulative ledger drift / max ledger term
  RegimeFlags flags;
};

class NSSolver {
 public:
  explicit NSSolver(NSConfig cfg);
  ~NSSolver();
  NSSolver(NSSolver&&) noexcept;

  const NSConfig& config() const;
  const StripGrid& grid() const;
  RegimeFlags regime() const;

  /// Rest state (identically zero).
  NSState init_state() const;

  /// One IMEX step (Crank-Nicolson diffusion, Heun advection) of size dt.
  /// Throws TimeStepError when dt violates the advective CFL constraint.
  void step(NSState& s, double dt) const;

  /// Advance from rest to T0, recording diagnostics; optional callback runs
  /// at each record time (including t = 0).
  RunResult run(const std::function<void(const NSState&)>& on_record = {},
                int records = 33) const;

  double energy(const NSState& s) const;
  EnergyBudget energy_budget(const NSState& before, const NSState& after) const;

  /// Both residual forms of the slip condition at the wall collocation
  /// points: 2 D(u) n.tau + lambda u.tau and (2 kappa + lambda) u.tau -
  /// omega. They are algebraically equal for tangent fields.
  std::pair<std::vector<double>, std::vector<double>> slip_residual_forms(
      const NSState& s) const;
  /// Max absolute difference of the two forms.
  double vorticity_bc_equivalence(const NSState& s) const;

  /// Wall tangential velocity trace.
  std::vector<double> wall_tangential_speed(const NSState& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace roughflow
