#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "roughflow/fields.hpp"
#include "roughflow/geometry.hpp"
#include "roughflow/strip_elliptic.hpp"

namespace roughflow {

/// Wall jets of an interior velocity field at one slow sample (t, x1):
/// d[m] = (d^m_{x2} u1, d^m_{x2} u2) evaluated at x2 = 0.
struct WallJets {
  std::vector<std::array<double, 2>> d;
  int order() const { return static_cast<int>(d.size()) - 1; }
};

/// Highest wall-jet order required to evaluate B_k (0 when B_k vanishes).
int boundary_operator_arity(int k, int n0);

/// Taylor boundary operator: the coefficient of eps^{alpha k} in the wall
/// trace bracket * u(t, x1, wall) . n, with the bracket left unexpanded and
/// the divergence-free substitution applied by the caller when building jets.
/// Vanishes identically for 1 < k <= n0.
double boundary_operator_B(int k, const WallJets& jets, const DomainParams& dom,
                           double z1);

/// Data of one cell problem at fixed slow variables.
struct CellProblemData {
  int k = 1;
  std::optional<Field> source;          // S on the cell grid; empty means 0
  std::vector<double> neumann_data;     // g(z1) at collocation points
  double t = 0.0, x1 = 0.0;
};

/// One boundary-layer corrector profile.
struct LayerProfile {
  StripGrid grid;
  Field psi, phi;
  VectorField v;              // grad psi + perp-grad phi, un-flattened z frame
  double gamma_meas = 0.0;    // fitted minimal decay rate of active modes
  double far_field_const = 0.0;  // constant the phi part approaches far away
  double t = 0.0, x1 = 0.0;
};

/// Exponential fit of one Fourier mode's vertical decay, measured on
/// horizontal lines z2 = const in un-flattened coordinates. Sample points
/// whose amplitude falls below floor_rel times the window maximum are
/// excluded (they are round-off, not signal).
struct DecayFit {
  double rate = 0.0;  // |mode| ~ C e^{-rate z2}
  double r2 = 0.0;
  int points = 0;
};

class CellSolver {
 public:
  CellSolver(DomainParams dom, StripGrid grid);

  const StripGrid& grid() const { return grid_; }
  const DomainParams& domain() const { return dom_; }

  /// Decaying solution of the Neumann cell problem Lap psi = S,
  /// n . grad psi = g at the wall. Checks the flux balance
  /// int S = -int_wall g dsigma and throws CompatibilityError on mismatch.
  SpectralSolution solve_neumann_cell(const CellProblemData& data) const;

  /// Wall-vanishing solution of Lap phi = S, phi = 0 on the boundary.
  SpectralSolution solve_dirichlet_cell(const CellProblemData& data) const;

  /// Builds the velocity profile from the potential / stream pair.
  LayerProfile assemble_layer(const SpectralSolution& psi,
                              const SpectralSolution& phi, double t,
                              double x1) const;
  LayerProfile assemble_layer(const SpectralSolution& psi, double t,
                              double x1) const;

  /// Fit of mode j's decay over z2 in [z_lo, z_hi] (un-flattened lines).
  DecayFit fit_mode_decay(const SpectralSolution& sol, int j, double z_lo,
                          double z_hi, double floor_rel = 1e-12) const;

  /// |mode j| of the solution resampled on horizontal lines z2 = const.
  /// Returns -1 for lines that leave the grid.
  std::vector<double> line_mode_amplitudes(const SpectralSolution& sol, int j,
                                           const std::vector<double>& z2) const;

  /// Boundary arclength integral int g dsigma = int_0^1 g(z1) <.> dz1.
  double boundary_integral(const std::vector<double>& g) const;

  double compatibility_tolerance() const { return 1e-10; }

 private:
  DomainParams dom_;
  StripGrid grid_;
  StripElliptic neumann_op_;
  StripElliptic dirichlet_op_;
  void check_source_decay(const Field& S) const;
};

/// Log-linear fit of a mode-amplitude column, restricted to samples that two
/// resolutions agree on (within guard_rel) and that clear the round-off
/// floor. Disagreeing samples are discretization noise, not decay signal.
DecayFit fit_decay_from_lines(const std::vector<double>& z2,
                              const std::vector<double>& amp,
                              const std::vector<double>& amp_check,
                              double guard_rel = 0.1,
                              double abs_floor = 1e-280);

/// Compatibility datum h^k from the layer family of order k - n0 (sampled
/// over the slow x1 grid) and the summed Taylor operators at the wall.
/// prior_family may be empty (k <= n0). B_sum[i] holds
/// sum_{j} B_{k-j}[u^j](t, x1_i, z1) on the z1 collocation grid.
/// Asserts the zero-mean property of the result; a violation beyond
/// tolerance signals a bug (InternalConsistencyError).
std::vector<double> compatibility_source_h(
    int k, const std::vector<LayerProfile>& prior_family,
    const std::vector<std::vector<double>>& B_sum, const DomainParams& dom,
    double tol = 1e-10);

/// Thread-safe cache of layer profiles keyed by (k, x1 index, t index).
class LayerCache {
 public:
  using Key = std::tuple<int, int, int>;
  std::shared_ptr<const LayerProfile> find(const Key& key) const;
  std::shared_ptr<const LayerProfile> insert(const Key& key,
                                             LayerProfile profile);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const LayerProfile>> map_;
};

}  // namespace roughflow
