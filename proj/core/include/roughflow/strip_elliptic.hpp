#pragma once
#include <complex>
#include <memory>
#include <vector>

#include "roughflow/fields.hpp"
#include "roughflow/geometry.hpp"

namespace roughflow {

/// Solution of a strip elliptic problem, stored as the bilateral Fourier
/// spectrum (in the periodic direction) of the values on each x2 level.
class SpectralSolution {
 public:
  SpectralSolution(StripGrid g, int mmax);

  const StripGrid& grid() const { return grid_; }
  int mode_max() const { return mmax_; }
  /// Mode j in [-mode_max, mode_max], level m.
  std::complex<double>& mode(int j, int m) {
    return c_[static_cast<std::size_t>(j + mmax_) * grid_.x2.size() + m];
  }
  std::complex<double> mode(int j, int m) const {
    return c_[static_cast<std::size_t>(j + mmax_) * grid_.x2.size() + m];
  }

  Field to_field() const;
  /// Partial derivatives in flattened coordinates.
  Field d_t1() const;
  Field d_t2() const;
  SpectralSolution d_t2_spectral() const;

  /// |mode j| profile over x2 (for decay diagnostics).
  std::vector<double> mode_abs(int j) const;

 private:
  StripGrid grid_;
  int mmax_;
  std::vector<std::complex<double>> c_;
};

/// Elliptic operator  sigma * psi + mu * Lap_flattened(psi)  on a periodic
/// strip in flattened coordinates, discretized with Fourier collocation in
/// the periodic direction and second-order finite differences on the x2
/// nodes. The factorization is kept, so repeated solves with new data are
/// cheap. Immutable and safe to share across threads after construction.
class StripElliptic {
 public:
  enum class Wall {
    dirichlet,       // psi(., 0) = wall_data
    conormal_flux,   // -W' d_t1 psi + (1+W'^2) d_t2 psi = bracket * wall_data
  };
  enum class Top {
    dirichlet,       // psi(., top) = top_data
    dtn_mean_zero,   // decay closure per mode; zero mean on the top line
    dtn_flux_zero,   // decay closure per mode; zero-mode flux vanishes at top
  };

  struct Spec {
    double sigma = 0.0;
    double mu = 1.0;
    Wall wall = Wall::dirichlet;
    Top top = Top::dirichlet;
  };

  StripElliptic(StripGrid grid, const DomainParams& dom, DomainScale scale,
                Spec spec);
  ~StripElliptic();
  StripElliptic(StripElliptic&&) noexcept;

  const StripGrid& grid() const { return grid_; }
  bool flat_path() const { return flat_; }

  /// rhs / wall_data / top_data are collocation samples (any may be null).
  SpectralSolution solve(const Field* rhs, const std::vector<double>* wall_data,
                         const std::vector<double>* top_data) const;

  /// Residual of the discrete interior equations for a given solution and
  /// rhs, measured in the collocation max norm (diagnostic).
  double interior_residual(const SpectralSolution& sol, const Field* rhs) const;

 private:
  struct Impl;
  StripGrid grid_;
  Spec spec_;
  bool flat_ = false;
  std::unique_ptr<Impl> impl_;
};

/// Nonuniform 3-point finite-difference stencils for first and second
/// derivatives on the nodes x (interior centered, one-sided at the ends).
struct FdStencils {
  // For row m, entries apply to values at nodes off[m][k] with weight w[m][k].
  std::vector<std::array<int, 3>> idx;
  std::vector<std::array<double, 3>> d1, d2;
};
FdStencils fd_stencils(const std::vector<double>& x);

}  // namespace roughflow
