#include "roughflow/strip_elliptic.hpp"

#include <lapacke.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <mutex>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"

namespace roughflow {

using cplx = std::complex<double>;
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// SpectralSolution

SpectralSolution::SpectralSolution(StripGrid g, int mmax)
    : grid_(std::move(g)), mmax_(mmax),
      c_(static_cast<std::size_t>(2 * mmax + 1) * grid_.x2.size(), cplx(0.0)) {}

Field SpectralSolution::to_field() const {
  Field out(grid_);
  RealFourier ft(grid_.n1);
  int n2 = grid_.n2();
  std::vector<cplx> half(grid_.n1 / 2 + 1, cplx(0.0));
  for (int m = 0; m < n2; ++m) {
    for (int j = 0; j <= std::min(mmax_, grid_.n1 / 2); ++j)
      half[j] = mode(j, m);
    auto row = ft.inverse(half);
    for (int i = 0; i < grid_.n1; ++i) out.at(i, m) = row[i];
  }
  return out;
}

Field SpectralSolution::d_t1() const {
  SpectralSolution d(grid_, mmax_);
  for (int j = -mmax_; j <= mmax_; ++j) {
    cplx ik(0.0, kTwoPi * j / grid_.period);
    for (int m = 0; m < grid_.n2(); ++m) d.mode(j, m) = ik * mode(j, m);
  }
  return d.to_field();
}

SpectralSolution SpectralSolution::d_t2_spectral() const {
  SpectralSolution d(grid_, mmax_);
  auto st = fd_stencils(grid_.x2);
  for (int j = -mmax_; j <= mmax_; ++j)
    for (int m = 0; m < grid_.n2(); ++m) {
      cplx acc = 0.0;
      for (int k = 0; k < 3; ++k)
        acc += st.d1[m][k] * mode(j, st.idx[m][k]);
      d.mode(j, m) = acc;
    }
  return d;
}

Field SpectralSolution::d_t2() const { return d_t2_spectral().to_field(); }

std::vector<double> SpectralSolution::mode_abs(int j) const {
  std::vector<double> out(grid_.n2());
  for (int m = 0; m < grid_.n2(); ++m)
    out[m] = std::abs(mode(j, m)) / grid_.n1;  // true-coefficient scale
  return out;
}

// ---------------------------------------------------------------------------
// FD stencils

FdStencils fd_stencils(const std::vector<double>& x) {
  int n = static_cast<int>(x.size());
  if (n < 3) throw InputError("fd_stencils: need at least 3 nodes");
  FdStencils s;
  s.idx.resize(n);
  s.d1.resize(n);
  s.d2.resize(n);
  for (int m = 0; m < n; ++m) {
    int lo = std::clamp(m - 1, 0, n - 3);
    s.idx[m] = {lo, lo + 1, lo + 2};
    double x0 = x[lo], x1 = x[lo + 1], x2 = x[lo + 2], xm = x[m];
    // Differentiate the quadratic through the three nodes at xm.
    double d01 = x0 - x1, d02 = x0 - x2, d12 = x1 - x2;
    s.d1[m] = {(2 * xm - x1 - x2) / (d01 * d02),
               (2 * xm - x0 - x2) / (-d01 * d12),
               (2 * xm - x0 - x1) / (d02 * d12)};
    s.d2[m] = {2.0 / (d01 * d02), 2.0 / (-d01 * d12), 2.0 / (d02 * d12)};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Banded complex solver (LAPACK zgbtrf/zgbtrs)

namespace {

class BandedZ {
 public:
  BandedZ(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ldab_) * n, cplx(0.0)), ipiv_(n) {}

  void add(int i, int j, cplx v) {
    // Storage: ab[kl + ku + i - j, j] in a (ldab x n) column-major array.
    ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)] += v;
  }

  void factorize() {
    // std::complex<double> is layout-compatible with the C99 complex LAPACKE
    // expects.
    int info = LAPACKE_zgbtrf(
        LAPACK_COL_MAJOR, n_, n_, kl_, ku_,
        reinterpret_cast<lapack_complex_double*>(ab_.data()), ldab_,
        ipiv_.data());
    if (info != 0)
      throw SolverError("banded factorization failed, info = " +
                        std::to_string(info));
  }

  void solve(cplx* b) const {
    int info = LAPACKE_zgbtrs(
        LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1,
        reinterpret_cast<const lapack_complex_double*>(ab_.data()), ldab_,
        const_cast<int*>(ipiv_.data()),
        reinterpret_cast<lapack_complex_double*>(b), n_);
    if (info != 0)
      throw SolverError("banded solve failed, info = " + std::to_string(info));
  }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<cplx> ab_;
  std::vector<int> ipiv_;
};

}  // namespace

// ---------------------------------------------------------------------------
// StripElliptic

struct StripElliptic::Impl {
  DomainParams dom;
  DomainScale scale;
  int mmax = 0;
  FdStencils st;
  // True Fourier coefficients of the wall-slope data, index q + qmax.
  int qmax = 0;
  std::vector<cplx> c22, cw1, cw2;  // 1 + W'^2, W', W''
  std::vector<double> bracket;      // sqrt(1 + W'^2) at collocation points

  // Coupled path.
  Eigen::SparseMatrix<cplx> A;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  mutable std::mutex solve_mutex;

  // Flat path: one banded factorization per nonnegative mode.
  std::vector<BandedZ> banded;

  Impl(const DomainParams& d, DomainScale s) : dom(d), scale(s) {}
};

StripElliptic::~StripElliptic() = default;
StripElliptic::StripElliptic(StripElliptic&&) noexcept = default;

StripElliptic::StripElliptic(StripGrid grid, const DomainParams& dom,
                             DomainScale scale, Spec spec)
    : grid_(std::move(grid)), spec_(spec),
      impl_(std::make_unique<Impl>(dom, scale)) {
  if (grid_.n1 < 2 || grid_.n2() < 4)
    throw InputError("StripElliptic: grid too small");
  impl_->st = fd_stencils(grid_.x2);
  impl_->mmax = grid_.n1 / 2 - 1;
  if (impl_->mmax < 0) impl_->mmax = 0;
  flat_ = dom.profile.is_flat();

  const int n1 = grid_.n1;
  const int n2 = grid_.n2();
  const int J = impl_->mmax;
  const double period = grid_.period;

  // Sampled wall-slope coefficient functions and their exact spectra
  // (band-limited, so the collocation FFT is exact).
  std::vector<double> w1(n1), w2(n1), c22(n1);
  impl_->bracket.resize(n1);
  for (int i = 0; i < n1; ++i) {
    auto wj = wall(dom, scale, grid_.node_x1(i));
    w1[i] = wj.dw;
    w2[i] = wj.d2w;
    c22[i] = 1.0 + wj.dw * wj.dw;
    impl_->bracket[i] = std::sqrt(1.0 + wj.dw * wj.dw);
  }
  RealFourier ft(n1);
  auto spec_of = [&](const std::vector<double>& f) {
    auto half = ft.forward(f);
    int Q = n1 / 2;
    std::vector<cplx> full(2 * Q + 1, cplx(0.0));
    for (int q = 0; q <= Q; ++q) {
      full[Q + q] = half[q] / double(n1);
      full[Q - q] = std::conj(half[q]) / double(n1);
    }
    return full;
  };
  impl_->qmax = n1 / 2;
  impl_->c22 = spec_of(c22);
  impl_->cw1 = spec_of(w1);
  impl_->cw2 = spec_of(w2);

  auto kappa = [&](int j) { return kTwoPi * j / period; };

  if (flat_) {
    // Modes decouple; factor a banded system per mode j >= 0.
    impl_->banded.reserve(J + 1);
    for (int j = 0; j <= J; ++j) {
      BandedZ B(n2, 2, 2);
      double k = kappa(j);
      for (int m = 1; m + 1 < n2; ++m) {
        B.add(m, m, spec_.sigma + spec_.mu * (-k * k));
        for (int t = 0; t < 3; ++t)
          B.add(m, impl_->st.idx[m][t], spec_.mu * impl_->st.d2[m][t]);
      }
      // Wall row.
      if (spec_.wall == Wall::dirichlet) {
        B.add(0, 0, 1.0);
      } else {
        for (int t = 0; t < 3; ++t)
          B.add(0, impl_->st.idx[0][t], impl_->st.d1[0][t]);
      }
      // Top row.
      int M = n2 - 1;
      if (spec_.top == Top::dirichlet) {
        B.add(M, M, 1.0);
      } else if (j == 0) {
        if (spec_.top == Top::dtn_mean_zero)
          B.add(M, M, 1.0);
        else
          for (int t = 0; t < 3; ++t)
            B.add(M, impl_->st.idx[M][t], impl_->st.d1[M][t]);
      } else {
        for (int t = 0; t < 3; ++t)
          B.add(M, impl_->st.idx[M][t], impl_->st.d1[M][t]);
        B.add(M, M, std::abs(k));
      }
      B.factorize();
      impl_->banded.push_back(std::move(B));
    }
    return;
  }

  // Coupled path: assemble the bilateral system.
  const int nm = 2 * J + 1;
  const std::size_t N = static_cast<std::size_t>(nm) * n2;
  auto uidx = [&](int j, int m) {
    return static_cast<Eigen::Index>((j + J) * n2 + m);
  };
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(N * 16);
  const double drop = 1e-13;
  auto coef = [&](const std::vector<cplx>& c, int q) -> cplx {
    if (std::abs(q) > impl_->qmax) return 0.0;
    cplx v = c[q + impl_->qmax];
    return std::abs(v) > drop ? v : cplx(0.0);
  };

  for (int j = -J; j <= J; ++j) {
    double k = kappa(j);
    for (int m = 1; m + 1 < n2; ++m) {
      Eigen::Index row = uidx(j, m);
      trip.emplace_back(row, uidx(j, m), spec_.sigma + spec_.mu * (-k * k));
      for (int q = -impl_->qmax; q <= impl_->qmax; ++q) {
        int p = j - q;
        if (p < -J || p > J) continue;
        cplx a22 = coef(impl_->c22, q);
        cplx w1q = coef(impl_->cw1, q);
        cplx w2q = coef(impl_->cw2, q);
        if (a22 == cplx(0.0) && w1q == cplx(0.0) && w2q == cplx(0.0)) continue;
        cplx ikp(0.0, kappa(p));
        cplx d1c = spec_.mu * (-2.0 * w1q * ikp - w2q);
        for (int t = 0; t < 3; ++t) {
          int mm = impl_->st.idx[m][t];
          if (a22 != cplx(0.0))
            trip.emplace_back(row, uidx(p, mm),
                              spec_.mu * a22 * impl_->st.d2[m][t]);
          if (d1c != cplx(0.0))
            trip.emplace_back(row, uidx(p, mm), d1c * impl_->st.d1[m][t]);
        }
      }
    }
    // Wall row.
    {
      Eigen::Index row = uidx(j, 0);
      if (spec_.wall == Wall::dirichlet) {
        trip.emplace_back(row, uidx(j, 0), cplx(1.0));
      } else {
        for (int q = -impl_->qmax; q <= impl_->qmax; ++q) {
          int p = j - q;
          if (p < -J || p > J) continue;
          cplx a22 = coef(impl_->c22, q);
          cplx w1q = coef(impl_->cw1, q);
          if (a22 != cplx(0.0))
            for (int t = 0; t < 3; ++t)
              trip.emplace_back(row, uidx(p, impl_->st.idx[0][t]),
                                a22 * impl_->st.d1[0][t]);
          if (w1q != cplx(0.0))
            trip.emplace_back(row, uidx(p, 0),
                              -w1q * cplx(0.0, kappa(p)));
        }
      }
    }
    // Top row.
    {
      int M = n2 - 1;
      Eigen::Index row = uidx(j, M);
      if (spec_.top == Top::dirichlet) {
        trip.emplace_back(row, uidx(j, M), cplx(1.0));
      } else if (j == 0) {
        if (spec_.top == Top::dtn_mean_zero) {
          trip.emplace_back(row, uidx(0, M), cplx(1.0));
        } else {
          for (int t = 0; t < 3; ++t)
            trip.emplace_back(row, uidx(0, impl_->st.idx[M][t]),
                              cplx(impl_->st.d1[M][t]));
        }
      } else {
        for (int t = 0; t < 3; ++t)
          trip.emplace_back(row, uidx(j, impl_->st.idx[M][t]),
                            cplx(impl_->st.d1[M][t]));
        trip.emplace_back(row, uidx(j, M), cplx(std::abs(k)));
      }
    }
  }

  impl_->A.resize(N, N);
  impl_->A.setFromTriplets(trip.begin(), trip.end());
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("StripElliptic: sparse factorization failed");
}

SpectralSolution StripElliptic::solve(
    const Field* rhs, const std::vector<double>* wall_data,
    const std::vector<double>* top_data) const {
  const int n1 = grid_.n1;
  const int n2 = grid_.n2();
  const int J = impl_->mmax;
  RealFourier ft(n1);

  // Raw (unnormalized) spectra of the data rows.
  std::vector<std::vector<cplx>> rhs_hat(n2);
  if (rhs) {
    std::vector<double> row(n1);
    for (int m = 0; m < n2; ++m) {
      for (int i = 0; i < n1; ++i) row[i] = rhs->at(i, m);
      rhs_hat[m] = ft.forward(row);
    }
  }
  std::vector<cplx> wall_hat, top_hat;
  if (wall_data) {
    std::vector<double> w(*wall_data);
    if (spec_.wall == Wall::conormal_flux)
      for (int i = 0; i < n1; ++i) w[i] *= impl_->bracket[i];
    wall_hat = ft.forward(w);
  }
  if (top_data) top_hat = ft.forward(*top_data);

  auto data_at = [&](const std::vector<cplx>& h, int j) -> cplx {
    if (h.empty()) return 0.0;
    return j >= 0 ? h[j] : std::conj(h[-j]);
  };

  SpectralSolution sol(grid_, J);

  if (flat_) {
    std::vector<cplx> b(n2);
    for (int j = 0; j <= J; ++j) {
      std::fill(b.begin(), b.end(), cplx(0.0));
      if (rhs)
        for (int m = 1; m + 1 < n2; ++m) b[m] = rhs_hat[m][j];
      b[0] = data_at(wall_hat, j);
      int M = n2 - 1;
      if (spec_.top == Top::dirichlet)
        b[M] = data_at(top_hat, j);
      else
        b[M] = 0.0;
      impl_->banded[j].solve(b.data());
      for (int m = 0; m < n2; ++m) {
        sol.mode(j, m) = b[m];
        if (j > 0) sol.mode(-j, m) = std::conj(b[m]);
      }
    }
    return sol;
  }

  const int nm = 2 * J + 1;
  Eigen::VectorXcd b(static_cast<Eigen::Index>(nm) * n2);
  b.setZero();
  auto uidx = [&](int j, int m) {
    return static_cast<Eigen::Index>((j + J) * n2 + m);
  };
  for (int j = -J; j <= J; ++j) {
    if (rhs)
      for (int m = 1; m + 1 < n2; ++m)
        b[uidx(j, m)] = data_at(rhs_hat[m], j);
    b[uidx(j, 0)] = data_at(wall_hat, j);
    if (spec_.top == Top::dirichlet)
      b[uidx(j, n2 - 1)] = data_at(top_hat, j);
  }
  Eigen::VectorXcd x;
  {
    std::lock_guard<std::mutex> lock(impl_->solve_mutex);
    x = impl_->lu.solve(b);
  }
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("StripElliptic: sparse solve failed");
  for (int j = -J; j <= J; ++j)
    for (int m = 0; m < n2; ++m) sol.mode(j, m) = x[uidx(j, m)];
  return sol;
}

double StripElliptic::interior_residual(const SpectralSolution& sol,
                                        const Field* rhs) const {
  // Apply the interior equations in collocation space.
  Field u = sol.to_field();
  Field ut1 = sol.d_t1();
  Field ut2 = sol.d_t2();
  // Second derivatives.
  SpectralSolution d2(grid_, impl_->mmax);
  for (int j = -impl_->mmax; j <= impl_->mmax; ++j)
    for (int m = 0; m < grid_.n2(); ++m) {
      cplx acc = 0.0;
      for (int t = 0; t < 3; ++t)
        acc += impl_->st.d2[m][t] * sol.mode(j, impl_->st.idx[m][t]);
      d2.mode(j, m) = acc;
    }
  Field ut22 = d2.to_field();
  SpectralSolution d12 = sol.d_t2_spectral();
  Field ut12 = d12.d_t1();

  double worst = 0.0, scale = 1e-300;
  for (int i = 0; i < grid_.n1; ++i) {
    auto wj = wall(impl_->dom, impl_->scale, grid_.node_x1(i));
    double k2coef = 1.0;  // d^2_t1 handled spectrally below
    (void)k2coef;
    for (int m = 1; m + 1 < grid_.n2(); ++m) {
      // d^2_t1 term from the spectrum.
      cplx acc = 0.0;
      for (int j = -impl_->mmax; j <= impl_->mmax; ++j) {
        double k = kTwoPi * j / grid_.period;
        acc += -k * k * sol.mode(j, m) *
               std::exp(cplx(0.0, k * grid_.node_x1(i)));
      }
      double lap = std::real(acc) / grid_.n1 +
                   (1.0 + wj.dw * wj.dw) * ut22.at(i, m) -
                   2.0 * wj.dw * ut12.at(i, m) - wj.d2w * ut2.at(i, m);
      double lhs = spec_.sigma * u.at(i, m) + spec_.mu * lap;
      double r = lhs - (rhs ? rhs->at(i, m) : 0.0);
      worst = std::max(worst, std::abs(r));
      scale = std::max(scale, std::abs(lhs));
    }
  }
  return worst / scale;
}

}  // namespace roughflow
