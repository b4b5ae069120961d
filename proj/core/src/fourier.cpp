#include "roughflow/fourier.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <numbers>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {
// FFTW plan creation is not thread-safe; execution on distinct plans is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFourier::RealFourier(int n) : n_(n) {
  if (n < 2) throw InputError("RealFourier: need n >= 2");
  buf_real_ = fftw_alloc_real(n);
  buf_cplx_ = fftw_alloc_complex(n / 2 + 1);
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(n, buf_real_,
                                   static_cast<fftw_complex*>(buf_cplx_),
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(buf_cplx_),
                                   buf_real_, FFTW_ESTIMATE);
}

RealFourier::~RealFourier() {
  if (plan_fwd_) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(buf_real_);
    fftw_free(buf_cplx_);
  }
}

RealFourier::RealFourier(RealFourier&& o) noexcept
    : n_(o.n_), plan_fwd_(o.plan_fwd_), plan_inv_(o.plan_inv_),
      buf_real_(o.buf_real_), buf_cplx_(o.buf_cplx_) {
  o.plan_fwd_ = nullptr;
  o.plan_inv_ = nullptr;
  o.buf_real_ = nullptr;
  o.buf_cplx_ = nullptr;
}

RealFourier& RealFourier::operator=(RealFourier&& o) noexcept {
  std::swap(n_, o.n_);
  std::swap(plan_fwd_, o.plan_fwd_);
  std::swap(plan_inv_, o.plan_inv_);
  std::swap(buf_real_, o.buf_real_);
  std::swap(buf_cplx_, o.buf_cplx_);
  return *this;
}

std::vector<std::complex<double>> RealFourier::forward(const double* x) const {
  std::memcpy(buf_real_, x, sizeof(double) * n_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::vector<std::complex<double>> out(n_ / 2 + 1);
  std::memcpy(out.data(), buf_cplx_, sizeof(fftw_complex) * out.size());
  return out;
}

std::vector<double> RealFourier::inverse(
    const std::vector<std::complex<double>>& m) const {
  if (static_cast<int>(m.size()) != n_ / 2 + 1)
    throw InputError("RealFourier::inverse: spectrum size mismatch");
  std::memcpy(buf_cplx_, m.data(), sizeof(fftw_complex) * m.size());
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = buf_real_[i] / n_;
  return out;
}

std::vector<double> RealFourier::derivative(const std::vector<double>& x,
                                            double period, int order) const {
  auto m = forward(x);
  const std::complex<double> I(0.0, 1.0);
  for (int j = 0; j < static_cast<int>(m.size()); ++j) {
    std::complex<double> ik = I * (2.0 * std::numbers::pi * j / period);
    std::complex<double> f = 1.0;
    for (int p = 0; p < order; ++p) f *= ik;
    m[j] *= f;
  }
  if (n_ % 2 == 0 && order % 2 == 1) m[n_ / 2] = 0.0;
  return inverse(m);
}

std::vector<double> RealFourier::dealias(const std::vector<double>& x) const {
  auto m = forward(x);
  int cut = n_ / 3;
  for (int j = cut + 1; j < static_cast<int>(m.size()); ++j) m[j] = 0.0;
  return inverse(m);
}

std::vector<std::complex<double>> bilateral_spectrum(
    const std::vector<std::complex<double>>& half, int n) {
  std::vector<std::complex<double>> full(n);
  int half_n = n / 2;
  for (int j = -half_n; j < n - half_n; ++j) {
    if (j >= 0)
      full[j + half_n] = half[j];
    else
      full[j + half_n] = std::conj(half[-j]);
  }
  return full;
}

}  // namespace roughflow
