#pragma once
#include <complex>
#include <vector>

namespace roughflow {

/// Real <-> half-complex DFT on n equispaced samples of a periodic signal.
/// Spectrum layout: modes[j], 0 <= j <= n/2, for wavenumbers 2*pi*j/period.
/// Forward is unnormalized sum; inverse divides by n, so inverse(forward(x)) == x.
class RealFourier {
 public:
  explicit RealFourier(int n);
  ~RealFourier();
  RealFourier(const RealFourier&) = delete;
  RealFourier& operator=(const RealFourier&) = delete;
  RealFourier(RealFourier&&) noexcept;
  RealFourier& operator=(RealFourier&&) noexcept;

  int size() const { return n_; }
  int num_modes() const { return n_ / 2 + 1; }

  std::vector<std::complex<double>> forward(const double* x) const;
  std::vector<std::complex<double>> forward(const std::vector<double>& x) const {
    return forward(x.data());
  }
  std::vector<double> inverse(const std::vector<std::complex<double>>& m) const;

  /// d/dx of a sampled signal with the given period (zeroes the Nyquist mode).
  std::vector<double> derivative(const std::vector<double>& x, double period,
                                 int order = 1) const;

  /// Zeroes modes with |j| > n/3 (2/3-rule dealiasing), in place on samples.
  std::vector<double> dealias(const std::vector<double>& x) const;

 private:
  int n_;
  void* plan_fwd_;
  void* plan_inv_;
  double* buf_real_;
  void* buf_cplx_;
};

/// Coefficients of the full bilateral spectrum from the half spectrum of a
/// real signal: index j in [-n/2, n/2), returned as c[j + n/2].
std::vector<std::complex<double>> bilateral_spectrum(
    const std::vector<std::complex<double>>& half, int n);

}  // namespace roughflow
