#include "roughflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

RoughProfile::RoughProfile(
    double mean_offset, std::vector<std::pair<int, std::complex<double>>> modes)
    : mean_(mean_offset) {
  int jmax = 0;
  for (auto& [j, c] : modes) {
    if (j == 0) throw InputError("RoughProfile: put the j=0 mode in mean_offset");
    jmax = std::max(jmax, std::abs(j));
  }
  coef_.assign(jmax, 0.0);
  std::vector<bool> seen_pos(jmax, false), seen_neg(jmax, false);
  std::vector<std::complex<double>> neg(jmax, 0.0);
  for (auto& [j, c] : modes) {
    if (j > 0) {
      coef_[j - 1] += c;
      seen_pos[j - 1] = true;
    } else {
      neg[-j - 1] += c;
      seen_neg[-j - 1] = true;
    }
  }
  for (int j = 1; j <= jmax; ++j) {
    if (seen_neg[j - 1]) {
      if (!seen_pos[j - 1]) {
        coef_[j - 1] = std::conj(neg[j - 1]);
      } else if (std::abs(neg[j - 1] - std::conj(coef_[j - 1])) >
                 1e-14 * (1.0 + std::abs(coef_[j - 1]))) {
        throw InputError(
            "RoughProfile: coefficients not Hermitian-symmetric at mode " +
            std::to_string(j));
      }
    }
  }
  // Positivity, sampled at 16x the Nyquist rate of the highest mode.
  int samples = std::max(64, 32 * std::max(jmax, 1));
  min_value_ = 1e300;
  max_value_ = -1e300;
  for (int i = 0; i < samples; ++i) {
    double v = value(double(i) / samples);
    min_value_ = std::min(min_value_, v);
    max_value_ = std::max(max_value_, v);
  }
  if (min_value_ <= 0.0)
    throw InputError("RoughProfile: inf eta must be positive, sampled min = " +
                     std::to_string(min_value_));
}

RoughProfile::Jet RoughProfile::eval(double z1) const {
  Jet out{mean_, 0.0, 0.0};
  for (int j = 1; j <= max_mode(); ++j) {
    double k = kTwoPi * j;
    std::complex<double> e = std::exp(std::complex<double>(0.0, k * z1));
    std::complex<double> c = coef_[j - 1];
    out.eta += 2.0 * std::real(c * e);
    out.deta += 2.0 * std::real(std::complex<double>(0.0, k) * c * e);
    out.d2eta += 2.0 * std::real(-k * k * c * e);
  }
  return out;
}

double RoughProfile::derivative(double z1, int order) const {
  if (order == 0) return value(z1);
  double acc = 0.0;
  for (int j = 1; j <= max_mode(); ++j) {
    double k = kTwoPi * j;
    std::complex<double> ik(0.0, k);
    std::complex<double> f = 1.0;
    for (int p = 0; p < order; ++p) f *= ik;
    std::complex<double> e = std::exp(std::complex<double>(0.0, k * z1));
    acc += 2.0 * std::real(f * coef_[j - 1] * e);
  }
  return acc;
}

bool RoughProfile::is_flat() const {
  for (auto& c : coef_)
    if (std::abs(c) > 0.0) return false;
  return true;
}

double RoughProfile::sup_abs_derivative(int order) const {
  // Crude but safe: sum of mode amplitudes.
  double s = order == 0 ? std::abs(mean_) : 0.0;
  for (int j = 1; j <= max_mode(); ++j)
    s += 2.0 * std::abs(coef_[j - 1]) * std::pow(kTwoPi * j, order);
  return s;
}

DomainParams::DomainParams(double eps, int n0_, RoughProfile prof)
    : epsilon(eps), n0(n0_), profile(std::move(prof)) {
  if (!(eps > 0.0 && eps < 1.0))
    throw InputError("DomainParams: epsilon must lie in (0,1)");
  double inv = 1.0 / eps;
  if (std::abs(inv - std::round(inv)) > 1e-9)
    throw InputError("DomainParams: 1/epsilon must be an integer");
  if (n0 < 1) throw InputError("DomainParams: n0 >= 1 required");
}

double DomainParams::eps_alpha() const { return std::pow(epsilon, alpha()); }

int DomainParams::inv_epsilon() const {
  return static_cast<int>(std::round(1.0 / epsilon));
}

double domain_period(const DomainParams& d, DomainScale s) {
  switch (s) {
    case DomainScale::cell: return 1.0;
    case DomainScale::rescaled: return 1.0 / d.epsilon;
    case DomainScale::physical: return 1.0;
  }
  return 1.0;
}

WallJet wall(const DomainParams& d, DomainScale s, double s1) {
  double ea = d.eps_alpha();
  switch (s) {
    case DomainScale::cell:
    case DomainScale::rescaled: {
      auto j = d.profile.eval(s1);
      return {ea * j.eta, ea * j.deta, ea * j.d2eta};
    }
    case DomainScale::physical: {
      auto j = d.profile.eval(s1 / d.epsilon);
      double amp = d.epsilon * ea;  // eps^{1+alpha}
      return {amp * j.eta, ea * j.deta, (ea / d.epsilon) * j.d2eta};
    }
  }
  return {0, 0, 0};
}

Frame frame(const DomainParams& d, double z1) {
  double g = d.eps_alpha() * d.profile.eval(z1).deta;
  double br = std::sqrt(1.0 + g * g);
  return Frame{{-g / br, 1.0 / br}, {1.0 / br, g / br}, br};
}

double curvature(const DomainParams& d, double z1, FrameScale scale) {
  auto j = d.profile.eval(z1);
  double g = d.eps_alpha() * j.deta;
  double br3 = std::pow(1.0 + g * g, 1.5);
  double pref = scale == FrameScale::rescaled
                    ? d.eps_alpha()
                    : d.eps_alpha() / d.epsilon;  // eps^{alpha - 1}
  return pref * j.d2eta / br3;
}

FlattenedCoords flatten(const DomainParams& d, DomainScale s,
                        std::array<double, 2> z) {
  double w = wall(d, s, z[0]).w;
  if (z[1] < w - 1e-12 * (1.0 + std::abs(w)))
    throw DomainError("flatten: point lies below the boundary");
  return {z[0], z[1] - w};
}

std::array<double, 2> unflatten(const DomainParams& d, DomainScale s,
                                FlattenedCoords c) {
  return {c.zt1, c.zt2 + wall(d, s, c.zt1).w};
}

LaplacianCoeffs flatten_laplacian(const DomainParams& d, DomainScale s,
                                  double s1) {
  auto wj = wall(d, s, s1);
  return {1.0, 1.0 + wj.dw * wj.dw, -2.0 * wj.dw, -wj.d2w};
}

std::array<double, 2> unflattened_gradient(const DomainParams& d, DomainScale s,
                                           double s1, double d_t1,
                                           double d_t2) {
  double dw = wall(d, s, s1).dw;
  return {d_t1 - dw * d_t2, d_t2};
}

Jet2 profile_jet(const RoughProfile& p, const Jet2& z1) {
  Jet2 acc(p.mean());
  for (int j = 1; j <= p.max_mode(); ++j) {
    double k = kTwoPi * j;
    std::complex<double> c = p.onesided()[j - 1];
    // 2 Re(c e^{i k z1}) = 2|c| cos(k z1 + arg c)
    double amp = 2.0 * std::abs(c);
    double phase = std::arg(c);
    acc = acc + amp * cos(k * z1 + phase);
  }
  return acc;
}

}  // namespace roughflow
