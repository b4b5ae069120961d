#pragma once
#include <array>
#include <complex>
#include <vector>

#include "roughflow/taylor_jet.hpp"

namespace roughflow {

/// Boundary oscillation profile: a real finite Fourier series
///   eta(z1) = mean_offset + sum_j c_j e^{2 pi i j z1},  period 1,
/// with Hermitian coefficients and inf eta > 0. Immutable after construction.
class RoughProfile {
 public:
  /// `modes` lists (j, amplitude) pairs. Entries with j > 0 may be given
  /// alone (the conjugate at -j is implied); if both signs are present they
  /// must be conjugate. j == 0 content belongs in mean_offset.
  RoughProfile(double mean_offset,
               std::vector<std::pair<int, std::complex<double>>> modes);

  static RoughProfile flat(double height) { return RoughProfile(height, {}); }

  /// eta and its first two derivatives, differentiated exactly.
  struct Jet {
    double eta, deta, d2eta;
  };
  Jet eval(double z1) const;
  double value(double z1) const { return eval(z1).eta; }
  /// Exact d^order eta / dz1^order for any order >= 0.
  double derivative(double z1, int order) const;

  double mean() const { return mean_; }
  /// One-sided coefficients, j >= 1: c[j-1] is the amplitude of e^{2 pi i j z1}.
  const std::vector<std::complex<double>>& onesided() const { return coef_; }
  int max_mode() const { return static_cast<int>(coef_.size()); }
  bool is_flat() const;
  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }
  double sup_abs_derivative(int order) const;

 private:
  double mean_;
  std::vector<std::complex<double>> coef_;  // index j-1 holds mode j >= 1
  double min_value_ = 0.0, max_value_ = 0.0;
};

/// Domain family parameters: epsilon with 1/epsilon integer, alpha = 1/n0.
struct DomainParams {
  double epsilon;
  int n0;
  RoughProfile profile;

  DomainParams(double eps, int n0_, RoughProfile prof);
  double alpha() const { return 1.0 / n0; }
  double eps_alpha() const;      // epsilon^alpha
  int inv_epsilon() const;       // 1/epsilon as integer
};

/// Which copy of the domain a coordinate lives in:
///   cell     — rescaled strip {z1 in T_1, z2 > eps^alpha eta(z1)}, period 1
///   rescaled — {z1 in T_{1/eps}, z2 > eps^alpha eta(z1)}, period 1/eps
///   physical — {x1 in T_1, x2 > eps^{1+alpha} eta(x1/eps)}, period 1
enum class DomainScale { cell, rescaled, physical };

double domain_period(const DomainParams& d, DomainScale s);

/// Wall height W(s1) and derivatives for the given scale, so the boundary is
/// {x2 = W(x1)}. The slope W' equals eps^alpha eta'(z1) for every scale.
struct WallJet {
  double w, dw, d2w;
};
WallJet wall(const DomainParams& d, DomainScale s, double s1);

/// Boundary frame at z1 (the fast variable): inward unit normal, unit
/// tangent, and the bracket <eps^alpha eta'> = sqrt(1 + eps^{2 alpha} eta'^2).
struct Frame {
  std::array<double, 2> n;
  std::array<double, 2> tau;
  double bracket;
};
Frame frame(const DomainParams& d, double z1);

enum class FrameScale { physical, rescaled };

/// Algebraic curvature of the boundary at fast variable z1.
/// rescaled: eps^alpha eta'' / bracket^3; physical: eps^{alpha-1} eta'' / bracket^3.
double curvature(const DomainParams& d, double z1, FrameScale scale);

/// Flattened coordinates (s1, s2 - W(s1)) and their inverse.
struct FlattenedCoords {
  double zt1, zt2;
};
FlattenedCoords flatten(const DomainParams& d, DomainScale s,
                        std::array<double, 2> z);
std::array<double, 2> unflatten(const DomainParams& d, DomainScale s,
                                FlattenedCoords c);

/// Coefficients of the Laplacian in flattened coordinates:
///   Lap = a11 d^2_t1 + a22 d^2_t2 + a12 d_t1 d_t2 + b2 d_t2
struct LaplacianCoeffs {
  double a11, a22, a12, b2;
};
LaplacianCoeffs flatten_laplacian(const DomainParams& d, DomainScale s,
                                  double s1);

/// Gradient in un-flattened coordinates from flattened-coordinate partials:
///   d_s1 = d_t1 - W' d_t2,   d_s2 = d_t2.
std::array<double, 2> unflattened_gradient(const DomainParams& d, DomainScale s,
                                           double s1, double d_t1, double d_t2);

/// Evaluate eta(z1) as a jet in two ambient variables, where z1 itself is a
/// jet (used to differentiate composite fields through the wall shape).
Jet2 profile_jet(const RoughProfile& p, const Jet2& z1);

}  // namespace roughflow
