#pragma once
#include <array>
#include <cmath>

namespace roughflow {

/// Truncated bivariate Taylor polynomial of total degree 4, used to evaluate
/// closed-form test fields together with all partial derivatives up to 4th
/// order (enough for vorticity sources of manufactured solutions).
/// Coefficients are Taylor coefficients: c(a,b) = d^{a+b} f / (a! b!).
class Jet2 {
 public:
  static constexpr int kOrder = 4;

  Jet2() { c_.fill(0.0); }
  /// Constant.
  Jet2(double v) : Jet2() { c_[idx(0, 0)] = v; }

  static Jet2 var_x(double v) {
    Jet2 j(v);
    j.c_[idx(1, 0)] = 1.0;
    return j;
  }
  static Jet2 var_y(double v) {
    Jet2 j(v);
    j.c_[idx(0, 1)] = 1.0;
    return j;
  }

  double value() const { return c_[idx(0, 0)]; }
  /// Partial derivative d^a_x d^b_y.
  double deriv(int a, int b) const {
    return c_[idx(a, b)] * factorial(a) * factorial(b);
  }

  friend Jet2 operator+(const Jet2& p, const Jet2& q) {
    Jet2 r;
    for (int i = 0; i < kSize; ++i) r.c_[i] = p.c_[i] + q.c_[i];
    return r;
  }
  friend Jet2 operator-(const Jet2& p, const Jet2& q) {
    Jet2 r;
    for (int i = 0; i < kSize; ++i) r.c_[i] = p.c_[i] - q.c_[i];
    return r;
  }
  friend Jet2 operator-(const Jet2& p) {
    Jet2 r;
    for (int i = 0; i < kSize; ++i) r.c_[i] = -p.c_[i];
    return r;
  }
  friend Jet2 operator*(const Jet2& p, const Jet2& q) {
    Jet2 r;
    for (int a = 0; a <= kOrder; ++a)
      for (int b = 0; a + b <= kOrder; ++b) {
        double s = p.c_[idx(a, b)];
        if (s == 0.0) continue;
        for (int u = 0; a + b + u <= kOrder; ++u)
          for (int v = 0; a + b + u + v <= kOrder; ++v)
            r.c_[idx(a + u, b + v)] += s * q.c_[idx(u, v)];
      }
    return r;
  }
  friend Jet2 operator*(double s, const Jet2& p) {
    Jet2 r;
    for (int i = 0; i < kSize; ++i) r.c_[i] = s * p.c_[i];
    return r;
  }
  friend Jet2 operator*(const Jet2& p, double s) { return s * p; }
  friend Jet2 operator+(const Jet2& p, double s) { return p + Jet2(s); }
  friend Jet2 operator+(double s, const Jet2& p) { return p + Jet2(s); }
  friend Jet2 operator-(const Jet2& p, double s) { return p - Jet2(s); }
  friend Jet2 operator-(double s, const Jet2& p) { return Jet2(s) - p; }

  /// Composition with a univariate analytic function given its derivatives
  /// at the jet's value: f(c0), f'(c0), ..., f''''(c0).
  Jet2 compose(const std::array<double, kOrder + 1>& f) const {
    Jet2 p = *this;           // nilpotent part
    p.c_[idx(0, 0)] = 0.0;
    Jet2 r(f[0]);
    Jet2 pk(1.0);
    double fact = 1.0;
    for (int k = 1; k <= kOrder; ++k) {
      pk = pk * p;
      fact *= k;
      r = r + (f[k] / fact) * pk;
    }
    return r;
  }

 private:
  static constexpr int kSize = (kOrder + 1) * (kOrder + 2) / 2;
  std::array<double, kSize> c_;

  // Triangular index for (a, b) with a + b <= kOrder.
  static constexpr int idx(int a, int b) {
    int s = a + b;
    return s * (s + 1) / 2 + b;
  }
  static constexpr double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  }
};

inline Jet2 sin(const Jet2& p) {
  double v = p.value();
  double s = std::sin(v), c = std::cos(v);
  return p.compose({s, c, -s, -c, s});
}
inline Jet2 cos(const Jet2& p) {
  double v = p.value();
  double s = std::sin(v), c = std::cos(v);
  return p.compose({c, -s, -c, s, c});
}
inline Jet2 exp(const Jet2& p) {
  double e = std::exp(p.value());
  return p.compose({e, e, e, e, e});
}

/// Laplacian from a 2-jet (or higher).
inline double laplacian(const Jet2& p) { return p.deriv(2, 0) + p.deriv(0, 2); }

}  // namespace roughflow
