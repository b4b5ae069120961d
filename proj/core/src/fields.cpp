#include "roughflow/fields.hpp"

#include <algorithm>
#include <cmath>

#include "roughflow/errors.hpp"

namespace roughflow {

std::vector<double> StripGrid::x2_weights() const {
  std::vector<double> w(x2.size(), 0.0);
  for (std::size_t m = 0; m + 1 < x2.size(); ++m) {
    double h = x2[m + 1] - x2[m];
    w[m] += 0.5 * h;
    w[m + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> uniform_nodes(double len, int n) {
  std::vector<double> x(n);
  for (int m = 0; m < n; ++m) x[m] = len * m / (n - 1);
  return x;
}

std::vector<double> stretched_nodes(double h, double z_switch, double z_max,
                                    double growth) {
  std::vector<double> x{0.0};
  double z = 0.0;
  while (z < z_switch - 1e-12) {
    z += h;
    x.push_back(z);
  }
  double step = h;
  while (x.back() < z_max - 1e-12) {
    step *= growth;
    x.push_back(std::min(x.back() + step, z_max));
  }
  return x;
}

std::vector<double> tanh_nodes(double len, int n, double width, double frac) {
  if (width <= 0.0 || width >= len) {
    return uniform_nodes(len, n);
  }
  // Find delta with g(frac) = width/len for g(s) = 1 + tanh(delta(s-1))/tanh(delta).
  double target = width / len;
  auto g = [](double delta, double s) {
    return 1.0 + std::tanh(delta * (s - 1.0)) / std::tanh(delta);
  };
  double lo = 1e-6, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid, frac) > target)
      lo = mid;
    else
      hi = mid;
  }
  double delta = 0.5 * (lo + hi);
  std::vector<double> x(n);
  for (int m = 0; m < n; ++m) x[m] = len * g(delta, double(m) / (n - 1));
  x[0] = 0.0;
  x[n - 1] = len;
  return x;
}

Field& Field::operator+=(const Field& o) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}
Field& Field::operator-=(const Field& o) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}
Field& Field::operator*=(double c) {
  for (auto& x : v) x *= c;
  return *this;
}
double Field::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double integrate(const Field& f) {
  auto w = f.grid.x2_weights();
  double dx1 = f.grid.dx1();
  double s = 0.0;
  for (int i = 0; i < f.grid.n1; ++i)
    for (int m = 0; m < f.grid.n2(); ++m) s += f.at(i, m) * w[m];
  return s * dx1;
}

double inner(const Field& a, const Field& b) {
  auto w = a.grid.x2_weights();
  double dx1 = a.grid.dx1();
  double s = 0.0;
  for (int i = 0; i < a.grid.n1; ++i)
    for (int m = 0; m < a.grid.n2(); ++m) s += a.at(i, m) * b.at(i, m) * w[m];
  return s * dx1;
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep_deriv(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 30.0 * s * s * (1.0 + s * (-2.0 + s));
}

double interp_cubic(const std::vector<double>& nodes,
                    const std::vector<double>& vals, double x) {
  return interp_cubic_strided(nodes, vals.data(), 1, x);
}

double interp_cubic_strided(const std::vector<double>& nodes,
                            const double* vals, std::size_t stride, double x) {
  int n = static_cast<int>(nodes.size());
  if (n < 2) throw InputError("interp_cubic: need at least 2 nodes");
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  int k = static_cast<int>(it - nodes.begin()) - 1;
  k = std::clamp(k, 0, n - 2);
  int lo = std::clamp(k - 1, 0, n - 4 < 0 ? 0 : n - 4);
  int pts = std::min(4, n);
  double acc = 0.0;
  for (int a = 0; a < pts; ++a) {
    double L = 1.0;
    for (int b = 0; b < pts; ++b) {
      if (a == b) continue;
      L *= (x - nodes[lo + b]) / (nodes[lo + a] - nodes[lo + b]);
    }
    acc += L * vals[static_cast<std::size_t>(lo + a) * stride];
  }
  return acc;
}

}  // namespace roughflow
