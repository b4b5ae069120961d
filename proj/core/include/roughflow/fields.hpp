#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace roughflow {

/// Tensor-product grid on a periodic strip: n1 equispaced collocation points
/// on [0, period) crossed with a monotone column of wall-normal nodes x2
/// (flattened coordinate, x2[0] == 0 at the wall).
struct StripGrid {
  int n1 = 0;
  double period = 1.0;
  std::vector<double> x2;

  int n2() const { return static_cast<int>(x2.size()); }
  std::size_t size() const { return static_cast<std::size_t>(n1) * x2.size(); }
  double dx1() const { return period / n1; }
  double node_x1(int i) const { return period * i / n1; }
  std::size_t index(int i, int m) const {
    return static_cast<std::size_t>(i) * x2.size() + m;
  }

  /// Trapezoid weights along x2.
  std::vector<double> x2_weights() const;

  bool same_shape(const StripGrid& o) const {
    return n1 == o.n1 && x2.size() == o.x2.size();
  }
};

/// Uniform nodes 0..len with n points.
std::vector<double> uniform_nodes(double len, int n);

/// Uniform spacing h on [0, z_switch], then geometric growth to z_max.
std::vector<double> stretched_nodes(double h, double z_switch, double z_max,
                                    double growth = 1.06);

/// tanh-clustered nodes on [0, len]: `frac` of the n points land inside
/// [0, width]. Spacing grows monotonically away from the wall.
std::vector<double> tanh_nodes(double len, int n, double width, double frac);

/// Scalar field sampled on a StripGrid, row-major over (i, m).
struct Field {
  StripGrid grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(StripGrid g) : grid(std::move(g)), v(grid.size(), 0.0) {}

  double& at(int i, int m) { return v[grid.index(i, m)]; }
  double at(int i, int m) const { return v[grid.index(i, m)]; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double c);

  double max_abs() const;
};

/// Two-component vector field on a shared grid.
struct VectorField {
  Field c1, c2;
  VectorField() = default;
  explicit VectorField(const StripGrid& g) : c1(g), c2(g) {}
  const StripGrid& grid() const { return c1.grid; }
};

/// L2(grid) inner product with trapezoid weights in x2 and exact (rectangle)
/// weights in the periodic direction. The flattening map is volume
/// preserving, so this equals integration over the physical domain.
double integrate(const Field& f);
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);

/// C^2 polynomial ramp: 0 for s <= 0, 1 for s >= 1, quintic smoothstep between.
double smoothstep(double s);
double smoothstep_deriv(double s);

/// Cubic (4-point Lagrange) interpolation on a monotone node vector.
double interp_cubic(const std::vector<double>& nodes,
                    const std::vector<double>& vals, double x);
/// Same nodes, many stacked value columns: interpolates column `stride` apart.
double interp_cubic_strided(const std::vector<double>& nodes,
                            const double* vals, std::size_t stride, double x);

}  // namespace roughflow
