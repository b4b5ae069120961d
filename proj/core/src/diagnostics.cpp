#include "roughflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/halfplane.hpp"
#include "roughflow/strip_elliptic.hpp"

namespace roughflow {

namespace {
constexpr double kSqrtHalfPi = 1.2533141373155003;  // sqrt(pi/2)
}

double weight_phi(const WeightSpec& spec, double zt2) {
  if (zt2 < 0.0) throw InputError("weight_phi: zt2 >= 0 required");
  // int_0^X e^{-s^2/2} ds = sqrt(pi/2) erf(X / sqrt(2))
  double X = std::sqrt(spec.m / spec.nu_tilde) * zt2;
  return std::sqrt(spec.nu_tilde) * kSqrtHalfPi * std::erf(X / std::sqrt(2.0));
}

double weight_phi_deriv(const WeightSpec& spec, double zt2) {
  return std::sqrt(spec.m) * std::exp(-spec.m * zt2 * zt2 / (2.0 * spec.nu_tilde));
}

double weight_phi_limit(const WeightSpec& spec) {
  return std::sqrt(spec.nu_tilde) * kSqrtHalfPi;
}

namespace {

// Weighted L2 over the flattened grid; samples below round-off are zeros.
double weighted_l2(const Field& f, const DomainParams& dom, DomainScale scale,
                   const std::function<double(double, double)>& weight) {
  auto w2 = f.grid.x2_weights();
  double floor = 1e-14 * f.max_abs();
  double acc = 0.0;
  for (int i = 0; i < f.grid.n1; ++i) {
    double s1 = f.grid.node_x1(i);
    for (int m = 0; m < f.grid.n2(); ++m) {
      double v = f.at(i, m);
      if (std::abs(v) <= floor) continue;
      acc += weight(s1, f.grid.x2[m]) * v * v * w2[m];
    }
  }
  return std::sqrt(acc * f.grid.dx1());
}

Field spectral_d1(const Field& f) {
  Field out(f.grid);
  RealFourier ft(f.grid.n1);
  std::vector<double> row(f.grid.n1);
  for (int m = 0; m < f.grid.n2(); ++m) {
    for (int i = 0; i < f.grid.n1; ++i) row[i] = f.at(i, m);
    auto d = ft.derivative(row, f.grid.period);
    for (int i = 0; i < f.grid.n1; ++i) out.at(i, m) = d[i];
  }
  return out;
}

Field fd_d2(const Field& f) {
  Field out(f.grid);
  auto st = fd_stencils(f.grid.x2);
  for (int i = 0; i < f.grid.n1; ++i)
    for (int m = 0; m < f.grid.n2(); ++m) {
      double acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += st.d1[m][q] * f.at(i, st.idx[m][q]);
      out.at(i, m) = acc;
    }
  return out;
}

}  // namespace

double norm(const Field& f, const NormKind& kind, const DomainParams& dom,
            DomainScale scale) {
  switch (kind.tag) {
    case NormKind::L2:
      return weighted_l2(f, dom, scale, [](double, double) { return 1.0; });
    case NormKind::Linf:
      return f.max_abs();
    case NormKind::L2_phi: {
      WeightSpec w = kind.weight;
      return weighted_l2(f, dom, scale, [&](double, double zt2) {
        return weight_phi(w, zt2);
      });
    }
    case NormKind::weighted_exp: {
      double g = kind.gamma, eps = dom.epsilon;
      return weighted_l2(f, dom, scale, [&, g, eps](double s1, double zt2) {
        double x2 = zt2 + wall(dom, scale, s1).w;
        double arg = scale == DomainScale::physical ? x2 / eps : x2;
        return std::exp(2.0 * g * arg);
      });
    }
    case NormKind::Hs_eps_gamma: {
      // sum_{|beta| <= s} || e^{gamma x2/eps} eps^{|beta|} d^beta f ||_L2
      NormKind wexp = NormKind::wexp(kind.gamma);
      double acc = norm(f, wexp, dom, scale);
      if (kind.s >= 1) {
        Field d2f = fd_d2(f);
        Field d1f = spectral_d1(f);
        // un-flattened x1 derivative needs the wall-slope correction
        for (int i = 0; i < f.grid.n1; ++i) {
          double dw = wall(dom, scale, f.grid.node_x1(i)).dw;
          for (int m = 0; m < f.grid.n2(); ++m)
            d1f.at(i, m) -= dw * d2f.at(i, m);
        }
        acc += dom.epsilon * (norm(d1f, wexp, dom, scale) +
                              norm(d2f, wexp, dom, scale));
        if (kind.s >= 2) {
          for (Field* g : {&d1f, &d2f}) {
            Field a = fd_d2(*g), b = spectral_d1(*g);
            for (int i = 0; i < f.grid.n1; ++i) {
              double dw = wall(dom, scale, f.grid.node_x1(i)).dw;
              for (int m = 0; m < f.grid.n2(); ++m)
                b.at(i, m) -= dw * a.at(i, m);
            }
            acc += dom.epsilon * dom.epsilon *
                   (norm(a, wexp, dom, scale) + norm(b, wexp, dom, scale));
          }
        }
        if (kind.s > 2)
          throw InputError("norm: Hs_eps_gamma implemented for s <= 2");
      }
      return acc;
    }
  }
  throw InputError("norm: unsupported kind");
}

// ---------------------------------------------------------------------------
// Trace and identity checks

namespace {

// Integral over the strip above the wall up to `height`, rectangle rule in
// the periodic direction and adaptive quadrature vertically.
double strip_integral(const std::function<double(double, double)>& f,
                      const DomainParams& dom, DomainScale scale, int n1,
                      double height, double quad_tol) {
  double period = domain_period(dom, scale);
  double acc = 0.0;
  for (int i = 0; i < n1; ++i) {
    double s1 = period * i / n1;
    double w0 = wall(dom, scale, s1).w;
    acc += integrate_gk([&](double x2) { return f(s1, x2); }, w0, height,
                        quad_tol);
  }
  return acc * period / n1;
}

double boundary_integral_sq(const std::function<double(double)>& f,
                            const DomainParams& dom, DomainScale scale,
                            int n1) {
  double period = domain_period(dom, scale);
  double acc = 0.0;
  for (int i = 0; i < n1; ++i) {
    double s1 = period * i / n1;
    double z1 = scale == DomainScale::physical ? s1 / dom.epsilon : s1;
    double br = frame(dom, z1).bracket;
    double v = f(s1);
    acc += v * v * br;
  }
  return acc * period / n1;
}

struct VJet {
  double v1, v2, d1v1, d2v1, d1v2, d2v2, curl;
};

VJet stream_to_velocity(const ScalarJetField& stream, double x1, double x2) {
  Jet2 p = stream(Jet2::var_x(x1), Jet2::var_y(x2));
  VJet o;
  o.v1 = -p.deriv(0, 1);
  o.v2 = p.deriv(1, 0);
  o.d1v1 = -p.deriv(1, 1);
  o.d2v1 = -p.deriv(0, 2);
  o.d1v2 = p.deriv(2, 0);
  o.d2v2 = p.deriv(1, 1);
  o.curl = p.deriv(2, 0) + p.deriv(0, 2);
  return o;
}

}  // namespace

RatioCheck trace_inequality_check(const ScalarJetField& f,
                                  const DomainParams& dom, int n1, int n2,
                                  double height) {
  (void)n2;
  auto ratio_at = [&](double quad_tol, int nn1) {
    double bnd = boundary_integral_sq(
        [&](double x1) {
          double w0 = wall(dom, DomainScale::physical, x1).w;
          return f(Jet2::var_x(x1), Jet2::var_y(w0)).value();
        },
        dom, DomainScale::physical, nn1);
    double l2 = strip_integral(
        [&](double x1, double x2) {
          double v = f(Jet2::var_x(x1), Jet2::var_y(x2)).value();
          return v * v;
        },
        dom, DomainScale::physical, nn1, height, quad_tol);
    double dl2 = strip_integral(
        [&](double x1, double x2) {
          double v = f(Jet2::var_x(x1), Jet2::var_y(x2)).deriv(0, 1);
          return v * v;
        },
        dom, DomainScale::physical, nn1, height, quad_tol);
    double C = std::sqrt(2.0) *
               std::pow(1.0 + std::pow(dom.profile.sup_abs_derivative(1), 2),
                        0.25);
    double den = C * std::pow(l2, 0.25) * std::pow(dl2, 0.25);
    return std::pair<double, double>(std::sqrt(bnd), den);
  };
  auto [num_c, den_c] = ratio_at(1e-9, n1);
  auto [num_f, den_f] = ratio_at(1e-11, 2 * n1);
  RatioCheck out;
  if (den_f < 1e-150) {
    out.degenerate = true;
    return out;
  }
  out.ratio = num_f / den_f;
  out.error_est = std::abs(num_c / den_c - out.ratio) + 1e-11;
  return out;
}

RatioCheck curl_trace_check(const ScalarJetField& stream,
                            const DomainParams& dom, int n1, int n2,
                            double height) {
  (void)n2;
  auto ratio_at = [&](double quad_tol, int nn1) {
    double bnd = 0.0;
    {
      double period = domain_period(dom, DomainScale::rescaled);
      for (int i = 0; i < nn1; ++i) {
        double z1 = period * i / nn1;
        double w0 = wall(dom, DomainScale::rescaled, z1).w;
        auto vj = stream_to_velocity(stream, z1, w0);
        double br = frame(dom, z1).bracket;
        bnd += (vj.v1 * vj.v1 + vj.v2 * vj.v2) * br;
      }
      bnd *= period / nn1;
    }
    double l2 = strip_integral(
        [&](double z1, double z2) {
          auto vj = stream_to_velocity(stream, z1, z2);
          return vj.v1 * vj.v1 + vj.v2 * vj.v2;
        },
        dom, DomainScale::rescaled, nn1, height, quad_tol);
    double c2 = strip_integral(
        [&](double z1, double z2) {
          auto vj = stream_to_velocity(stream, z1, z2);
          return vj.curl * vj.curl;
        },
        dom, DomainScale::rescaled, nn1, height, quad_tol);
    double g = dom.eps_alpha() * dom.profile.sup_abs_derivative(1);
    double C = std::sqrt(2.0) * std::pow(1.0 + g * g, 0.25);
    return std::pair<double, double>(
        std::sqrt(bnd), C * std::pow(l2, 0.25) * std::pow(c2, 0.25));
  };
  auto [num_c, den_c] = ratio_at(1e-9, n1);
  auto [num_f, den_f] = ratio_at(1e-11, 2 * n1);
  RatioCheck out;
  if (den_f < 1e-150) {
    out.degenerate = true;
    return out;
  }
  out.ratio = num_f / den_f;
  out.error_est = std::abs(num_c / den_c - out.ratio) + 1e-11;
  return out;
}

RatioCheck grad_curl_check(const ScalarJetField& stream,
                           const DomainParams& dom, int n1, int n2,
                           double height) {
  (void)n2;
  auto ratio_at = [&](double quad_tol, int nn1) {
    double grad2 = strip_integral(
        [&](double z1, double z2) {
          auto vj = stream_to_velocity(stream, z1, z2);
          return vj.d1v1 * vj.d1v1 + vj.d2v1 * vj.d2v1 + vj.d1v2 * vj.d1v2 +
                 vj.d2v2 * vj.d2v2;
        },
        dom, DomainScale::rescaled, nn1, height, quad_tol);
    double c2 = strip_integral(
        [&](double z1, double z2) {
          auto vj = stream_to_velocity(stream, z1, z2);
          return vj.curl * vj.curl;
        },
        dom, DomainScale::rescaled, nn1, height, quad_tol);
    double l2 = strip_integral(
        [&](double z1, double z2) {
          auto vj = stream_to_velocity(stream, z1, z2);
          return vj.v1 * vj.v1 + vj.v2 * vj.v2;
        },
        dom, DomainScale::rescaled, nn1, height, quad_tol);
    double C = dom.profile.sup_abs_derivative(2) *
               std::sqrt(1.0 + std::pow(dom.eps_alpha() *
                                            dom.profile.sup_abs_derivative(1),
                                        2));
    double den = std::sqrt(c2) + C * dom.eps_alpha() * std::sqrt(l2);
    return std::pair<double, double>(std::sqrt(grad2), den);
  };
  auto [num_c, den_c] = ratio_at(1e-9, n1);
  auto [num_f, den_f] = ratio_at(1e-11, 2 * n1);
  RatioCheck out;
  if (den_f < 1e-150) {
    out.degenerate = true;
    return out;
  }
  out.ratio = num_f / den_f;
  out.error_est = std::abs(num_c / den_c - out.ratio) + 1e-11;
  return out;
}

RatioCheck curl_trace_check_field(const VectorField& v, const DomainParams& dom,
                                  double precondition_tol) {
  const StripGrid& g = v.grid();
  // Preconditions: discrete divergence (flattened operators) and tangency.
  RealFourier ft(g.n1);
  auto st = fd_stencils(g.x2);
  double scale = std::max(v.c1.max_abs() + v.c2.max_abs(), 1e-30);
  std::vector<double> row(g.n1);
  double worst_div = 0.0;
  Field d2v2(g);
  for (int i = 0; i < g.n1; ++i)
    for (int m = 0; m < g.n2(); ++m) {
      double acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += st.d1[m][q] * v.c2.at(i, st.idx[m][q]);
      d2v2.at(i, m) = acc;
    }
  for (int m = 1; m + 1 < g.n2(); ++m) {
    for (int i = 0; i < g.n1; ++i) row[i] = v.c1.at(i, m);
    auto d1 = ft.derivative(row, g.period);
    for (int i = 0; i < g.n1; ++i) {
      double dw = wall(dom, DomainScale::rescaled, g.node_x1(i)).dw;
      double d2c1 = 0.0;
      for (int q = 0; q < 3; ++q) d2c1 += st.d1[m][q] * v.c1.at(i, st.idx[m][q]);
      worst_div = std::max(worst_div,
                           std::abs(d1[i] - dw * d2c1 + d2v2.at(i, m)));
    }
  }
  double worst_tan = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    auto fr = frame(dom, g.node_x1(i));
    worst_tan = std::max(worst_tan, std::abs(v.c1.at(i, 0) * fr.n[0] +
                                             v.c2.at(i, 0) * fr.n[1]));
  }
  if (worst_div > precondition_tol * scale || worst_tan > precondition_tol * scale)
    throw InputError("curl_trace_check_field: field is not admissible "
                     "(divergence or tangency violated)");

  // Discrete curl in flattened coordinates.
  Field curl(g);
  for (int m = 0; m < g.n2(); ++m) {
    for (int i = 0; i < g.n1; ++i) row[i] = v.c2.at(i, m);
    auto d1 = ft.derivative(row, g.period);
    for (int i = 0; i < g.n1; ++i) curl.at(i, m) = d1[i];
  }
  for (int i = 0; i < g.n1; ++i) {
    double dw = wall(dom, DomainScale::rescaled, g.node_x1(i)).dw;
    for (int m = 0; m < g.n2(); ++m) {
      double d2c1 = 0.0, d2c2 = 0.0;
      for (int q = 0; q < 3; ++q) {
        d2c1 += st.d1[m][q] * v.c1.at(i, st.idx[m][q]);
        d2c2 += st.d1[m][q] * v.c2.at(i, st.idx[m][q]);
      }
      curl.at(i, m) += -dw * d2c2 - d2c1;
    }
  }
  double bnd = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    double br = frame(dom, g.node_x1(i)).bracket;
    bnd += (v.c1.at(i, 0) * v.c1.at(i, 0) + v.c2.at(i, 0) * v.c2.at(i, 0)) * br;
  }
  bnd = std::sqrt(bnd * g.dx1());
  double l2 = std::sqrt(inner(v.c1, v.c1) + inner(v.c2, v.c2));
  double c2 = l2_norm(curl);
  double gg = dom.eps_alpha() * dom.profile.sup_abs_derivative(1);
  double C = std::sqrt(2.0) * std::pow(1.0 + gg * gg, 0.25);
  RatioCheck out;
  double den = C * std::sqrt(l2) * std::sqrt(c2);
  if (den < 1e-150) {
    out.degenerate = true;
    return out;
  }
  out.ratio = bnd / den;
  out.error_est = 0.05 * out.ratio;  // second-order grid quadrature
  return out;
}

IdentityCheck stretch_identity_check(const ScalarJetField& stream_v,
                                     const ScalarJetField& stream_u,
                                     const DomainParams& dom, int n1, int n2,
                                     double height) {
  // Composite Simpson in the wall-normal direction (4th-order quadrature, so
  // the discrepancy of the exact identity shrinks 16x per refinement) and
  // the rectangle rule along the period.
  if (n2 % 2 == 0) ++n2;
  double period = domain_period(dom, DomainScale::rescaled);
  double lhs = 0.0, rhs = 0.0, v_l2sq = 0.0, gu_max = 0.0;
  for (int i = 0; i < n1; ++i) {
    double z1 = period * i / n1;
    double w0 = wall(dom, DomainScale::rescaled, z1).w;
    double hh = (height - w0) / (n2 - 1);
    for (int m = 0; m < n2; ++m) {
      double z2 = w0 + hh * m;
      double wq = (m == 0 || m == n2 - 1) ? 1.0 : (m % 2 ? 4.0 : 2.0);
      wq *= hh / 3.0;
      auto v = stream_to_velocity(stream_v, z1, z2);
      auto u = stream_to_velocity(stream_u, z1, z2);
      double a1 = v.v1 * u.d1v1 + v.v2 * u.d2v1;
      double a2 = v.v1 * u.d1v2 + v.v2 * u.d2v2;
      lhs += wq * (v.v1 * a1 + v.v2 * a2);
      rhs += wq * (v.v1 * (-u.v2) + v.v2 * u.v1) * v.curl;
      v_l2sq += wq * (v.v1 * v.v1 + v.v2 * v.v2);
      gu_max = std::max({gu_max, std::abs(u.d1v1), std::abs(u.d2v1),
                         std::abs(u.d1v2), std::abs(u.d2v2)});
    }
  }
  double dx1 = period / n1;
  IdentityCheck out;
  out.discrepancy = std::abs(lhs - rhs) * dx1;
  out.normalization = std::max(v_l2sq * dx1 * gu_max, 1e-300);
  return out;
}

double rescaled_l2_norm(
    const std::function<double(double, double, double)>& profile,
    double decay_rate, double gamma, const DomainParams& dom, int n1,
    double quad_tol) {
  if (gamma >= decay_rate)
    throw InputError("rescaled_l2_norm: gamma must stay below the decay rate");
  // Substituting x2 = eps z2:
  //   LHS^2 = eps int_0^1 int_{eps^a eta(x1/eps)}^inf e^{2 gamma z2} |f|^2.
  double zmax = 40.0 / std::max(decay_rate - gamma, 0.25);
  double acc = 0.0;
  for (int i = 0; i < n1; ++i) {
    double x1 = double(i) / n1;
    double z1 = x1 / dom.epsilon;
    double w0 = dom.eps_alpha() * dom.profile.value(z1);
    acc += integrate_gk(
        [&](double z2) {
          double v = profile(x1, z1, z2);
          return std::exp(2.0 * gamma * z2) * v * v;
        },
        w0, zmax, quad_tol);
  }
  return std::sqrt(dom.epsilon * acc / n1);
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw InputError("rate_fit: at least 3 points required");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (auto& [e, v] : points) {
    if (!(v > 0.0) || !(e > 0.0))
      throw InputError("rate_fit: positive values required");
    double x = std::log(e), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  RateFit out;
  double det = n * sxx - sx * sx;
  out.slope = (n * sxy - sx * sy) / det;
  double icpt = (sy - out.slope * sx) / n;
  double ss_tot = syy - sy * sy / n, ss_res = 0.0;
  for (auto& [e, v] : points) {
    double r = std::log(v) - (icpt + out.slope * std::log(e));
    ss_res += r * r;
  }
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace roughflow
