#include "roughflow/euler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/strip_elliptic.hpp"

namespace roughflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;

double ramp_value(const ForcingMode& m, double t) {
  double v = smoothstep(t / m.ramp_time);
  if (m.off_time >= 0.0) v *= 1.0 - smoothstep((t - m.off_time) / m.off_width);
  return v;
}
// int_0^t smoothstep(s / tau) ds, closed form (the ramp is polynomial).
double ramp_integral(double t, double tau) {
  if (t <= 0.0) return 0.0;
  double u = std::min(t / tau, 1.0);
  double u4 = u * u * u * u;
  double head = tau * (2.5 * u4 - 3.0 * u4 * u + u4 * u * u);
  return t > tau ? head + (t - tau) : head;
}

double bump_value(const ForcingMode& m, double x2) {
  return 1.0 - smoothstep((x2 - m.bump_top) / m.bump_width);
}
double bump_deriv(const ForcingMode& m, double x2) {
  return -smoothstep_deriv((x2 - m.bump_top) / m.bump_width) / m.bump_width;
}
// int_0^X bump dx2, closed form.
double bump_integral(const ForcingMode& m, double X) {
  if (X <= m.bump_top) return X;
  double u = std::min((X - m.bump_top) / m.bump_width, 1.0);
  double u4 = u * u * u * u;
  double ss_int = m.bump_width * (2.5 * u4 - 3.0 * u4 * u + u4 * u * u);
  double tail = std::min(X - m.bump_top, m.bump_width);
  double beyond = std::max(0.0, X - m.bump_top - m.bump_width);
  (void)beyond;  // bump is zero there
  return m.bump_top + tail - ss_int;
}

// Complex tridiagonal Thomas solve (diagonally dominant systems only).
void thomas(std::vector<cplx>& dl, std::vector<cplx>& d, std::vector<cplx>& du,
            std::vector<cplx>& b) {
  int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) {
    cplx m = dl[i] / d[i - 1];
    d[i] -= m * du[i - 1];
    b[i] -= m * b[i - 1];
  }
  b[n - 1] /= d[n - 1];
  for (int i = n - 2; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1]) / d[i];
}

struct FlatStepper {
  const StripGrid& grid;
  RealFourier ft;
  double h2;
  int n1, n2;

  explicit FlatStepper(const StripGrid& g)
      : grid(g), ft(g.n1), h2(g.x2[1] - g.x2[0]), n1(g.n1), n2(g.n2()) {
    for (int m = 1; m < n2; ++m)
      if (std::abs((g.x2[m] - g.x2[m - 1]) - h2) > 1e-12)
        throw InputError("flat solver requires a uniform x2 grid");
  }

  // Streamfunction with psi(., 0) = 0 and psi(., L) = top (mode 0 only).
  Field poisson(const Field& omega, double top) const {
    Field psi(grid);
    std::vector<double> row(n1);
    std::vector<std::vector<cplx>> what(n2);
    for (int m = 0; m < n2; ++m) {
      for (int i = 0; i < n1; ++i) row[i] = omega.at(i, m);
      what[m] = ft.forward(row);
    }
    int nmodes = n1 / 2 + 1;
    std::vector<std::vector<cplx>> psihat(n2, std::vector<cplx>(nmodes));
    for (int j = 0; j < nmodes; ++j) {
      double k = kTwoPi * j / grid.period;
      int n = n2;
      std::vector<cplx> dl(n, 1.0 / (h2 * h2)), d(n, -2.0 / (h2 * h2) - k * k),
          du(n, 1.0 / (h2 * h2)), b(n, 0.0);
      for (int m = 1; m + 1 < n; ++m) b[m] = what[m][j];
      d[0] = 1.0;
      du[0] = 0.0;
      b[0] = 0.0;
      d[n - 1] = 1.0;
      dl[n - 1] = 0.0;
      b[n - 1] = j == 0 ? cplx(top * n1) : cplx(0.0);
      thomas(dl, d, du, b);
      for (int m = 0; m < n; ++m) psihat[m][j] = b[m];
    }
    for (int m = 0; m < n2; ++m) {
      auto r = ft.inverse(psihat[m]);
      for (int i = 0; i < n1; ++i) psi.at(i, m) = r[i];
    }
    return psi;
  }

  // d/dx2 with centered interior and one-sided second-order ends.
  void ddx2(const Field& f, Field& out) const {
    for (int i = 0; i < n1; ++i) {
      out.at(i, 0) = (-3 * f.at(i, 0) + 4 * f.at(i, 1) - f.at(i, 2)) / (2 * h2);
      for (int m = 1; m + 1 < n2; ++m)
        out.at(i, m) = (f.at(i, m + 1) - f.at(i, m - 1)) / (2 * h2);
      out.at(i, n2 - 1) = (3 * f.at(i, n2 - 1) - 4 * f.at(i, n2 - 2) +
                           f.at(i, n2 - 3)) / (2 * h2);
    }
  }

  void ddx1(const Field& f, Field& out) const {
    std::vector<double> row(n1);
    for (int m = 0; m < n2; ++m) {
      for (int i = 0; i < n1; ++i) row[i] = f.at(i, m);
      auto d = ft.derivative(row, grid.period);
      for (int i = 0; i < n1; ++i) out.at(i, m) = d[i];
    }
  }

  VectorField velocity(const Field& psi) const {
    VectorField u(grid);
    ddx2(psi, u.c1);
    for (auto& v : u.c1.v) v = -v;
    ddx1(psi, u.c2);
    return u;
  }

  // u . grad omega, dealiased in x1.
  Field advection(const VectorField& u, const Field& omega) const {
    Field d1(grid), d2(grid), adv(grid);
    ddx1(omega, d1);
    ddx2(omega, d2);
    for (std::size_t q = 0; q < adv.v.size(); ++q)
      adv.v[q] = u.c1.v[q] * d1.v[q] + u.c2.v[q] * d2.v[q];
    std::vector<double> row(n1);
    for (int m = 0; m < n2; ++m) {
      for (int i = 0; i < n1; ++i) row[i] = adv.at(i, m);
      auto r = ft.dealias(row);
      for (int i = 0; i < n1; ++i) adv.at(i, m) = r[i];
    }
    return adv;
  }

  double cfl_dt(const VectorField& u, double cfl) const {
    double worst = 0.0;
    double h1 = grid.dx1();
    for (int i = 0; i < n1; ++i)
      for (int m = 0; m < n2; ++m)
        worst = std::max(worst, std::abs(u.c1.at(i, m)) / h1 +
                                    std::abs(u.c2.at(i, m)) / h2);
    return worst > 0 ? cfl / worst : 1e300;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Forcing

ForcingSpec::ForcingSpec(std::vector<ForcingMode> modes)
    : modes_(std::move(modes)) {
  for (auto& m : modes_) {
    if (m.ramp_time <= 0.0)
      throw InputError("ForcingSpec: ramp_time must be positive");
    if (m.off_time >= 0.0 && m.component == 0 && m.m == 0 && !m.use_sin)
      throw InputError(
          "ForcingSpec: switch-off ramps on mean-flow modes lack a closed-"
          "form momentum integral");
    if (m.bump_width <= 0.0)
      throw InputError("ForcingSpec: bump_width must be positive");
    if (m.component != 0 && m.component != 1)
      throw InputError("ForcingSpec: component must be 0 or 1");
  }
}

double ForcingSpec::component(int c, double t, double x1, double x2) const {
  if (t <= 0.0) return 0.0;
  double acc = 0.0;
  for (auto& m : modes_) {
    if (m.component != c) continue;
    double phase = kTwoPi * m.m * x1;
    double trig = m.use_sin ? std::sin(phase) : std::cos(phase);
    acc += m.amplitude * ramp_value(m, t) * trig * bump_value(m, x2);
  }
  return acc;
}

double ForcingSpec::curl(double t, double x1, double x2) const {
  if (t <= 0.0) return 0.0;
  double acc = 0.0;
  for (auto& m : modes_) {
    double a = m.amplitude * ramp_value(m, t);
    double phase = kTwoPi * m.m * x1;
    double trig = m.use_sin ? std::sin(phase) : std::cos(phase);
    double dtrig =
        kTwoPi * m.m * (m.use_sin ? std::cos(phase) : -std::sin(phase));
    if (m.component == 0)
      acc -= a * trig * bump_deriv(m, x2);  // -d_x2 f1
    else
      acc += a * dtrig * bump_value(m, x2);  // d_x1 f2
  }
  return acc;
}

double ForcingSpec::momentum_input(double t, double height) const {
  double acc = 0.0;
  for (auto& m : modes_) {
    if (m.component != 0 || m.m != 0 || m.use_sin) continue;
    acc += m.amplitude * ramp_integral(t, m.ramp_time) *
           bump_integral(m, height);
  }
  return acc;
}

double ForcingSpec::support_top() const {
  double top = 0.0;
  for (auto& m : modes_) top = std::max(top, m.bump_top + m.bump_width);
  return top;
}

// ---------------------------------------------------------------------------
// Base flow

std::vector<EulerState> solve_euler_base(const StripGrid& grid,
                                         const ForcingSpec& f, double T0,
                                         int snapshots,
                                         const EulerOptions& opt) {
  if (snapshots < 2) throw InputError("solve_euler_base: snapshots >= 2");
  FlatStepper st(grid);
  const double height = grid.x2.back();

  Field omega(grid);
  double t = 0.0;
  auto source_at = [&](double tt, Field& out) {
    for (int i = 0; i < grid.n1; ++i)
      for (int m = 0; m < grid.n2(); ++m) {
        double s = f.curl(tt, grid.node_x1(i), grid.x2[m]);
        if (opt.vorticity_source)
          s += opt.vorticity_source(tt, grid.node_x1(i), grid.x2[m]);
        out.at(i, m) += s;
      }
  };
  auto rhs = [&](const Field& w, double tt, Field& dw, VectorField* uout) {
    Field psi = st.poisson(w, -f.momentum_input(tt, height));
    VectorField u = st.velocity(psi);
    dw = st.advection(u, w);
    for (auto& v : dw.v) v = -v;
    source_at(tt, dw);
    if (uout) *uout = std::move(u);
  };

  auto make_state = [&](const Field& w, double tt) {
    EulerState s;
    s.t = tt;
    s.omega = w;
    s.psi = st.poisson(w, -f.momentum_input(tt, height));
    s.u = st.velocity(s.psi);
    return s;
  };

  std::vector<EulerState> out;
  out.reserve(snapshots);
  out.push_back(make_state(omega, 0.0));
  double snap_dt = T0 / (snapshots - 1);
  for (int s = 1; s < snapshots; ++s) {
    double target = s * snap_dt;
    while (t < target - 1e-13) {
      Field k1(grid);
      VectorField u_now(grid);
      rhs(omega, t, k1, &u_now);
      double dt = std::min({st.cfl_dt(u_now, opt.cfl), opt.dt_max, target - t});
      if (dt < opt.dt_min)
        throw TimeStepError("solve_euler_base: time step collapsed");
      Field w1 = omega;
      for (std::size_t q = 0; q < w1.v.size(); ++q) w1.v[q] += dt * k1.v[q];
      Field k2(grid);
      rhs(w1, t + dt, k2, nullptr);
      for (std::size_t q = 0; q < omega.v.size(); ++q)
        omega.v[q] += 0.5 * dt * (k1.v[q] + k2.v[q]);
      t += dt;
    }
    out.push_back(make_state(omega, target));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace lifting

double Cutoff::value(double x2) const {
  if (x2 <= one_until) return 1.0;
  return 1.0 - smoothstep((x2 - one_until) / (zero_from - one_until));
}
double Cutoff::d1(double x2) const {
  if (x2 <= one_until) return 0.0;
  double w = zero_from - one_until;
  return -smoothstep_deriv((x2 - one_until) / w) / w;
}
double Cutoff::d2(double x2) const {
  double h = 1e-5;
  return (d1(x2 + h) - d1(x2 - h)) / (2 * h);
}

namespace {
std::vector<double> antiderivative_x1(const std::vector<double>& h,
                                      double period, double tol) {
  int n = static_cast<int>(h.size());
  RealFourier ft(n);
  auto m = ft.forward(h);
  double mean = std::real(m[0]) / n;
  double scale = 0.0;
  for (double v : h) scale = std::max(scale, std::abs(v));
  if (std::abs(mean) > tol * std::max(1.0, scale))
    throw CompatibilityError("lift_trace: trace has non-zero mean", mean);
  m[0] = 0.0;
  const cplx I(0.0, 1.0);
  for (int j = 1; j < static_cast<int>(m.size()); ++j)
    m[j] /= I * (kTwoPi * j / period);
  if (n % 2 == 0) m[n / 2] = 0.0;
  return ft.inverse(m);
}
}  // namespace

Field lift_stream(const StripGrid& grid, const std::vector<double>& h,
                  const Cutoff& cutoff) {
  auto H = antiderivative_x1(h, grid.period, 1e-10);
  Field out(grid);
  for (int i = 0; i < grid.n1; ++i)
    for (int m = 0; m < grid.n2(); ++m)
      out.at(i, m) = cutoff.value(grid.x2[m]) * H[i];
  return out;
}

VectorField lift_trace(const StripGrid& grid, const std::vector<double>& h,
                       const Cutoff& cutoff, double tol) {
  // Discrete perp-gradient of the lift stream: the discrete divergence then
  // vanishes identically (row and column operators commute), and the wall
  // trace u2 = d_x1 H = h is exact at collocation points.
  Field s = lift_stream(grid, h, cutoff);
  (void)antiderivative_x1(h, grid.period, tol);  // validates the zero mean
  VectorField u(grid);
  auto st = fd_stencils(grid.x2);
  RealFourier ft(grid.n1);
  std::vector<double> row(grid.n1);
  for (int i = 0; i < grid.n1; ++i)
    for (int m = 0; m < grid.n2(); ++m) {
      double acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += st.d1[m][q] * s.at(i, st.idx[m][q]);
      u.c1.at(i, m) = -acc;
    }
  for (int m = 0; m < grid.n2(); ++m) {
    for (int i = 0; i < grid.n1; ++i) row[i] = s.at(i, m);
    auto d = ft.derivative(row, grid.period);
    for (int i = 0; i < grid.n1; ++i) u.c2.at(i, m) = d[i];
  }
  return u;
}

Field lift_vorticity(const StripGrid& grid, const std::vector<double>& h,
                     const Cutoff& cutoff) {
  // Discrete curl of the discrete lift = discrete Laplacian of the lift
  // stream; keeps the lift pieces mutually consistent on coarse grids.
  Field s = lift_stream(grid, h, cutoff);
  Field out(grid);
  RealFourier ft(grid.n1);
  auto st = fd_stencils(grid.x2);
  std::vector<double> row(grid.n1);
  for (int m = 0; m < grid.n2(); ++m) {
    for (int i = 0; i < grid.n1; ++i) row[i] = s.at(i, m);
    auto d2x1 = ft.derivative(row, grid.period, 2);
    for (int i = 0; i < grid.n1; ++i) out.at(i, m) = d2x1[i];
  }
  for (int i = 0; i < grid.n1; ++i)
    for (int m = 0; m < grid.n2(); ++m) {
      double acc = 0.0;
      for (int q = 0; q < 3; ++q) acc += st.d2[m][q] * s.at(i, st.idx[m][q]);
      out.at(i, m) += acc;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot interpolation

namespace {
struct TimeBlend {
  int lo;
  std::array<double, 4> w;
  int pts;
};

TimeBlend time_blend(const std::vector<double>& times, double t) {
  int n = static_cast<int>(times.size());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int k = static_cast<int>(it - times.begin()) - 1;
  k = std::clamp(k, 0, n - 2);
  int lo = std::clamp(k - 1, 0, std::max(0, n - 4));
  int pts = std::min(4, n);
  TimeBlend b{lo, {0, 0, 0, 0}, pts};
  for (int a = 0; a < pts; ++a) {
    double L = 1.0;
    for (int c = 0; c < pts; ++c) {
      if (a == c) continue;
      L *= (t - times[lo + c]) / (times[lo + a] - times[lo + c]);
    }
    b.w[a] = L;
  }
  return b;
}
}  // namespace

Field interp_state_field(const std::vector<EulerState>& series,
                         Field EulerState::* member, double t) {
  std::vector<double> times;
  times.reserve(series.size());
  for (auto& s : series) times.push_back(s.t);
  auto b = time_blend(times, t);
  Field out((series[b.lo].*member).grid);
  for (int a = 0; a < b.pts; ++a) {
    const Field& f = series[b.lo + a].*member;
    for (std::size_t q = 0; q < out.v.size(); ++q) out.v[q] += b.w[a] * f.v[q];
  }
  return out;
}

VectorField interp_state_velocity(const std::vector<EulerState>& series,
                                  double t) {
  std::vector<double> times;
  times.reserve(series.size());
  for (auto& s : series) times.push_back(s.t);
  auto b = time_blend(times, t);
  VectorField out(series[b.lo].u.grid());
  for (int a = 0; a < b.pts; ++a) {
    const VectorField& u = series[b.lo + a].u;
    for (std::size_t q = 0; q < out.c1.v.size(); ++q) {
      out.c1.v[q] += b.w[a] * u.c1.v[q];
      out.c2.v[q] += b.w[a] * u.c2.v[q];
    }
  }
  return out;
}

std::vector<double> wall_trace_u1(const EulerState& s) {
  std::vector<double> out(s.u.grid().n1);
  for (int i = 0; i < s.u.grid().n1; ++i) out[i] = s.u.c1.at(i, 0);
  return out;
}

std::vector<double> wall_trace_d1u1(const EulerState& s) {
  auto u1 = wall_trace_u1(s);
  RealFourier ft(s.u.grid().n1);
  return ft.derivative(u1, s.u.grid().period);
}

// ---------------------------------------------------------------------------
// Linearized cascade order

std::vector<CorrectorState> solve_linearized(
    const StripGrid& grid, const LinearizedProblem& prob,
    const std::vector<EulerState>& base, double T0, int snapshots,
    const EulerOptions& opt) {
  if (!prob.h) throw DependencyError("solve_linearized: trace datum missing");
  if (base.empty())
    throw DependencyError("solve_linearized: base snapshots missing");
  FlatStepper st(grid);
  RealFourier ft(grid.n1);

  auto dlift_w = [&](double t) {
    if (prob.dh_dt) return lift_vorticity(grid, prob.dh_dt(t), prob.cutoff);
    double dtau = 1e-4;
    double tlo = std::max(0.0, t - dtau);
    auto hp = prob.h(t + dtau), hm = prob.h(tlo);
    std::vector<double> dh(hp.size());
    for (std::size_t i = 0; i < hp.size(); ++i)
      dh[i] = (hp[i] - hm[i]) / (t + dtau - tlo);
    return lift_vorticity(grid, dh, prob.cutoff);
  };

  // dM/dt for the impermeable part: int F_1 plus the wall flux of the lift
  // against the base trace.
  auto dM = [&](double t) {
    double acc = prob.forcing_momentum ? prob.forcing_momentum(t) : 0.0;
    auto h = prob.h(t);
    VectorField u0 = interp_state_velocity(base, t);
    double s = 0.0;
    for (int i = 0; i < grid.n1; ++i) s += h[i] * u0.c1.at(i, 0);
    return acc + s * grid.dx1();
  };

  Field omega_U(grid);
  double M_U = 0.0;
  double t = 0.0;

  auto rhs = [&](const Field& wU, double MU, double tt, Field& dw) {
    Field psi = st.poisson(wU, -MU);
    VectorField U = st.velocity(psi);
    VectorField u0 = interp_state_velocity(base, tt);
    Field w0 = interp_state_field(base, &EulerState::omega, tt);
    auto h = prob.h(tt);
    VectorField lift_u = lift_trace(grid, h, prob.cutoff);
    Field lift_w = lift_vorticity(grid, h, prob.cutoff);
    Field dtlw = dlift_w(tt);

    Field gw1(grid), gw2(grid), glw1(grid), glw2(grid), gU1(grid), gU2(grid);
    st.ddx1(w0, gw1);
    st.ddx2(w0, gw2);
    st.ddx1(lift_w, glw1);
    st.ddx2(lift_w, glw2);
    st.ddx1(wU, gU1);
    st.ddx2(wU, gU2);

    for (std::size_t q = 0; q < dw.v.size(); ++q) {
      double adv = u0.c1.v[q] * gU1.v[q] + u0.c2.v[q] * gU2.v[q] +
                   U.c1.v[q] * gw1.v[q] + U.c2.v[q] * gw2.v[q];
      double lift_terms = dtlw.v[q] + u0.c1.v[q] * glw1.v[q] +
                          u0.c2.v[q] * glw2.v[q] + lift_u.c1.v[q] * gw1.v[q] +
                          lift_u.c2.v[q] * gw2.v[q];
      dw.v[q] = -adv - lift_terms;
    }
    if (prob.forcing_curl) prob.forcing_curl(tt, dw);
    std::vector<double> row(grid.n1);
    for (int m = 0; m < grid.n2(); ++m) {
      for (int i = 0; i < grid.n1; ++i) row[i] = dw.at(i, m);
      auto r = ft.dealias(row);
      for (int i = 0; i < grid.n1; ++i) dw.at(i, m) = r[i];
    }
  };

  auto make_state = [&](double tt) {
    CorrectorState s;
    s.t = tt;
    s.k = prob.k;
    Field psi = st.poisson(omega_U, -M_U);
    VectorField U = st.velocity(psi);
    auto h = prob.h(tt);
    VectorField lift_u = lift_trace(grid, h, prob.cutoff);
    Field lift_w = lift_vorticity(grid, h, prob.cutoff);
    s.u = VectorField(grid);
    s.omega = Field(grid);
    for (std::size_t q = 0; q < s.omega.v.size(); ++q) {
      s.u.c1.v[q] = U.c1.v[q] + lift_u.c1.v[q];
      s.u.c2.v[q] = U.c2.v[q] + lift_u.c2.v[q];
      s.omega.v[q] = omega_U.v[q] + lift_w.v[q];
    }
    return s;
  };

  std::vector<CorrectorState> out;
  out.reserve(snapshots);
  out.push_back(make_state(0.0));
  double snap_dt = T0 / (snapshots - 1);
  for (int s = 1; s < snapshots; ++s) {
    double target = s * snap_dt;
    while (t < target - 1e-13) {
      VectorField u0 = interp_state_velocity(base, t);
      double dt = std::min({st.cfl_dt(u0, opt.cfl), opt.dt_max, target - t});
      if (dt < opt.dt_min)
        throw TimeStepError("solve_linearized: time step collapsed");
      Field k1(grid);
      rhs(omega_U, M_U, t, k1);
      double m1 = dM(t);
      Field w1 = omega_U;
      for (std::size_t q = 0; q < w1.v.size(); ++q) w1.v[q] += dt * k1.v[q];
      Field k2(grid);
      rhs(w1, M_U + dt * m1, t + dt, k2);
      double m2 = dM(t + dt);
      for (std::size_t q = 0; q < omega_U.v.size(); ++q)
        omega_U.v[q] += 0.5 * dt * (k1.v[q] + k2.v[q]);
      M_U += 0.5 * dt * (m1 + m2);
      t += dt;
    }
    out.push_back(make_state(target));
  }
  return out;
}

}  // namespace roughflow
