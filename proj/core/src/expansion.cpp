#include "roughflow/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "roughflow/diagnostics.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"

namespace roughflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;

// 4-point Lagrange blend over a monotone time vector, value and derivative.
struct Blend {
  int lo = 0, pts = 0;
  std::array<double, 4> w{}, dw{};
};
Blend blend_at(const std::vector<double>& times, double t) {
  int n = static_cast<int>(times.size());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int k = std::clamp(static_cast<int>(it - times.begin()) - 1, 0, n - 2);
  Blend b;
  b.lo = std::clamp(k - 1, 0, std::max(0, n - 4));
  b.pts = std::min(4, n);
  for (int a = 0; a < b.pts; ++a) {
    double L = 1.0, dL = 0.0;
    for (int c = 0; c < b.pts; ++c) {
      if (c == a) continue;
      L *= (t - times[b.lo + c]) / (times[b.lo + a] - times[b.lo + c]);
    }
    for (int c = 0; c < b.pts; ++c) {
      if (c == a) continue;
      double term = 1.0 / (times[b.lo + a] - times[b.lo + c]);
      for (int d = 0; d < b.pts; ++d) {
        if (d == a || d == c) continue;
        term *= (t - times[b.lo + d]) / (times[b.lo + a] - times[b.lo + d]);
      }
      dL += term;
    }
    b.w[a] = L;
    b.dw[a] = dL;
  }
  return b;
}

// Exact Fourier resampling of a band-limited periodic row to n_out points.
std::vector<double> resample_row(const std::vector<double>& row, int n_out) {
  int n_in = static_cast<int>(row.size());
  if (n_in == n_out) return row;
  RealFourier fin(n_in);
  auto spec = fin.forward(row);
  RealFourier fout(n_out);
  std::vector<cplx> padded(n_out / 2 + 1, cplx(0.0));
  int jmax = std::min(n_in / 2, n_out / 2);
  double scale = double(n_out) / n_in;
  for (int j = 0; j <= jmax && j < static_cast<int>(spec.size()); ++j)
    padded[j] = spec[j] * scale;
  return fout.inverse(padded);
}

}  // namespace

// ---------------------------------------------------------------------------
// TraceTable

TraceTable::TraceTable(std::vector<double> times,
                       std::vector<std::vector<double>> rows)
    : times_(std::move(times)), rows_(std::move(rows)) {
  if (times_.size() != rows_.size() || times_.size() < 2)
    throw InputError("TraceTable: mismatched or insufficient rows");
}

std::vector<double> TraceTable::eval(double t) const {
  auto b = blend_at(times_, t);
  std::vector<double> out(rows_[0].size(), 0.0);
  for (int a = 0; a < b.pts; ++a)
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += b.w[a] * rows_[b.lo + a][i];
  return out;
}

std::vector<double> TraceTable::deriv(double t) const {
  auto b = blend_at(times_, t);
  std::vector<double> out(rows_[0].size(), 0.0);
  for (int a = 0; a < b.pts; ++a)
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += b.dw[a] * rows_[b.lo + a][i];
  return out;
}

// ---------------------------------------------------------------------------
// Bundle construction

StripGrid default_eval_grid(const DomainParams& dom, double height,
                            int per_period, int wall_refine) {
  StripGrid g;
  g.period = 1.0;
  g.n1 = std::max(32, per_period * dom.inv_epsilon());
  double hw = dom.epsilon / wall_refine;
  g.x2 = stretched_nodes(hw, 8.0 * dom.epsilon, height, 1.08);
  return g;
}

ApproximationBundle::ApproximationBundle(DomainParams dom,
                                         std::vector<EulerState> base,
                                         const Build& opt)
    : dom_(std::move(dom)), N_(opt.N), base_(std::move(base)) {
  if (N_ < 1) throw InputError("build_uapp: N >= 1 required");
  if (base_.size() < 2) throw DependencyError("build_uapp: base flow missing");
  if (N_ > dom_.n0 + 1)
    throw DependencyError(
        "build_uapp: orders beyond n0+1 need wall jets of nonzero correctors; "
        "only N <= n0 + 1 is built");

  StripGrid cg = opt.cell_grid;
  if (cg.n1 == 0) {
    cg.n1 = 64;
    cg.period = 1.0;
    cg.x2 = stretched_nodes(0.02, 4.0, 8.0);
  }
  cell_ = std::make_unique<CellSolver>(dom_, cg);

  // Unit order-1 layer: psi_u solves the Neumann problem with datum
  // g_u = eta' / bracket; the trace u1(t, x1, 0) scales it.
  std::vector<double> g_u(cg.n1);
  for (int i = 0; i < cg.n1; ++i) {
    auto pj = dom_.profile.eval(cg.node_x1(i));
    double s = dom_.eps_alpha() * pj.deta;
    g_u[i] = pj.deta / std::sqrt(1.0 + s * s);
  }
  CellProblemData d1;
  d1.k = 1;
  d1.neumann_data = g_u;
  psi1_u_ = std::make_unique<SpectralSolution>(cell_->solve_neumann_cell(d1));
  v1_unit_ = cell_->assemble_layer(*psi1_u_, 0.0, 0.0).v;
  C1_ = integrate(v1_unit_.c1);

  // Trace tables from the base snapshots.
  std::vector<double> times;
  std::vector<std::vector<double>> arows, brows;
  for (auto& s : base_) {
    times.push_back(s.t);
    arows.push_back(wall_trace_u1(s));
    brows.push_back(wall_trace_d1u1(s));
  }
  a_table_ = TraceTable(times, arows);
  b_table_ = TraceTable(times, brows);

  if (N_ < dom_.n0 + 1) return;  // orders 2..n0 vanish identically

  // Unit order-(n0+1) layer, driven by the trace factor b = d_x1 u1(., 0):
  // sources are -d_x1 of the order-1 layer, wall datum (eta - mean + C1)/br.
  Field s_psi(cg), s_phi(cg);
  for (std::size_t q = 0; q < s_psi.v.size(); ++q) {
    s_psi.v[q] = -v1_unit_.c1.v[q];
    s_phi.v[q] = -v1_unit_.c2.v[q];
  }
  double eta_mean = dom_.profile.mean();
  std::vector<double> g3(cg.n1);
  for (int i = 0; i < cg.n1; ++i) {
    auto pj = dom_.profile.eval(cg.node_x1(i));
    double s = dom_.eps_alpha() * pj.deta;
    g3[i] = (pj.eta - eta_mean + C1_) / std::sqrt(1.0 + s * s);
  }
  CellProblemData d3;
  d3.k = dom_.n0 + 1;
  d3.source = s_psi;
  d3.neumann_data = g3;
  psi3_u_ = std::make_unique<SpectralSolution>(cell_->solve_neumann_cell(d3));
  CellProblemData d3p;
  d3p.k = dom_.n0 + 1;
  d3p.source = s_phi;
  phi3_u_ =
      std::make_unique<SpectralSolution>(cell_->solve_dirichlet_cell(d3p));
  v3_unit_ = cell_->assemble_layer(*psi3_u_, *phi3_u_, 0.0, 0.0).v;

  // Discrete two-scale curl of the unit order-3 layer on the cell grid.
  {
    curl3_unit_ = Field(cg);
    RealFourier ft(cg.n1);
    auto st = fd_stencils(cg.x2);
    std::vector<double> row(cg.n1);
    for (int m = 0; m < cg.n2(); ++m) {
      for (int i = 0; i < cg.n1; ++i) row[i] = v3_unit_.c2.at(i, m);
      auto dr = ft.derivative(row, 1.0);
      for (int i = 0; i < cg.n1; ++i) curl3_unit_.at(i, m) = dr[i];
    }
    for (int i = 0; i < cg.n1; ++i) {
      double dw = wall(dom_, DomainScale::cell, cg.node_x1(i)).dw;
      for (int m = 0; m < cg.n2(); ++m) {
        double d2c1 = 0.0, d2c2 = 0.0;
        for (int q = 0; q < 3; ++q) {
          d2c1 += st.d1[m][q] * v3_unit_.c1.at(i, st.idx[m][q]);
          d2c2 += st.d1[m][q] * v3_unit_.c2.at(i, st.idx[m][q]);
        }
        curl3_unit_.at(i, m) += -dw * d2c2 - d2c1;
      }
    }
  }

  // h^{n0+1} through the general compatibility machinery on the materialized
  // order-1 layer family (also asserts its zero mean at every snapshot).
  int nx = base_[0].u.grid().n1;
  std::vector<std::vector<double>> h_rows;
  for (std::size_t s = 0; s < base_.size(); ++s) {
    auto& a_row = arows[s];
    auto& b_row = brows[s];
    std::vector<LayerProfile> family(nx);
    std::vector<std::vector<double>> bsum(nx, std::vector<double>(cg.n1));
    for (int i = 0; i < nx; ++i) {
      LayerProfile p;
      p.grid = cg;
      p.t = times[s];
      p.x1 = double(i) / nx;
      p.v = VectorField(cg);
      for (std::size_t q = 0; q < p.v.c1.v.size(); ++q) {
        p.v.c1.v[q] = a_row[i] * v1_unit_.c1.v[q];
        p.v.c2.v[q] = a_row[i] * v1_unit_.c2.v[q];
      }
      family[i] = std::move(p);
      WallJets jets;
      jets.d = {{a_row[i], 0.0}, {0.0, -b_row[i]}};  // d2 u2 = -d1 u1
      for (int q = 0; q < cg.n1; ++q)
        bsum[i][q] =
            boundary_operator_B(dom_.n0 + 1, jets, dom_, cg.node_x1(q));
    }
    h_rows.push_back(
        compatibility_source_h(dom_.n0 + 1, family, bsum, dom_, opt.trace_tol));
  }
  h3_table_ = TraceTable(times, h_rows);

  // Interior corrector of order n0+1 (lower orders vanish, so the quadratic
  // interaction forcing is zero).
  LinearizedProblem prob;
  prob.k = dom_.n0 + 1;
  prob.h = [this](double t) { return h3_table_.eval(t); };
  prob.dh_dt = [this](double t) { return h3_table_.deriv(t); };
  u3_ = solve_linearized(base_[0].u.grid(), prob, base_, base_.back().t,
                         static_cast<int>(base_.size()));
}

ApproximationBundle build_uapp(int N, const DomainParams& dom,
                               const std::vector<EulerState>& base,
                               const ApproximationBundle::Build& opt) {
  ApproximationBundle::Build b = opt;
  b.N = N;
  return ApproximationBundle(dom, base, b);
}

const TraceTable& ApproximationBundle::h_table(int k) const {
  if (k != dom_.n0 + 1)
    throw DependencyError("h_table: only the order n0+1 datum is non-zero");
  return h3_table_;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// Interpolate a flat-grid field (uniform x2) onto the eval grid, shifting by
// the physical wall height; x2 is clamped at the flat domain top.
void flat_to_eval(const Field& src, const StripGrid& eval,
                  const DomainParams& dom, Field& out, double amp = 1.0) {
  const StripGrid& fg = src.grid;
  int n1e = eval.n1;
  std::vector<std::vector<double>> rows(fg.n2());
  std::vector<double> row(fg.n1);
  for (int m = 0; m < fg.n2(); ++m) {
    for (int i = 0; i < fg.n1; ++i) row[i] = src.at(i, m);
    rows[m] = resample_row(row, n1e);
  }
  double top = fg.x2.back();
  std::vector<double> col(fg.n2());
  for (int i = 0; i < n1e; ++i) {
    double w = wall(dom, DomainScale::physical, eval.node_x1(i)).w;
    for (int m = 0; m < fg.n2(); ++m) col[m] = rows[m][i];
    for (int me = 0; me < eval.n2(); ++me) {
      double x2 = std::min(eval.x2[me] + w, top);
      out.at(i, me) += amp * interp_cubic(fg.x2, col, x2);
    }
  }
}

}  // namespace

VectorField ApproximationBundle::sample_layer_units(const StripGrid& eval,
                                                    double t, bool order1,
                                                    bool order3) const {
  const StripGrid& cg = cell_->grid();
  VectorField out(eval);
  auto a = trace_factor_a(t, eval.n1);
  auto b = trace_factor_b(t, eval.n1);
  double ea = dom_.eps_alpha();
  double amp1 = ea, amp3 = std::pow(ea, dom_.n0 + 1);

  RealFourier ft(cg.n1);
  auto spectra_of = [&](const Field& f) {
    std::vector<std::vector<cplx>> s(cg.n2());
    std::vector<double> row(cg.n1);
    for (int m = 0; m < cg.n2(); ++m) {
      for (int i = 0; i < cg.n1; ++i) row[i] = f.at(i, m);
      s[m] = ft.forward(row);
    }
    return s;
  };
  struct Part {
    const Field* comp;
    double amp;
    int factor;  // 0 -> a, 1 -> b
    Field* out;
  };
  std::vector<Part> parts;
  if (order1) {
    parts.push_back({&v1_unit_.c1, amp1, 0, &out.c1});
    parts.push_back({&v1_unit_.c2, amp1, 0, &out.c2});
  }
  if (order3 && N_ >= dom_.n0 + 1 && psi3_u_) {
    parts.push_back({&v3_unit_.c1, amp3, 1, &out.c1});
    parts.push_back({&v3_unit_.c2, amp3, 1, &out.c2});
  }
  int J = cg.n1 / 2;
  std::vector<cplx> phases(J + 1);
  std::vector<double> col(cg.n2());
  for (auto& part : parts) {
    auto spec = spectra_of(*part.comp);
    for (int i = 0; i < eval.n1; ++i) {
      double z1 = eval.node_x1(i) / dom_.epsilon;
      z1 -= std::floor(z1);
      for (int j = 0; j <= J; ++j)
        phases[j] = std::exp(cplx(0.0, kTwoPi * j * z1));
      for (int m = 0; m < cg.n2(); ++m) {
        cplx acc = spec[m][0];
        for (int j = 1; j < J; ++j) acc += 2.0 * spec[m][j] * phases[j];
        acc += spec[m][J] * phases[J];
        col[m] = std::real(acc) / cg.n1;
      }
      double factor = part.factor == 0 ? a[i] : b[i];
      if (factor == 0.0) continue;
      for (int me = 0; me < eval.n2(); ++me) {
        double zt2 = eval.x2[me] / dom_.epsilon;
        if (zt2 > cg.x2.back()) continue;  // decayed below round-off
        part.out->at(i, me) +=
            part.amp * factor * interp_cubic(cg.x2, col, zt2);
      }
    }
  }
  return out;
}

std::vector<double> ApproximationBundle::trace_factor_a(double t,
                                                        int n1) const {
  return resample_row(a_table_.eval(t), n1);
}
std::vector<double> ApproximationBundle::trace_factor_b(double t,
                                                        int n1) const {
  return resample_row(b_table_.eval(t), n1);
}

VectorField ApproximationBundle::base_velocity(const StripGrid& eval,
                                               double t) const {
  VectorField u0 = interp_state_velocity(base_, t);
  VectorField out(eval);
  flat_to_eval(u0.c1, eval, dom_, out.c1);
  flat_to_eval(u0.c2, eval, dom_, out.c2);
  return out;
}

VectorField ApproximationBundle::interior_correction(const StripGrid& eval,
                                                     double t) const {
  VectorField out(eval);
  if (u3_.empty()) return out;
  std::vector<double> times;
  for (auto& s : u3_) times.push_back(s.t);
  auto b = blend_at(times, t);
  const StripGrid& fg = u3_[0].u.grid();
  VectorField blended(fg);
  for (int a = 0; a < b.pts; ++a) {
    const auto& s = u3_[b.lo + a];
    for (std::size_t q = 0; q < blended.c1.v.size(); ++q) {
      blended.c1.v[q] += b.w[a] * s.u.c1.v[q];
      blended.c2.v[q] += b.w[a] * s.u.c2.v[q];
    }
  }
  double amp = std::pow(dom_.eps_alpha(), dom_.n0 + 1);
  flat_to_eval(blended.c1, eval, dom_, out.c1, amp);
  flat_to_eval(blended.c2, eval, dom_, out.c2, amp);
  return out;
}

VectorField ApproximationBundle::layer_velocity(const StripGrid& eval,
                                                double t) const {
  return sample_layer_units(eval, t, true, true);
}

VectorField ApproximationBundle::velocity(const StripGrid& eval,
                                          double t) const {
  VectorField out = base_velocity(eval, t);
  VectorField corr = interior_correction(eval, t);
  VectorField lay = layer_velocity(eval, t);
  for (std::size_t q = 0; q < out.c1.v.size(); ++q) {
    out.c1.v[q] += corr.c1.v[q] + lay.c1.v[q];
    out.c2.v[q] += corr.c2.v[q] + lay.c2.v[q];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Defects and structure checks

namespace {

struct SpectralSampler {
  // Evaluate a periodic field (given on a uniform x1 grid) at arbitrary x1
  // by its Fourier sum, with cubic interpolation vertically.
  std::vector<std::vector<cplx>> spec;
  std::vector<double> x2;
  int n1;

  SpectralSampler(const Field& f) : x2(f.grid.x2), n1(f.grid.n1) {
    RealFourier ft(n1);
    spec.resize(f.grid.n2());
    std::vector<double> row(n1);
    for (int m = 0; m < f.grid.n2(); ++m) {
      for (int i = 0; i < n1; ++i) row[i] = f.at(i, m);
      spec[m] = ft.forward(row);
    }
  }
  double row_at(int m, double frac_x1) const {
    int J = n1 / 2;
    cplx acc = spec[m][0];
    for (int j = 1; j < J; ++j)
      acc += 2.0 * spec[m][j] * std::exp(cplx(0.0, kTwoPi * j * frac_x1));
    acc += spec[m][J] * std::exp(cplx(0.0, kTwoPi * J * frac_x1));
    return std::real(acc) / n1;
  }
  double at(double frac_x1, double height) const {
    std::vector<double> col(x2.size());
    for (std::size_t m = 0; m < x2.size(); ++m) col[m] = row_at((int)m, frac_x1);
    return interp_cubic(x2, col, std::min(height, x2.back()));
  }
};

}  // namespace

Field ApproximationBundle::sample_unit_scalar(const SpectralSolution& sol,
                                              const StripGrid& eval) const {
  const StripGrid& cg = cell_->grid();
  Field src = sol.to_field();
  RealFourier ft(cg.n1);
  std::vector<std::vector<cplx>> spec(cg.n2());
  std::vector<double> row(cg.n1);
  for (int m = 0; m < cg.n2(); ++m) {
    for (int i = 0; i < cg.n1; ++i) row[i] = src.at(i, m);
    spec[m] = ft.forward(row);
  }
  Field out(eval);
  int J = cg.n1 / 2;
  std::vector<cplx> phases(J + 1);
  std::vector<double> col(cg.n2());
  for (int i = 0; i < eval.n1; ++i) {
    double z1 = eval.node_x1(i) / dom_.epsilon;
    z1 -= std::floor(z1);
    for (int j = 0; j <= J; ++j)
      phases[j] = std::exp(cplx(0.0, kTwoPi * j * z1));
    for (int m = 0; m < cg.n2(); ++m) {
      cplx acc = spec[m][0];
      for (int j = 1; j < J; ++j) acc += 2.0 * spec[m][j] * phases[j];
      acc += spec[m][J] * phases[J];
      col[m] = std::real(acc) / cg.n1;
    }
    for (int me = 0; me < eval.n2(); ++me) {
      double zt2 = eval.x2[me] / dom_.epsilon;
      out.at(i, me) = zt2 > cg.x2.back() ? 0.0 : interp_cubic(cg.x2, col, zt2);
    }
  }
  return out;
}

ApproximationBundle::FlowSample ApproximationBundle::flow_eval(
    const StripGrid& eval, double t, bool layer_only) const {
  FlowSample out;
  if (layer_only) {
    out.u = VectorField(eval);
  } else {
    out.u = base_velocity(eval, t);
    VectorField corr = interior_correction(eval, t);
    for (std::size_t q = 0; q < out.u.c1.v.size(); ++q) {
      out.u.c1.v[q] += corr.c1.v[q];
      out.u.c2.v[q] += corr.c2.v[q];
    }
  }

  RealFourier ft(eval.n1);
  auto st = fd_stencils(eval.x2);
  std::vector<double> slope(eval.n1);
  for (int i = 0; i < eval.n1; ++i)
    slope[i] = wall(dom_, DomainScale::physical, eval.node_x1(i)).dw;
  auto d1_of = [&](const Field& g, Field& outf) {
    std::vector<double> row(eval.n1);
    for (int m = 0; m < eval.n2(); ++m) {
      for (int i = 0; i < eval.n1; ++i) row[i] = g.at(i, m);
      auto d = ft.derivative(row, eval.period);
      for (int i = 0; i < eval.n1; ++i) outf.at(i, m) = d[i];
    }
  };
  auto d2_of = [&](const Field& g, Field& outf) {
    for (int i = 0; i < eval.n1; ++i)
      for (int m = 0; m < eval.n2(); ++m) {
        double acc = 0.0;
        for (int q = 0; q < 3; ++q) acc += st.d1[m][q] * g.at(i, st.idx[m][q]);
        outf.at(i, m) = acc;
      }
  };

  // Layer part: a v^1 = eps grad_x(a Psi1) - eps (d1 a) Psi1 e1, and the
  // order-3 analogue with the stream adding a perp-gradient; assembling the
  // gradients with the eval grid's own operators makes the discrete curl of
  // the large content vanish identically.
  auto a = trace_factor_a(t, eval.n1);
  auto da = [&] {
    RealFourier f2(eval.n1);
    return f2.derivative(a, eval.period);
  }();
  double ea = dom_.eps_alpha();
  double amp1 = std::pow(dom_.epsilon, 1.0) * ea;
  Field Psi1 = sample_unit_scalar(*psi1_u_, eval);
  Field P1(eval);
  for (int i = 0; i < eval.n1; ++i)
    for (int m = 0; m < eval.n2(); ++m)
      P1.at(i, m) = a[i] * Psi1.at(i, m);
  Field g1(eval), g2(eval);
  d1_of(P1, g1);
  d2_of(P1, g2);
  for (int i = 0; i < eval.n1; ++i)
    for (int m = 0; m < eval.n2(); ++m) {
      std::size_t q = eval.index(i, m);
      out.u.c1.v[q] += amp1 * (g1.v[q] - slope[i] * g2.v[q]) -
                       amp1 * da[i] * Psi1.v[q];
      out.u.c2.v[q] += amp1 * g2.v[q];
    }
  if (psi3_u_) {
    auto b = trace_factor_b(t, eval.n1);
    auto db = [&] {
      RealFourier f2(eval.n1);
      return f2.derivative(b, eval.period);
    }();
    double amp3 = dom_.epsilon * std::pow(ea, dom_.n0 + 1);
    Field Psi3 = sample_unit_scalar(*psi3_u_, eval);
    Field Phi3 = sample_unit_scalar(*phi3_u_, eval);
    Field P3(eval), Q3(eval);
    for (int i = 0; i < eval.n1; ++i)
      for (int m = 0; m < eval.n2(); ++m) {
        P3.at(i, m) = b[i] * Psi3.at(i, m);
        Q3.at(i, m) = b[i] * Phi3.at(i, m);
      }
    Field p1(eval), p2(eval), q1(eval), q2(eval);
    d1_of(P3, p1);
    d2_of(P3, p2);
    d1_of(Q3, q1);
    d2_of(Q3, q2);
    for (int i = 0; i < eval.n1; ++i)
      for (int m = 0; m < eval.n2(); ++m) {
        std::size_t q = eval.index(i, m);
        double gx1 = p1.v[q] - slope[i] * p2.v[q];
        double hx1 = q1.v[q] - slope[i] * q2.v[q];
        out.u.c1.v[q] += amp3 * (gx1 - db[i] * Psi3.v[q]) - amp3 * q2.v[q];
        out.u.c2.v[q] += amp3 * p2.v[q] + amp3 * (hx1 - db[i] * Phi3.v[q]);
      }
  }

  // Discrete curl of the assembled flow.
  out.omega = Field(eval);
  Field c1(eval), c2a(eval), c2b(eval);
  d1_of(out.u.c2, c1);
  d2_of(out.u.c2, c2a);
  d2_of(out.u.c1, c2b);
  for (int i = 0; i < eval.n1; ++i)
    for (int m = 0; m < eval.n2(); ++m) {
      std::size_t q = eval.index(i, m);
      out.omega.v[q] = c1.v[q] - slope[i] * c2a.v[q] - c2b.v[q];
    }
  return out;
}

double ApproximationBundle::divergence_defect_semi(double t) const {
  const StripGrid& cg = cell_->grid();
  RealFourier ft(cg.n1);
  auto st = fd_stencils(cg.x2);
  // Cell-grid residual of the order-1 potential equation (harmonicity) and
  // of the order-3 sources, which carry the telescoped cancellation.
  auto lap_cell = [&](const Field& f) {
    Field out(cg), t2(cg), t22(cg), t12(cg);
    std::vector<double> row(cg.n1);
    for (int m = 0; m < cg.n2(); ++m) {
      for (int i = 0; i < cg.n1; ++i) row[i] = f.at(i, m);
      auto dd = ft.derivative(row, 1.0, 2);
      for (int i = 0; i < cg.n1; ++i) out.at(i, m) = dd[i];
    }
    for (int i = 0; i < cg.n1; ++i)
      for (int m = 0; m < cg.n2(); ++m) {
        double a2 = 0.0, a22 = 0.0;
        for (int q = 0; q < 3; ++q) {
          a2 += st.d1[m][q] * f.at(i, st.idx[m][q]);
          a22 += st.d2[m][q] * f.at(i, st.idx[m][q]);
        }
        t2.at(i, m) = a2;
        t22.at(i, m) = a22;
      }
    Field t12b(cg);
    std::vector<double> row2(cg.n1);
    for (int m = 0; m < cg.n2(); ++m) {
      for (int i = 0; i < cg.n1; ++i) row2[i] = t2.at(i, m);
      auto dd = ft.derivative(row2, 1.0);
      for (int i = 0; i < cg.n1; ++i) t12b.at(i, m) = dd[i];
    }
    for (int i = 0; i < cg.n1; ++i) {
      auto wj = wall(dom_, DomainScale::cell, cg.node_x1(i));
      for (int m = 0; m < cg.n2(); ++m)
        out.at(i, m) += (1.0 + wj.dw * wj.dw) * t22.at(i, m) -
                        2.0 * wj.dw * t12b.at(i, m) - wj.d2w * t2.at(i, m);
    }
    return out;
  };
  Field psi1f = psi1_u_->to_field();
  Field res1 = lap_cell(psi1f);  // harmonic up to solver accuracy
  double amax = 0.0, bmax = 0.0, dbmax = 0.0;
  auto a = a_table_.eval(t);
  auto b = b_table_.eval(t);
  {
    RealFourier ftr(static_cast<int>(b.size()));
    auto db = ftr.derivative(b, 1.0);
    for (double v : a) amax = std::max(amax, std::abs(v));
    for (double v : b) bmax = std::max(bmax, std::abs(v));
    for (double v : db) dbmax = std::max(dbmax, std::abs(v));
  }
  double eps = dom_.epsilon;
  double ea = dom_.eps_alpha();
  double defect = std::pow(ea, 1) / eps * amax * res1.max_abs();
  if (psi3_u_) {
    Field res3 = lap_cell(psi3_u_->to_field());
    // Telescope: lap psi3 + (grad psi1)_1 cancels except for solver error.
    for (std::size_t q = 0; q < res3.v.size(); ++q)
      res3.v[q] += v1_unit_.c1.v[q];
    double amp3 = std::pow(ea, dom_.n0 + 1);
    defect += amp3 / eps * bmax * res3.max_abs();
    defect += amp3 * dbmax * v3_unit_.c1.max_abs();
  }
  return defect;
}

double ApproximationBundle::boundary_defect(double t, int n_samples) const {
  VectorField u0 = interp_state_velocity(base_, t);
  VectorField u3(base_[0].u.grid());
  if (!u3_.empty()) {
    std::vector<double> times;
    for (auto& s : u3_) times.push_back(s.t);
    auto b = blend_at(times, t);
    for (int a = 0; a < b.pts; ++a) {
      const auto& s = u3_[b.lo + a];
      for (std::size_t q = 0; q < u3.c1.v.size(); ++q) {
        u3.c1.v[q] += b.w[a] * s.u.c1.v[q];
        u3.c2.v[q] += b.w[a] * s.u.c2.v[q];
      }
    }
  }
  SpectralSampler s01(u0.c1), s02(u0.c2), s31(u3.c1), s32(u3.c2);
  // Wall rows of the unit layers.
  const StripGrid& cg = cell_->grid();
  Field w1(cg), w2(cg), w31(cg), w32(cg);
  for (int i = 0; i < cg.n1; ++i) {
    w1.at(i, 0) = v1_unit_.c1.at(i, 0);
    w2.at(i, 0) = v1_unit_.c2.at(i, 0);
    if (psi3_u_) {
      w31.at(i, 0) = v3_unit_.c1.at(i, 0);
      w32.at(i, 0) = v3_unit_.c2.at(i, 0);
    }
  }
  SpectralSampler l1(w1), l2(w2), l31(w31), l32(w32);
  auto a_row = a_table_.eval(t);
  auto b_row = b_table_.eval(t);
  Field atrace(StripGrid{(int)a_row.size(), 1.0, {0.0, 1.0}});
  // Reuse the sampler machinery for the traces (single row).
  StripGrid tg;
  tg.n1 = static_cast<int>(a_row.size());
  tg.period = 1.0;
  tg.x2 = {0.0};
  Field fa(tg), fb(tg);
  for (int i = 0; i < tg.n1; ++i) {
    fa.at(i, 0) = a_row[i];
    fb.at(i, 0) = b_row[i];
  }
  SpectralSampler sa(fa), sb(fb);

  double ea = dom_.eps_alpha();
  double amp3 = std::pow(ea, dom_.n0 + 1);
  double worst = 0.0;
  for (int q = 0; q < n_samples; ++q) {
    double x1 = double(q) / n_samples;
    double z1 = x1 / dom_.epsilon;
    z1 -= std::floor(z1);
    double w = wall(dom_, DomainScale::physical, x1).w;
    auto fr = frame(dom_, z1);
    double av = sa.row_at(0, x1), bv = sb.row_at(0, x1);
    double v1 = s01.at(x1, w) + amp3 * s31.at(x1, w) + ea * av * l1.row_at(0, z1);
    double v2 = s02.at(x1, w) + amp3 * s32.at(x1, w) + ea * av * l2.row_at(0, z1);
    if (psi3_u_) {
      v1 += amp3 * bv * l31.row_at(0, z1);
      v2 += amp3 * bv * l32.row_at(0, z1);
    }
    worst = std::max(worst, std::abs(v1 * fr.n[0] + v2 * fr.n[1]));
  }
  return worst;
}

double ApproximationBundle::divergence_defect(const StripGrid& eval,
                                              double t) const {
  VectorField u = velocity(eval, t);
  RealFourier ft(eval.n1);
  auto st = fd_stencils(eval.x2);
  std::vector<double> row(eval.n1);
  std::vector<std::vector<double>> d1rows(eval.n2());
  for (int m = 0; m < eval.n2(); ++m) {
    for (int i = 0; i < eval.n1; ++i) row[i] = u.c1.at(i, m);
    d1rows[m] = ft.derivative(row, eval.period);
  }
  double worst = 0.0;
  for (int i = 0; i < eval.n1; ++i) {
    double dw = wall(dom_, DomainScale::physical, eval.node_x1(i)).dw;
    for (int m = 1; m + 1 < eval.n2(); ++m) {
      double d2c1 = 0.0, d2c2 = 0.0;
      for (int q = 0; q < 3; ++q) {
        d2c1 += st.d1[m][q] * u.c1.at(i, st.idx[m][q]);
        d2c2 += st.d1[m][q] * u.c2.at(i, st.idx[m][q]);
      }
      worst = std::max(worst, std::abs(d1rows[m][i] - dw * d2c1 + d2c2));
    }
  }
  return worst;
}

std::pair<double, double> ApproximationBundle::layer_curl_structure(
    double t) const {
  auto a = a_table_.eval(t);
  auto b = b_table_.eval(t);
  double amax = 0.0, bmax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  for (double v : b) bmax = std::max(bmax, std::abs(v));
  double ea = dom_.eps_alpha();
  double amp1 = ea, amp3 = std::pow(ea, dom_.n0 + 1);
  // The order-1 layer is a discrete gradient, so its two-scale curl vanishes
  // identically; the order-3 stream part carries the leading curl.
  double curl_max = psi3_u_ ? amp3 * bmax * curl3_unit_.max_abs() : 0.0;
  double amp =
      amp1 * amax * std::max(v1_unit_.c1.max_abs(), v1_unit_.c2.max_abs());
  if (psi3_u_)
    amp += amp3 * bmax *
           std::max(v3_unit_.c1.max_abs(), v3_unit_.c2.max_abs());
  return {curl_max, amp};
}

std::shared_ptr<const LayerProfile> ApproximationBundle::layer_profile(
    int k, int x1_index, int t_index) const {
  if (k != 1 && k != dom_.n0 + 1)
    throw DependencyError("layer_profile: order vanishes or is not built");
  if (k == dom_.n0 + 1 && !psi3_u_)
    throw DependencyError("layer_profile: order n0+1 not built at this N");
  LayerCache::Key key{k, x1_index, t_index};
  if (auto hit = cache_.find(key)) return hit;
  const StripGrid& fg = base_[0].u.grid();
  double t = base_[t_index].t;
  double factor =
      k == 1 ? a_table_.eval(t)[x1_index] : b_table_.eval(t)[x1_index];
  const VectorField& unit = k == 1 ? v1_unit_ : v3_unit_;
  LayerProfile p;
  p.grid = cell_->grid();
  p.t = t;
  p.x1 = double(x1_index) / fg.n1;
  p.v = VectorField(cell_->grid());
  p.psi = (k == 1 ? *psi1_u_ : *psi3_u_).to_field();
  p.phi = k == 1 ? Field(cell_->grid()) : phi3_u_->to_field();
  p.psi *= factor;
  p.phi *= factor;
  for (std::size_t q = 0; q < p.v.c1.v.size(); ++q) {
    p.v.c1.v[q] = factor * unit.c1.v[q];
    p.v.c2.v[q] = factor * unit.c2.v[q];
  }
  p.gamma_meas = kTwoPi;
  return cache_.insert(key, std::move(p));
}

// ---------------------------------------------------------------------------
// Residual and amplitude report

ResidualReport residual_curl(const ApproximationBundle& bundle,
                             const ForcingSpec& f, const StripGrid& eval,
                             double t, double dt, double gamma) {
  const DomainParams& dom = bundle.domain();
  if (eval.x2[1] - eval.x2[0] > dom.epsilon / 4.0)
    throw ResolutionError(
        "residual_curl: boundary layer thinner than 4 wall cells");
  // Vorticity form of the pressure-free residual: the discrete curl kills
  // the discrete-gradient content of the momentum misfit identically, so
  // r = d_t omega + curl(omega u^perp) - curl f.
  auto fm = bundle.flow_eval(eval, t - dt);
  auto fc = bundle.flow_eval(eval, t);
  auto fp = bundle.flow_eval(eval, t + dt);

  RealFourier ft(eval.n1);
  auto st = fd_stencils(eval.x2);
  std::vector<double> slope(eval.n1);
  for (int i = 0; i < eval.n1; ++i)
    slope[i] = wall(dom, DomainScale::physical, eval.node_x1(i)).dw;
  Field W1(eval), W2(eval);
  for (std::size_t q = 0; q < W1.v.size(); ++q) {
    W1.v[q] = -fc.omega.v[q] * fc.u.c2.v[q];
    W2.v[q] = fc.omega.v[q] * fc.u.c1.v[q];
  }
  Field d1W2(eval), d2W2(eval), d2W1(eval);
  {
    std::vector<double> row(eval.n1);
    for (int m = 0; m < eval.n2(); ++m) {
      for (int i = 0; i < eval.n1; ++i) row[i] = W2.at(i, m);
      auto d = ft.derivative(row, eval.period);
      for (int i = 0; i < eval.n1; ++i) d1W2.at(i, m) = d[i];
    }
    for (int i = 0; i < eval.n1; ++i)
      for (int m = 0; m < eval.n2(); ++m) {
        double a2 = 0.0, a1 = 0.0;
        for (int q = 0; q < 3; ++q) {
          a2 += st.d1[m][q] * W2.at(i, st.idx[m][q]);
          a1 += st.d1[m][q] * W1.at(i, st.idx[m][q]);
        }
        d2W2.at(i, m) = a2;
        d2W1.at(i, m) = a1;
      }
  }
  Field r(eval);
  for (int i = 0; i < eval.n1; ++i) {
    double x1 = eval.node_x1(i);
    double w0 = wall(dom, DomainScale::physical, x1).w;
    for (int m = 0; m < eval.n2(); ++m) {
      std::size_t q = eval.index(i, m);
      double dwdt = (fp.omega.v[q] - fm.omega.v[q]) / (2 * dt);
      double adv = d1W2.v[q] - slope[i] * d2W2.v[q] - d2W1.v[q];
      r.v[q] = dwdt + adv - f.curl(t, x1, eval.x2[m] + w0);
    }
  }
  // One-sided double-differencing pollutes the outermost rows; drop them.
  for (int i = 0; i < eval.n1; ++i) {
    r.at(i, 0) = r.at(i, 1);
    r.at(i, eval.n2() - 1) = 0.0;
    r.at(i, eval.n2() - 2) = 0.0;
  }

  ResidualReport rep;
  rep.gamma = gamma;
  rep.linf = r.max_abs();
  rep.l2 = l2_norm(r);
  auto w2 = eval.x2_weights();
  double floor = 1e-14 * rep.linf;
  double acc = 0.0;
  for (int i = 0; i < eval.n1; ++i) {
    double w = wall(dom, DomainScale::physical, eval.node_x1(i)).w;
    for (int m = 0; m < eval.n2(); ++m) {
      double v = r.at(i, m);
      if (std::abs(v) <= floor) continue;
      double arg = gamma * (eval.x2[m] + w) / dom.epsilon;
      if (arg > 600.0) continue;  // beyond the layer support, exact zeros
      double wt = std::exp(arg);
      rep.weighted_linf = std::max(rep.weighted_linf, wt * std::abs(v));
      acc += wt * wt * v * v * w2[m];
    }
  }
  rep.weighted_l2 = std::sqrt(acc * eval.dx1());
  return rep;
}

AmplitudeReport verify_amplitude_bounds(
    const std::vector<const ApproximationBundle*>& bundles,
    const ForcingSpec& f, double slope_tol) {
  if (bundles.size() < 3)
    throw InputError("verify_amplitude_bounds: at least 3 sweep points");
  AmplitudeReport rep;
  constexpr int kFam = 9;
  std::vector<std::vector<double>> vals(kFam);
  double alpha = bundles[0]->domain().alpha();
  int N = bundles[0]->order();

  for (auto* bp : bundles) {
    const auto& b = *bp;
    const DomainParams& dom = b.domain();
    rep.epsilons.push_back(dom.epsilon);
    StripGrid eval = default_eval_grid(dom, 6.0);
    StripGrid eval_fine = default_eval_grid(dom, 6.0, 8, 32);
    double T0 = b.horizon();
    std::array<double, kFam> sup{};
    for (double frac : {0.4, 0.7, 1.0}) {
      double t = std::min(frac * T0, T0 - 2e-3);
      VectorField lay = b.layer_velocity(eval, t);
      VectorField in = b.interior_correction(eval, t);
      Field lay_mag(eval), in_mag(eval);
      for (std::size_t q = 0; q < lay_mag.v.size(); ++q) {
        lay_mag.v[q] = std::hypot(lay.c1.v[q], lay.c2.v[q]);
        in_mag.v[q] = std::hypot(in.c1.v[q], in.c2.v[q]);
      }
      sup[0] = std::max(sup[0], lay_mag.max_abs());
      sup[1] = std::max(sup[1], l2_norm(lay_mag));
      sup[2] = std::max(sup[2], in_mag.max_abs());
      sup[3] = std::max(sup[3], l2_norm(in_mag));
      auto rr = residual_curl(b, f, eval_fine, t);
      sup[4] = std::max(sup[4], rr.linf);
      sup[5] = std::max(sup[5], rr.l2);
      {
        auto lf = b.flow_eval(eval_fine, t, /*layer_only=*/true);
        for (int i = 0; i < eval_fine.n1; ++i) {
          lf.omega.at(i, 0) = 0.0;
          lf.omega.at(i, eval_fine.n2() - 1) = 0.0;
        }
        sup[6] = std::max(sup[6], lf.omega.max_abs());
      }
      sup[7] = std::max(sup[7], b.boundary_defect(t, 8 * dom.inv_epsilon()));
      sup[8] = std::max(sup[8], b.divergence_defect_semi(t));
    }
    for (int q = 0; q < kFam; ++q) vals[q].push_back(sup[q]);
  }

  struct Def {
    const char* name;
    double pred;
    bool one_sided;
  };
  double aN1 = alpha * (N + 1);
  std::vector<Def> defs = {
      {"uapp_bl_linf", alpha, false},
      {"uapp_bl_l2", alpha + 0.5, false},
      {"uapp_in_linf", alpha + 1.0, false},
      {"uapp_in_l2", alpha + 1.0, false},
      {"resid_curl_linf", alpha, false},
      {"resid_curl_l2", alpha + 0.5, false},
      {"curl_bl_linf", aN1 - 1.0, true},
      {"boundary_defect", aN1, true},
      {"divergence_defect", aN1 - 1.0, true},
  };
  for (int q = 0; q < kFam; ++q) {
    BoundFamily fam;
    fam.name = defs[q].name;
    fam.predicted = defs[q].pred;
    fam.one_sided = defs[q].one_sided;
    fam.values = vals[q];
    bool all_zero = true;
    for (double v : vals[q]) all_zero &= v < 1e-14;
    if (all_zero) {
      fam.degenerate = true;
      fam.pass = true;
    } else {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t e = 0; e < rep.epsilons.size(); ++e)
        pts.push_back({rep.epsilons[e], vals[q][e]});
      auto fit = rate_fit(pts);
      fam.slope = fit.slope;
      fam.r2 = fit.r2;
      fam.pass = fam.one_sided
                     ? fit.slope >= fam.predicted - slope_tol
                     : std::abs(fit.slope - fam.predicted) <= slope_tol;
    }
    rep.families.push_back(std::move(fam));
  }
  return rep;
}

}  // namespace roughflow
