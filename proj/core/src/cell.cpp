#include "roughflow/cell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"

namespace roughflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
}  // namespace

int boundary_operator_arity(int k, int n0) {
  int need = 0;
  if ((k - 1) % (n0 + 1) == 0) need = std::max(need, (k - 1) / (n0 + 1));
  if (k % (n0 + 1) == 0 && k >= n0 + 1) need = std::max(need, k / (n0 + 1));
  return need;
}

double boundary_operator_B(int k, const WallJets& jets, const DomainParams& dom,
                           double z1) {
  if (k < 1) throw InputError("boundary_operator_B: k >= 1 required");
  int n0 = dom.n0;
  int need = boundary_operator_arity(k, n0);
  if (jets.order() < need)
    throw DependencyError("boundary_operator_B: wall jets up to order " +
                          std::to_string(need) + " required for k = " +
                          std::to_string(k));
  auto pj = dom.profile.eval(z1);
  double g = dom.eps_alpha() * pj.deta;
  double bracket = std::sqrt(1.0 + g * g);
  double acc = 0.0;
  // u2 branch: k = m (n0 + 1), m >= 1 contributes eta^m / m! d2^m u2.
  if (k % (n0 + 1) == 0 && k >= n0 + 1) {
    int m = k / (n0 + 1);
    acc += std::pow(pj.eta, m) / factorial(m) * jets.d[m][1];
  }
  // u1 branch: k = 1 + m (n0 + 1), m >= 0 contributes -eta' eta^m / m! d2^m u1.
  if ((k - 1) % (n0 + 1) == 0) {
    int m = (k - 1) / (n0 + 1);
    acc -= pj.deta * std::pow(pj.eta, m) / factorial(m) * jets.d[m][0];
  }
  return acc / bracket;
}

CellSolver::CellSolver(DomainParams dom, StripGrid grid)
    : dom_(std::move(dom)), grid_(std::move(grid)),
      neumann_op_(grid_, dom_, DomainScale::cell,
                  {0.0, 1.0, StripElliptic::Wall::conormal_flux,
                   StripElliptic::Top::dtn_mean_zero}),
      dirichlet_op_(grid_, dom_, DomainScale::cell,
                    {0.0, 1.0, StripElliptic::Wall::dirichlet,
                     StripElliptic::Top::dtn_flux_zero}) {
  if (grid_.period != 1.0)
    throw InputError("CellSolver: cell grid period must be 1");
}

void CellSolver::check_source_decay(const Field& S) const {
  double head = 0.0, tail = 0.0;
  int n2 = grid_.n2();
  double z_hi = grid_.x2.back();
  for (int i = 0; i < grid_.n1; ++i)
    for (int m = 0; m < n2; ++m) {
      double a = std::abs(S.at(i, m));
      if (grid_.x2[m] > 0.75 * z_hi)
        tail = std::max(tail, a);
      else
        head = std::max(head, a);
    }
  if (tail > 1e-8 * (1.0 + head))
    throw DecayError("cell source fails its exponential-decay certificate");
}

SpectralSolution CellSolver::solve_neumann_cell(
    const CellProblemData& data) const {
  const Field* S = data.source ? &*data.source : nullptr;
  if (S) check_source_decay(*S);
  if (static_cast<int>(data.neumann_data.size()) != grid_.n1)
    throw InputError("solve_neumann_cell: wall datum size mismatch");
  // Flux balance: int_cell S = -int_wall g dsigma (inward normal).
  double vol = S ? integrate(*S) : 0.0;
  double bdry = boundary_integral(data.neumann_data);
  double scale = 1.0;
  if (S)
    for (double v : S->v) scale = std::max(scale, std::abs(v));
  for (double v : data.neumann_data) scale = std::max(scale, std::abs(v));
  double mismatch = vol + bdry;
  if (std::abs(mismatch) > compatibility_tolerance() * scale)
    throw CompatibilityError(
        "solve_neumann_cell: source/boundary data violate the flux balance",
        mismatch);
  return neumann_op_.solve(S, &data.neumann_data, nullptr);
}

SpectralSolution CellSolver::solve_dirichlet_cell(
    const CellProblemData& data) const {
  const Field* S = data.source ? &*data.source : nullptr;
  if (S) check_source_decay(*S);
  return dirichlet_op_.solve(S, nullptr, nullptr);
}

LayerProfile CellSolver::assemble_layer(const SpectralSolution& psi,
                                        const SpectralSolution& phi, double t,
                                        double x1) const {
  if (!psi.grid().same_shape(grid_) || !phi.grid().same_shape(grid_))
    throw InputError("assemble_layer: grid mismatch");
  LayerProfile out;
  out.grid = grid_;
  out.t = t;
  out.x1 = x1;
  out.psi = psi.to_field();
  out.phi = phi.to_field();
  Field psi_t1 = psi.d_t1(), psi_t2 = psi.d_t2();
  Field phi_t1 = phi.d_t1(), phi_t2 = phi.d_t2();
  out.v = VectorField(grid_);
  for (int i = 0; i < grid_.n1; ++i) {
    double dw = wall(dom_, DomainScale::cell, grid_.node_x1(i)).dw;
    for (int m = 0; m < grid_.n2(); ++m) {
      double psi_z1 = psi_t1.at(i, m) - dw * psi_t2.at(i, m);
      double psi_z2 = psi_t2.at(i, m);
      double phi_z1 = phi_t1.at(i, m) - dw * phi_t2.at(i, m);
      double phi_z2 = phi_t2.at(i, m);
      out.v.c1.at(i, m) = psi_z1 - phi_z2;
      out.v.c2.at(i, m) = psi_z2 + phi_z1;
    }
  }
  out.far_field_const = std::real(phi.mode(0, grid_.n2() - 1)) / grid_.n1;
  // Decay certificate: slowest fitted rate among modes that carry signal.
  double rate = 1e300;
  bool any = false;
  double z_lo = dom_.eps_alpha() * dom_.profile.max_value() + 0.25;
  double z_hi = std::min(z_lo + 2.0, grid_.x2.back() - 0.5);
  for (int j = 1; j <= std::min(4, psi.mode_max()); ++j) {
    for (const SpectralSolution* s : {&psi, &phi}) {
      auto col = s->mode_abs(j);
      double peak = *std::max_element(col.begin(), col.end());
      if (peak < 1e-13) continue;
      auto fit = fit_mode_decay(*s, j, z_lo, z_hi);
      if (fit.points >= 4) {
        rate = std::min(rate, fit.rate);
        any = true;
      }
    }
  }
  out.gamma_meas = any ? rate : kTwoPi;
  return out;
}

LayerProfile CellSolver::assemble_layer(const SpectralSolution& psi, double t,
                                        double x1) const {
  SpectralSolution zero(grid_, psi.mode_max());
  return assemble_layer(psi, zero, t, x1);
}

namespace {
DecayFit log_linear_fit(const std::vector<double>& z,
                        const std::vector<double>& a, double floor) {
  DecayFit out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(a[i] > floor)) continue;
    double y = std::log(a[i]);
    sx += z[i];
    sy += y;
    sxx += z[i] * z[i];
    sxy += z[i] * y;
    syy += y * y;
    ++n;
  }
  out.points = n;
  if (n < 2) return out;
  double det = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / det;
  out.rate = -slope;
  double icpt = (sy - slope * sx) / n;
  double ss_tot = syy - sy * sy / n, ss_res = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(a[i] > floor)) continue;
    double r = std::log(a[i]) - (icpt + slope * z[i]);
    ss_res += r * r;
  }
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}
}  // namespace

std::vector<double> CellSolver::line_mode_amplitudes(
    const SpectralSolution& sol, int j, const std::vector<double>& z2) const {
  int n1 = grid_.n1;
  RealFourier ft(n1);
  std::vector<double> wall_h(n1);
  for (int i = 0; i < n1; ++i)
    wall_h[i] = wall(dom_, DomainScale::cell, grid_.node_x1(i)).w;
  Field f = sol.to_field();
  std::vector<double> line(n1), out(z2.size(), -1.0);
  for (std::size_t l = 0; l < z2.size(); ++l) {
    bool ok = true;
    for (int i = 0; i < n1; ++i) {
      double zt2 = z2[l] - wall_h[i];
      if (zt2 < 0.0 || zt2 > grid_.x2.back()) {
        ok = false;
        break;
      }
      line[i] = interp_cubic_strided(grid_.x2, f.v.data() + grid_.index(i, 0),
                                     1, zt2);
    }
    if (!ok) continue;
    auto spec = ft.forward(line);
    out[l] = std::abs(spec[j]) / n1;
  }
  return out;
}

DecayFit CellSolver::fit_mode_decay(const SpectralSolution& sol, int j,
                                    double z_lo, double z_hi,
                                    double floor_rel) const {
  int nlines = 33;
  std::vector<double> zs(nlines);
  for (int l = 0; l < nlines; ++l)
    zs[l] = z_lo + (z_hi - z_lo) * l / (nlines - 1);
  auto amps = line_mode_amplitudes(sol, j, zs);
  double amp_max = 0.0;
  for (double a : amps) amp_max = std::max(amp_max, a);
  double field_max = sol.to_field().max_abs();
  // Points below round-off of the overall solve carry no decay information.
  double floor = std::max({amp_max * floor_rel, 1e-13 * field_max, 1e-280});
  std::vector<double> z_ok, a_ok;
  for (int l = 0; l < nlines; ++l)
    if (amps[l] >= 0.0) {
      z_ok.push_back(zs[l]);
      a_ok.push_back(amps[l]);
    }
  return log_linear_fit(z_ok, a_ok, floor);
}

DecayFit fit_decay_from_lines(const std::vector<double>& z2,
                              const std::vector<double>& amp,
                              const std::vector<double>& amp_check,
                              double guard_rel, double abs_floor) {
  std::vector<double> z_ok, a_ok;
  for (std::size_t i = 0; i < z2.size(); ++i) {
    if (amp[i] < 0.0 || amp_check[i] < 0.0) continue;
    if (std::abs(amp[i] - amp_check[i]) > guard_rel * std::abs(amp[i])) continue;
    z_ok.push_back(z2[i]);
    a_ok.push_back(amp[i]);
  }
  return log_linear_fit(z_ok, a_ok, abs_floor);
}

double CellSolver::boundary_integral(const std::vector<double>& g) const {
  double s = 0.0;
  for (int i = 0; i < grid_.n1; ++i) {
    double br = frame(dom_, grid_.node_x1(i)).bracket;
    s += g[i] * br;
  }
  return s * grid_.dx1();
}

std::vector<double> compatibility_source_h(
    int k, const std::vector<LayerProfile>& prior_family,
    const std::vector<std::vector<double>>& B_sum, const DomainParams& dom,
    double tol) {
  int nx = static_cast<int>(B_sum.size());
  if (nx == 0) throw InputError("compatibility_source_h: no slow samples");
  std::vector<double> h(nx, 0.0);

  // Volume term: -int_cell d_x1 v1^{k-n0}. The slow derivative is spectral
  // over the x1 sample family.
  if (!prior_family.empty()) {
    if (static_cast<int>(prior_family.size()) != nx)
      throw DependencyError(
          "compatibility_source_h: prior layer family must be sampled on the "
          "same slow grid");
    std::vector<double> vol(nx);
    for (int i = 0; i < nx; ++i) vol[i] = integrate(prior_family[i].v.c1);
    RealFourier ft(nx);
    auto dvol = ft.derivative(vol, 1.0);
    for (int i = 0; i < nx; ++i) h[i] -= dvol[i];
  }

  // Boundary term: -int_wall sum_j B_{k-j}[u^j] dsigma per slow sample.
  for (int i = 0; i < nx; ++i) {
    const auto& b = B_sum[i];
    int n1 = static_cast<int>(b.size());
    double s = 0.0;
    for (int q = 0; q < n1; ++q)
      s += b[q] * frame(dom, double(q) / n1).bracket;
    h[i] -= s / n1;
  }

  // The construction makes h^k mean-free; a violation is a bug.
  double mean = 0.0, scale = 1e-300;
  for (double v : h) {
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= nx;
  if (std::abs(mean) > tol * std::max(1.0, scale))
    throw InternalConsistencyError(
        "compatibility_source_h: h^" + std::to_string(k) +
            " failed its zero-mean identity",
        mean);
  return h;
}

std::shared_ptr<const LayerProfile> LayerCache::find(const Key& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : it->second;
}

std::shared_ptr<const LayerProfile> LayerCache::insert(const Key& key,
                                                       LayerProfile profile) {
  auto sp = std::make_shared<const LayerProfile>(std::move(profile));
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = map_.emplace(key, sp);
  return it->second;
}

std::size_t LayerCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return map_.size();
}

}  // namespace roughflow
