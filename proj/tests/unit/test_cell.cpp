#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughflow/cell.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/fourier.hpp"
#include "roughflow/halfplane.hpp"

using namespace roughflow;
namespace {
constexpr double kPi = std::numbers::pi;

RoughProfile default_profile() { return RoughProfile(2.0, {{1, {0.5, 0.0}}}); }

StripGrid cell_grid(int n1, double h, double zswitch, double zmax) {
  StripGrid g;
  g.n1 = n1;
  g.period = 1.0;
  g.x2 = stretched_nodes(h, zswitch, zmax);
  return g;
}

StripGrid flat_fine_grid(int n1, int n2, double zmax) {
  StripGrid g;
  g.n1 = n1;
  g.period = 1.0;
  g.x2 = uniform_nodes(zmax, n2);
  return g;
}
}  // namespace

TEST_CASE("boundary operator: flat wall kills B1; mid orders vanish") {
  DomainParams flat(0.25, 2, RoughProfile::flat(1.5));
  WallJets jets;
  jets.d = {{2.0, 0.0}, {0.3, -0.1}};
  CHECK(boundary_operator_B(1, jets, flat, 0.2) == 0.0);
  DomainParams rough(0.25, 2, default_profile());
  // B_k = 0 for 1 < k <= n0 regardless of the data.
  CHECK(boundary_operator_B(2, jets, rough, 0.37) == 0.0);
}

TEST_CASE("boundary operator: frozen B1 value") {
  // eps = 1/2, alpha = 1 (n0 = 1), eta'(0) = 2 so eps^alpha eta' = 1;
  // u1(.,0) = 1 gives B1 = -eta' u1 / bracket = -2/sqrt(2) = -sqrt(2).
  DomainParams d(0.5, 1, RoughProfile(2.0, {{1, {0.0, -1.0 / (2 * kPi)}}}));
  CHECK(d.profile.eval(0.0).deta == doctest::Approx(2.0));
  WallJets jets;
  jets.d = {{1.0, 0.0}};
  CHECK(boundary_operator_B(1, jets, d, 0.0) ==
        doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("boundary operators resum the exact wall-trace expansion") {
  // For u1 = a0 + a1 x2, u2 = b1 x2 the trace expansion terminates:
  //   u . n = [-eps^a a0 eta' + eps^{a(n0+1)} b1 eta
  //            - eps^{a(n0+2)} a1 eta eta'] / bracket.
  DomainParams d(1.0 / 16, 2, default_profile());
  double a0 = 0.7, a1 = -1.3, b1 = 0.45;
  WallJets jets;
  jets.d = {{a0, 0.0}, {a1, b1}};
  double ea = d.eps_alpha();
  for (double z1 : {0.0, 0.21, 0.68}) {
    auto pj = d.profile.eval(z1);
    double weff = d.epsilon * ea * pj.eta;  // wall height in physical units
    double u1w = a0 + a1 * weff, u2w = b1 * weff;
    double g = ea * pj.deta;
    double br = std::sqrt(1 + g * g);
    double exact = (u2w - g * u1w) / br;
    double series = 0.0;
    for (int k = 1; k <= 4; ++k)
      series += std::pow(ea, k) * boundary_operator_B(k, jets, d, z1);
    CHECK(series == doctest::Approx(exact).epsilon(1e-13));
  }
  // Requesting k = 7 = 1 + 2(n0+1) needs second-order jets.
  CHECK(boundary_operator_arity(7, 2) == 2);
  CHECK_THROWS_AS(boundary_operator_B(7, jets, d, 0.1), DependencyError);
}

TEST_CASE("h^1 vanishes identically for arbitrary traces and profiles") {
  for (auto prof : {default_profile(), RoughProfile(1.5, {{1, {0.2, 0.1}}, {2, {-0.05, 0.02}}})}) {
    DomainParams d(1.0 / 8, 2, prof);
    int nx = 16, nz = 64;
    std::vector<std::vector<double>> B(nx, std::vector<double>(nz));
    for (int i = 0; i < nx; ++i) {
      double u1 = 0.3 + std::sin(2 * kPi * i / nx);  // arbitrary trace
      WallJets jets;
      jets.d = {{u1, 0.0}};
      for (int q = 0; q < nz; ++q)
        B[i][q] = boundary_operator_B(1, jets, d, double(q) / nz);
    }
    auto h = compatibility_source_h(1, {}, B, d);
    for (double v : h) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("h with zero layers and zero B data vanishes") {
  DomainParams d(0.25, 2, default_profile());
  std::vector<std::vector<double>> B(8, std::vector<double>(32, 0.0));
  auto h = compatibility_source_h(2, {}, B, d);
  for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("boundary term of h matches a dense quadrature oracle") {
  // Synthetic B1 data: u1(.,0) = cos(2 pi x1), eta' = cos(2 pi z1) means
  // eta = 2 + sin(2 pi z1)/(2 pi).
  RoughProfile prof(2.0, {{1, {0.0, -1.0 / (4 * kPi)}}});
  DomainParams d(0.25, 2, prof);
  int nx = 24, nz = 48;
  std::vector<std::vector<double>> B(nx, std::vector<double>(nz));
  for (int i = 0; i < nx; ++i) {
    WallJets jets;
    jets.d = {{std::cos(2 * kPi * i / nx), 0.0}};
    for (int q = 0; q < nz; ++q)
      B[i][q] = boundary_operator_B(1, jets, d, double(q) / nz);
  }
  // h pipeline relies on exactness of the zero-mean property; the dense
  // oracle integrates the analytic integrand with Simpson at 8x resolution.
  auto h = compatibility_source_h(1, {}, B, d);
  double ea = d.eps_alpha();
  for (int i = 0; i < nx; ++i) {
    double u1 = std::cos(2 * kPi * i / nx);
    int m = 8 * nz;
    double acc = 0.0;
    for (int q = 0; q <= m; ++q) {
      double z1 = double(q) / m;
      double deta = std::cos(2 * kPi * z1);
      double w = (q == 0 || q == m) ? 1.0 : (q % 2 ? 4.0 : 2.0);
      acc += w * deta * u1;  // B1 * bracket = -eta' u1; h = -integral
    }
    double oracle = acc / (3.0 * m) * (ea / ea);  // bracket cancels exactly
    CHECK(h[i] == doctest::Approx(oracle).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("neumann cell: zero data gives the zero solution") {
  DomainParams d(0.25, 2, default_profile());
  CellSolver solver(d, cell_grid(16, 0.05, 3.0, 8.0));
  CellProblemData data;
  data.neumann_data.assign(16, 0.0);
  auto psi = solver.solve_neumann_cell(data);
  CHECK(psi.to_field().max_abs() < 1e-13);
}

TEST_CASE("neumann cell: incompatible data is rejected with the mismatch") {
  DomainParams d(0.25, 2, default_profile());
  CellSolver solver(d, cell_grid(16, 0.05, 3.0, 8.0));
  CellProblemData data;
  data.neumann_data.assign(16, 0.1);  // constant flux cannot balance S = 0
  try {
    solver.solve_neumann_cell(data);
    CHECK(false);
  } catch (const CompatibilityError& e) {
    CHECK(std::abs(e.mismatch) > 0.1);  // 0.1 * arclength > 0.1
  }
}

TEST_CASE("flat geometry: neumann solver matches the half-plane oracle") {
  DomainParams d(0.25, 2, RoughProfile::flat(1.0));
  CellSolver solver(d, flat_fine_grid(8, 60001, 8.0));
  CHECK(solver.grid().n1 == 8);
  int n1 = 8;
  double A = 1.7;
  std::vector<double> g(n1);
  for (int i = 0; i < n1; ++i) g[i] = A * std::cos(2 * kPi * i / n1);
  CellProblemData data;
  data.neumann_data = g;
  auto psi = solver.solve_neumann_cell(data);
  auto oracle = neumann_flat_mode(2 * kPi, 1.0, ModeFunction::zero(2 * kPi));
  // Mode 1 of the data has true coefficient A/2.
  double num = 0.0, den = 0.0;
  for (int m = 0; m < solver.grid().n2(); m += 100) {
    double z = solver.grid().x2[m];
    std::complex<double> have = psi.mode(1, m) / double(n1);
    double want = 0.5 * A * oracle(z);
    num += std::norm(have - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) < 2e-6);
}

TEST_CASE("flat geometry: dirichlet solver matches the poisson oracle") {
  DomainParams d(0.25, 2, RoughProfile::flat(1.0));
  StripGrid g = flat_fine_grid(8, 40001, 8.0);
  CellSolver solver(d, g);
  Field S(g);
  for (int i = 0; i < g.n1; ++i)
    for (int m = 0; m < g.n2(); ++m)
      S.at(i, m) = std::cos(2 * kPi * g.node_x1(i)) * std::exp(-3.0 * g.x2[m]);
  CellProblemData data;
  data.source = S;
  auto phi = solver.solve_dirichlet_cell(data);
  ModeFunction F{2 * kPi, [](double y) { return std::exp(-3.0 * y); }};
  auto oracle = poisson_dirichlet_mode(2 * kPi, F);
  double num = 0.0, den = 0.0;
  for (int m = 0; m < g.n2(); m += 400) {
    double z = g.x2[m];
    std::complex<double> have = phi.mode(1, m) / double(g.n1);
    double want = 0.5 * oracle(z);
    num += std::norm(have - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) < 1e-7);
}

TEST_CASE("dirichlet cell: far-field constant matches the moment formula") {
  // Zero-mode source S = e^{-z}: Q0 = -int_0^inf y S(y) dy = -1.
  DomainParams d(0.25, 2, RoughProfile::flat(1.0));
  StripGrid g = flat_fine_grid(8, 60001, 40.0);
  CellSolver solver(d, g);
  Field S(g);
  for (int i = 0; i < g.n1; ++i)
    for (int m = 0; m < g.n2(); ++m) S.at(i, m) = std::exp(-g.x2[m]);
  CellProblemData data;
  data.source = S;
  auto phi = solver.solve_dirichlet_cell(data);
  double q0 = std::real(phi.mode(0, g.n2() - 1)) / g.n1;
  CHECK(q0 == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("rough neumann layer: decay structure and boundary residual") {
  // Geometry of the default study at eps = 1/16 (wall max = 0.75 < 1).
  DomainParams d(1.0 / 16, 2, default_profile());
  StripGrid g = cell_grid(32, 0.02, 4.0, 8.0);
  CellSolver solver(d, g);
  std::vector<double> wall_g(g.n1);
  WallJets jets;
  jets.d = {{1.0, 0.0}};  // u1(., 0) = 1
  for (int i = 0; i < g.n1; ++i)
    wall_g[i] = -boundary_operator_B(1, jets, d, g.node_x1(i));
  CellProblemData data;
  data.neumann_data = wall_g;
  auto psi = solver.solve_neumann_cell(data);

  auto fit1 = solver.fit_mode_decay(psi, 1, 1.0, 3.0);
  CHECK(fit1.points >= 8);
  CHECK(std::abs(fit1.rate - 2 * kPi) / (2 * kPi) < 0.05);
  // Mode 2 dives under the scheme's own h^2 pollution partway up the window;
  // a finer-grid pair certifies which samples carry real signal.
  StripGrid gf = cell_grid(32, 0.005, 4.0, 8.0);
  CellSolver fine(d, gf);
  auto psi_f = fine.solve_neumann_cell(data);
  StripGrid gm = cell_grid(32, 0.01, 4.0, 8.0);
  CellSolver mid(d, gm);
  auto psi_m = mid.solve_neumann_cell(data);
  std::vector<double> zs(33);
  for (int l = 0; l < 33; ++l) zs[l] = 1.0 + 2.0 * l / 32;
  auto a_f = fine.line_mode_amplitudes(psi_f, 2, zs);
  auto a_m = mid.line_mode_amplitudes(psi_m, 2, zs);
  auto fit2 = fit_decay_from_lines(zs, a_f, a_m);
  CHECK(fit2.points >= 4);
  CHECK(std::abs(fit2.rate - 4 * kPi) / (4 * kPi) < 0.05);

  // Assemble and check the wall flux against the datum.
  auto layer = solver.assemble_layer(psi, 0.0, 0.0);
  CHECK(layer.gamma_meas > 0.9 * 2 * kPi);
  double worst = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    auto fr = frame(d, g.node_x1(i));
    double vn = layer.v.c1.at(i, 0) * fr.n[0] + layer.v.c2.at(i, 0) * fr.n[1];
    worst = std::max(worst, std::abs(vn - wall_g[i]));
  }
  CHECK(worst < 5e-3);  // one-sided 2nd-order wall derivative at h = 0.02

  // Weighted tail norms are finite and truncation-stable.
  StripGrid g2 = cell_grid(32, 0.02, 4.0, 16.0);
  CellSolver solver2(d, g2);
  CellProblemData data2;
  data2.neumann_data = wall_g;
  auto psi2 = solver2.solve_neumann_cell(data2);
  double gamma = 0.9 * 2 * kPi;
  auto weighted = [&](const SpectralSolution& s, const StripGrid& gr) {
    Field f = s.d_t2();
    double floor = 1e-13 * f.max_abs();  // below this the samples are exact zeros
    double acc = 0.0;
    auto w = gr.x2_weights();
    for (int i = 0; i < gr.n1; ++i)
      for (int m = 0; m < gr.n2(); ++m) {
        double v = f.at(i, m);
        if (std::abs(v) <= floor) continue;
        acc += std::exp(2 * gamma * gr.x2[m]) * v * v * w[m];
      }
    return std::sqrt(acc * gr.dx1());
  };
  double w1 = weighted(psi, g), w2 = weighted(psi2, g2);
  CHECK(std::isfinite(w1));
  CHECK(std::abs(w2 - w1) < 1e-6 * (1 + w1));
}

TEST_CASE("assemble_layer: zero inputs, curl-free gradients, grid mismatch") {
  DomainParams d(0.25, 2, default_profile());
  StripGrid g = cell_grid(24, 0.04, 3.0, 8.0);
  CellSolver solver(d, g);
  SpectralSolution zpsi(g, g.n1 / 2 - 1), zphi(g, g.n1 / 2 - 1);
  auto layer = solver.assemble_layer(zpsi, zphi, 0.0, 0.0);
  CHECK(layer.v.c1.max_abs() == 0.0);
  CHECK(layer.v.c2.max_abs() == 0.0);

  // phi = 0: v = grad psi is discretely curl-free in flattened coordinates.
  std::vector<double> wall_g(g.n1);
  WallJets jets;
  jets.d = {{0.8, 0.0}};
  for (int i = 0; i < g.n1; ++i)
    wall_g[i] = -boundary_operator_B(1, jets, d, g.node_x1(i));
  CellProblemData data;
  data.neumann_data = wall_g;
  auto psi = solver.solve_neumann_cell(data);
  auto layer1 = solver.assemble_layer(psi, 0.0, 0.0);
  // curl in flattened coordinates: (d_t1 - W' d_t2) v2 - d_t2 v1.
  RealFourier ft(g.n1);
  auto st = fd_stencils(g.x2);
  double worst = 0.0, scale = 0.0;
  std::vector<double> row(g.n1);
  for (int m = 2; m < g.n2() - 2; ++m) {
    for (int i = 0; i < g.n1; ++i) row[i] = layer1.v.c2.at(i, m);
    auto dv2_t1 = ft.derivative(row, 1.0);
    for (int i = 0; i < g.n1; ++i) {
      double dw = wall(d, DomainScale::cell, g.node_x1(i)).dw;
      double dv2_t2 = 0.0, dv1_t2 = 0.0;
      for (int t = 0; t < 3; ++t) {
        dv2_t2 += st.d1[m][t] * layer1.v.c2.at(i, st.idx[m][t]);
        dv1_t2 += st.d1[m][t] * layer1.v.c1.at(i, st.idx[m][t]);
      }
      double curl = (dv2_t1[i] - dw * dv2_t2) - dv1_t2;
      worst = std::max(worst, std::abs(curl));
      scale = std::max(scale, std::abs(layer1.v.c1.at(i, m)) + std::abs(layer1.v.c2.at(i, m)));
    }
  }
  CHECK(worst < 2e-2 * scale);  // second-order mixed-derivative commutator

  StripGrid other = cell_grid(16, 0.05, 3.0, 8.0);
  SpectralSolution wrong(other, other.n1 / 2 - 1);
  CHECK_THROWS_AS(solver.assemble_layer(wrong, zphi, 0.0, 0.0), InputError);
}

TEST_CASE("coupled path agrees with the banded flat path") {
  // A profile with a vanishingly small oscillation exercises the coupled
  // assembly on an essentially flat wall.
  DomainParams flat(0.25, 2, RoughProfile::flat(1.0));
  DomainParams tiny(0.25, 2, RoughProfile(1.0, {{1, {1e-13, 0.0}}}));
  StripGrid g = cell_grid(16, 0.05, 3.0, 8.0);
  CellSolver s_flat(flat, g), s_tiny(tiny, g);
  std::vector<double> wall_g(g.n1);
  for (int i = 0; i < g.n1; ++i) wall_g[i] = 0.9 * std::sin(2 * kPi * g.node_x1(i));
  CellProblemData data;
  data.neumann_data = wall_g;
  auto a = s_flat.solve_neumann_cell(data).to_field();
  auto b = s_tiny.solve_neumann_cell(data).to_field();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    worst = std::max(worst, std::abs(a.v[i] - b.v[i]));
  CHECK(worst < 1e-8);
}

TEST_CASE("layer cache inserts and finds concurrently-disjoint keys") {
  LayerCache cache;
  DomainParams d(0.25, 2, default_profile());
  StripGrid g = cell_grid(8, 0.1, 2.0, 6.0);
  LayerProfile p;
  p.grid = g;
  p.psi = Field(g);
  p.phi = Field(g);
  p.v = VectorField(g);
  CHECK(cache.find({1, 0, 0}) == nullptr);
  auto sp = cache.insert({1, 0, 0}, p);
  CHECK(cache.find({1, 0, 0}) == sp);
  CHECK(cache.size() == 1);
}
