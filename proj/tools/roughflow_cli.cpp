// Command-line front end: builds approximations, runs simulations, sweeps
// the (epsilon, nu) study, executes the property suites, and re-emits
// reports from stored results.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "roughflow/checks.hpp"
#include "roughflow/expansion.hpp"
#include "roughflow/field_io.hpp"
#include "roughflow/harness.hpp"

using namespace roughflow;

namespace {

RunConfig load_config(const std::string& path, const std::string& out_dir) {
  RunConfig cfg = path.empty() ? parse_config_text("{}") : parse_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (const char* env = std::getenv("ROUGHFLOW_OUTPUT_DIR"); env && out_dir.empty())
    cfg.output_dir = env;
  return cfg;
}

void progress_line(const std::string& msg) {
  nlohmann::json j = {{"event", msg}};
  std::cout << j.dump() << "\n";
}

std::vector<EulerState> base_flow(const RunConfig& cfg) {
  StripGrid eg;
  eg.n1 = cfg.euler_n1;
  eg.period = 1.0;
  eg.x2 = uniform_nodes(cfg.euler_height, cfg.euler_n2);
  return solve_euler_base(eg, cfg.forcing, cfg.T0, cfg.snapshots);
}

int cmd_build_approx(const RunConfig& cfg) {
  auto base = base_flow(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  for (std::size_t q = 0; q < cfg.epsilons.size(); ++q) {
    double eps = cfg.epsilons[q];
    progress_line("building approximation for epsilon=" + std::to_string(eps));
    ApproximationBundle bundle(cfg.domain(eps), base, {cfg.N, {}, 1e-10});
    StripGrid eval = default_eval_grid(cfg.domain(eps), 6.0, cfg.ns_per_period);
    for (double frac : {0.5, 1.0}) {
      double t = frac * cfg.T0;
      auto u = bundle.velocity(eval, t);
      std::string tag = "eps" + std::to_string(q) + "_t" +
                        std::to_string(frac);
      save_field(cfg.output_dir + "/uapp_" + tag + "_u1.fld", u.c1, t, "u1");
      save_field(cfg.output_dir + "/uapp_" + tag + "_u2.fld", u.c2, t, "u2");
    }
    auto rr = residual_curl(bundle, cfg.forcing, eval, 0.7 * cfg.T0);
    nlohmann::json j = {{"epsilon", eps},
                        {"resid_linf", rr.linf},
                        {"resid_l2", rr.l2},
                        {"boundary_defect", bundle.boundary_defect(
                                                0.7 * cfg.T0,
                                                8 * cfg.domain(eps).inv_epsilon())}};
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_run_ns(const RunConfig& cfg, double eps, double nu) {
  NSConfig ns(cfg.domain(eps));
  ns.nu = nu;
  ns.lambda = cfg.lambda();
  ns.forcing = cfg.forcing;
  ns.n1 = std::max(32, cfg.ns_per_period * cfg.domain(eps).inv_epsilon());
  ns.n2 = cfg.ns_n2;
  ns.height = cfg.ns_height;
  ns.T0 = cfg.T0;
  ns.cfl = cfg.ns_cfl;
  NSSolver solver(std::move(ns));
  std::filesystem::create_directories(cfg.output_dir);
  int snap = 0;
  auto res = solver.run(
      [&](const NSState& s) {
        save_field(cfg.output_dir + "/ns_omega_" + std::to_string(snap++) +
                       ".fld",
                   s.omega, s.t, "omega");
      },
      cfg.ns_records);
  for (auto& r : res.records) {
    nlohmann::json j = {{"t", r.t},
                        {"E", r.energy},
                        {"omega_linf", r.omega_linf},
                        {"dt", r.dt}};
    std::cout << j.dump() << "\n";
  }
  nlohmann::json fin = {{"energy_drift", res.energy_drift},
                        {"resolved", res.flags.resolved},
                        {"nu_in_window", res.flags.nu_in_window}};
  std::cout << fin.dump() << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, bool svg) {
  auto results = run_sweep(cfg, progress_line);
  std::filesystem::create_directories(cfg.output_dir);
  write_file(cfg.output_dir + "/sweep.csv", to_csv(results));
  write_file(cfg.output_dir + "/sweep.json", to_json(results));
  if (svg) write_file(cfg.output_dir + "/sweep.svg", to_svg(results));
  int failures = 0;
  for (auto& r : results)
    if (r.status.rfind("error", 0) == 0) ++failures;
  progress_line("sweep finished, " + std::to_string(results.size()) +
                " pairs, " + std::to_string(failures) + " failures");
  return failures == 0 ? 0 : 1;
}

int cmd_check(const RunConfig& cfg, const std::string& suite, int count) {
  DomainParams dom = cfg.domain(cfg.epsilons.front());
  std::vector<CheckRecord> records;
  auto append = [&](std::vector<CheckRecord> v) {
    records.insert(records.end(), v.begin(), v.end());
  };
  bool all = suite == "all";
  if (all || suite == "traces") append(run_trace_suite(dom, count, cfg.seed));
  if (all || suite == "identities") {
    append(run_identity_suite(dom, count, cfg.seed + 1));
    append(run_slip_equivalence_suite(dom, count, cfg.seed + 2));
  }
  if (all || suite == "weight") {
    double nu_t = cfg.nu_for(dom.epsilon, 0) / dom.epsilon;
    append(run_weight_suite(nu_t, 1.0));
  }
  if (all || suite == "scaling") append(run_scaling_flat_check(0.4));
  int failures = 0;
  for (auto& r : records) {
    nlohmann::json j = {{"name", r.name},
                        {"value", r.value},
                        {"bound", r.bound},
                        {"pass", r.pass}};
    std::cout << j.dump() << "\n";
    if (!r.pass) ++failures;
  }
  progress_line(std::to_string(records.size()) + " checks, " +
                std::to_string(failures) + " failures");
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& in, const std::string& format,
               const std::string& out) {
  std::ifstream f(in);
  if (!f) {
    std::cerr << "cannot open " << in << "\n";
    return 1;
  }
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  auto rs = from_json(text);
  std::string rendered;
  if (format == "csv")
    rendered = to_csv(rs);
  else if (format == "json")
    rendered = to_json(rs);
  else if (format == "svg-plots")
    rendered = to_svg(rs);
  else {
    std::cerr << "unknown format " << format << "\n";
    return 1;
  }
  if (out.empty())
    std::cout << rendered;
  else
    write_file(out, rendered);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-wall vanishing-viscosity study"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides config)");

  auto* build = app.add_subcommand("build-approx",
                                   "build the layered approximation");
  auto* runns = app.add_subcommand("run-ns", "run one Navier-Stokes case");
  double eps = 0.25, nu = -1.0;
  runns->add_option("--epsilon", eps, "roughness wavelength (1/integer)");
  runns->add_option("--nu", nu, "viscosity (default: the config rule)");
  auto* sweep = app.add_subcommand("sweep", "run the full (epsilon, nu) study");
  bool svg = false;
  sweep->add_flag("--svg", svg, "also emit log-log SVG plots");
  auto* check = app.add_subcommand("check", "run the property suites");
  std::string suite = "all";
  int count = 20;
  check->add_option("--suite", suite,
                    "traces | identities | weight | scaling | all");
  check->add_option("--count", count, "randomized fields per suite");
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  check->add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  auto* report = app.add_subcommand("report", "re-emit stored sweep results");
  std::string in_path, format = "csv", out_path;
  report->add_option("--in", in_path, "sweep.json produced by `sweep`")
      ->required();
  report->add_option("--format", format, "csv | json | svg-plots");
  report->add_option("--to", out_path, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return cmd_report(in_path, format, out_path);
    RunConfig cfg = load_config(config_path, out_dir);
    if (seed_set) cfg.seed = seed_override;
    if (build->parsed()) return cmd_build_approx(cfg);
    if (runns->parsed())
      return cmd_run_ns(cfg, eps, nu > 0 ? nu : cfg.nu_for(eps, 0));
    if (sweep->parsed()) return cmd_sweep(cfg, svg);
    if (check->parsed()) return cmd_check(cfg, suite, count);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
