#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roughflow/euler.hpp"
#include "roughflow/geometry.hpp"
#include "roughflow/ns.hpp"

namespace roughflow {

/// Full study configuration, parsed from a single JSON tree.
struct RunConfig {
  // Domain family.
  std::vector<double> epsilons{0.25, 0.125, 0.0625};
  int n0 = 2;
  double profile_mean = 2.0;
  std::vector<std::pair<int, std::complex<double>>> profile_modes{
      {1, {0.5, 0.0}}};

  int N = 3;  // expansion order

  // Forcing and friction.
  ForcingSpec forcing;
  double lambda_mean = 1.0;
  std::vector<std::pair<int, std::complex<double>>> lambda_modes{
      {1, {0.25, 0.0}}};

  // Base-flow numerics.
  int euler_n1 = 64;
  int euler_n2 = 257;
  double euler_height = 8.0;
  int snapshots = 17;
  double T0 = 0.5;

  // Navier-Stokes numerics.
  int ns_per_period = 8;  // x1 modes per roughness wavelength (min 4)
  int ns_n2 = 281;
  double ns_height = 8.0;
  double ns_cfl = 0.5;
  int ns_records = 17;

  // Viscosity rule nu = nu_c * eps^nu_p, overridden by an explicit list.
  double nu_c = 100.0;
  double nu_p = 7.0;
  std::vector<double> nu_list;

  bool theorem_mode = true;

  // Harness.
  int parallel = 1;
  std::uint64_t seed = 20240901;
  std::string output_dir = "out";

  DomainParams domain(double eps) const;
  RoughProfile profile() const;
  FrictionSpec lambda() const;
  double nu_for(double eps, std::size_t index) const;
};

/// Parse + validate; error messages carry the offending JSON path.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

/// Per-(epsilon, nu) study record. Column order of the CSV matches the
/// field order here.
struct SweepResult {
  double epsilon = 0.0;
  double nu = 0.0;
  double alpha = 0.0;
  int N = 0;
  int grid_x1 = 0;
  int grid_x2 = 0;
  double T0 = 0.0;
  double q_l2_scaled = 0.0;   // sup_t eps^{-1/2} ||u - u_app||_L2
  double q_linf = 0.0;        // sup_t ||u - u_app||_Linf
  double q_curl_scaled = 0.0; // sup_t eps ||curl(u - u_app)||_Linf
  double resid_linf = 0.0;
  double resid_l2 = 0.0;
  double runtime_s = 0.0;
  std::string status;  // "ok" | "extrapolated" | error text
  bool resolved = false;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Run the full study: shared base flow, one bundle per epsilon, one NS run
/// per (epsilon, nu) pair, executed in parallel up to config.parallel with
/// deterministic aggregation order. Pair failures land in `status`.
std::vector<SweepResult> run_sweep(const RunConfig& cfg,
                                   const ProgressFn& progress = {});

/// Emitters. CSV column order is fixed; when `mask_runtime` is set the
/// volatile runtime column is written as 0 so byte-identical reruns can be
/// asserted.
std::string to_csv(const std::vector<SweepResult>& rs,
                   bool mask_runtime = false);
std::string to_json(const std::vector<SweepResult>& rs);
std::vector<SweepResult> from_json(const std::string& text);
/// Minimal hand-rolled log-log SVG plot of the theorem quantities vs eps.
std::string to_svg(const std::vector<SweepResult>& rs);

void write_file(const std::string& path, const std::string& content);

}  // namespace roughflow
