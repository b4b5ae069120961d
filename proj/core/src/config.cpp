#include <json.hpp>

#include <cmath>
#include <fstream>

#include "roughflow/errors.hpp"
#include "roughflow/harness.hpp"

namespace roughflow {

using nlohmann::json;

DomainParams RunConfig::domain(double eps) const {
  return DomainParams(eps, n0, profile());
}
RoughProfile RunConfig::profile() const {
  return RoughProfile(profile_mean, profile_modes);
}
FrictionSpec RunConfig::lambda() const {
  return FrictionSpec(lambda_mean, lambda_modes);
}
double RunConfig::nu_for(double eps, std::size_t index) const {
  if (!nu_list.empty()) {
    if (index >= nu_list.size())
      throw InputError("nu_list shorter than the epsilon sweep");
    return nu_list[index];
  }
  return nu_c * std::pow(eps, nu_p);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError("config error at " + path + ": " + what);
}

double get_num(const json& j, const std::string& path, const char* key,
               double fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(path + "/" + key, "missing required value");
    return fallback;
  }
  if (!j[key].is_number()) fail(path + "/" + key, "expected a number");
  return j[key].get<double>();
}

std::vector<std::pair<int, std::complex<double>>> get_modes(
    const json& j, const std::string& path) {
  std::vector<std::pair<int, std::complex<double>>> out;
  if (!j.is_array()) fail(path, "expected an array of [j, re, im] triples");
  for (std::size_t q = 0; q < j.size(); ++q) {
    const auto& e = j[q];
    if (!e.is_array() || e.size() != 3)
      fail(path + "/" + std::to_string(q), "expected a [j, re, im] triple");
    out.push_back({e[0].get<int>(),
                   {e[1].get<double>(), e[2].get<double>()}});
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;

  if (j.contains("domain")) {
    const auto& d = j["domain"];
    if (d.contains("epsilons")) {
      c.epsilons = d["epsilons"].get<std::vector<double>>();
    } else if (d.contains("epsilon")) {
      c.epsilons = {d["epsilon"].get<double>()};
    }
    c.n0 = static_cast<int>(get_num(d, "/domain", "n0", c.n0));
    if (d.contains("profile")) {
      const auto& p = d["profile"];
      c.profile_mean = get_num(p, "/domain/profile", "mean", c.profile_mean);
      if (p.contains("modes"))
        c.profile_modes = get_modes(p["modes"], "/domain/profile/modes");
    }
  }
  for (std::size_t q = 0; q < c.epsilons.size(); ++q) {
    double eps = c.epsilons[q];
    std::string path = "/domain/epsilons/" + std::to_string(q);
    if (!(eps > 0.0 && eps < 1.0)) fail(path, "epsilon must lie in (0,1)");
    double inv = 1.0 / eps;
    if (std::abs(inv - std::round(inv)) > 1e-9)
      fail(path, "1/epsilon must be an integer");
    if (q > 0 && std::abs(c.epsilons[q - 1] / eps - 2.0) > 1e-12)
      fail(path, "sweep epsilons must be dyadic (each half the previous)");
  }
  if (c.n0 < 1) fail("/domain/n0", "n0 >= 1 required");

  c.N = static_cast<int>(get_num(j, "", "N", c.N));
  if (c.N < 1) fail("/N", "N >= 1 required");

  if (j.contains("forcing")) {
    const auto& f = j["forcing"];
    if (!f.contains("modes") || !f["modes"].is_array())
      fail("/forcing/modes", "expected an array of forcing modes");
    std::vector<ForcingMode> modes;
    for (std::size_t q = 0; q < f["modes"].size(); ++q) {
      const auto& e = f["modes"][q];
      std::string path = "/forcing/modes/" + std::to_string(q);
      ForcingMode m;
      m.amplitude = get_num(e, path, "amplitude", 1.0);
      m.m = static_cast<int>(get_num(e, path, "m", 1));
      m.use_sin = e.value("sin", false);
      m.ramp_time = get_num(e, path, "ramp_time", 0.25);
      m.bump_top = get_num(e, path, "bump_top", 1.5);
      m.bump_width = get_num(e, path, "bump_width", 1.5);
      m.component = static_cast<int>(get_num(e, path, "component", 0));
      m.off_time = get_num(e, path, "off_time", -1.0);
      m.off_width = get_num(e, path, "off_width", 0.05);
      modes.push_back(m);
    }
    try {
      c.forcing = ForcingSpec(std::move(modes));
    } catch (const std::exception& e) {
      fail("/forcing", e.what());
    }
  } else {
    ForcingMode m;
    c.forcing = ForcingSpec({m});
  }

  if (j.contains("lambda")) {
    const auto& l = j["lambda"];
    c.lambda_mean = get_num(l, "/lambda", "mean", c.lambda_mean);
    if (l.contains("modes"))
      c.lambda_modes = get_modes(l["modes"], "/lambda/modes");
  }

  if (j.contains("euler")) {
    const auto& e = j["euler"];
    c.euler_n1 = static_cast<int>(get_num(e, "/euler", "n1", c.euler_n1));
    c.euler_n2 = static_cast<int>(get_num(e, "/euler", "n2", c.euler_n2));
    c.euler_height = get_num(e, "/euler", "height", c.euler_height);
    c.snapshots = static_cast<int>(get_num(e, "/euler", "snapshots", c.snapshots));
  }
  c.T0 = get_num(j, "", "T0", c.T0);
  if (c.T0 <= 0) fail("/T0", "T0 must be positive");

  if (j.contains("ns")) {
    const auto& n = j["ns"];
    c.ns_per_period =
        static_cast<int>(get_num(n, "/ns", "per_period", c.ns_per_period));
    c.ns_n2 = static_cast<int>(get_num(n, "/ns", "n2", c.ns_n2));
    c.ns_height = get_num(n, "/ns", "height", c.ns_height);
    c.ns_cfl = get_num(n, "/ns", "cfl", c.ns_cfl);
    c.ns_records = static_cast<int>(get_num(n, "/ns", "records", c.ns_records));
    c.theorem_mode = n.value("theorem_mode", c.theorem_mode);
    if (n.contains("nu_list"))
      c.nu_list = n["nu_list"].get<std::vector<double>>();
    c.nu_c = get_num(n, "/ns", "nu_c", c.nu_c);
    c.nu_p = get_num(n, "/ns", "nu_p", c.nu_p);
    if (c.ns_per_period < 4)
      fail("/ns/per_period", "at least 4 points per roughness wavelength");
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    c.parallel = static_cast<int>(get_num(s, "/sweep", "parallel", c.parallel));
    if (s.contains("seed")) c.seed = s["seed"].get<std::uint64_t>();
    if (c.parallel < 1) fail("/sweep/parallel", "parallel >= 1 required");
  }
  if (j.contains("output")) {
    if (j["output"].contains("dir"))
      c.output_dir = j["output"]["dir"].get<std::string>();
  }

  // Eager validation of derived objects: profile positivity, lambda, forcing
  // support against the flat-domain height.
  try {
    c.profile();
  } catch (const std::exception& e) {
    fail("/domain/profile", e.what());
  }
  try {
    c.lambda();
  } catch (const std::exception& e) {
    fail("/lambda", e.what());
  }
  if (c.forcing.support_top() > 0.5 * c.euler_height)
    fail("/forcing", "support must stay below half the domain height");
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("parse_config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace roughflow
