#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughflow/errors.hpp"
#include "roughflow/harness.hpp"

namespace roughflow {

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv(const std::vector<SweepResult>& rs, bool mask_runtime) {
  std::ostringstream out;
  out << "epsilon,nu,alpha,N,grid_x1,grid_x2,T0,q_l2_scaled,q_linf,"
         "q_curl_scaled,resid_linf,resid_l2,runtime_s,status\n";
  for (const auto& r : rs) {
    out << fmt(r.epsilon) << ',' << fmt(r.nu) << ',' << fmt(r.alpha) << ','
        << r.N << ',' << r.grid_x1 << ',' << r.grid_x2 << ',' << fmt(r.T0)
        << ',' << fmt(r.q_l2_scaled) << ',' << fmt(r.q_linf) << ','
        << fmt(r.q_curl_scaled) << ',' << fmt(r.resid_linf) << ','
        << fmt(r.resid_l2) << ',' << fmt(mask_runtime ? 0.0 : r.runtime_s)
        << ',' << r.status << '\n';
  }
  return out.str();
}

std::string to_json(const std::vector<SweepResult>& rs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rs) {
    j.push_back({{"epsilon", r.epsilon},
                 {"nu", r.nu},
                 {"alpha", r.alpha},
                 {"N", r.N},
                 {"grid_x1", r.grid_x1},
                 {"grid_x2", r.grid_x2},
                 {"T0", r.T0},
                 {"q_l2_scaled", r.q_l2_scaled},
                 {"q_linf", r.q_linf},
                 {"q_curl_scaled", r.q_curl_scaled},
                 {"resid_linf", r.resid_linf},
                 {"resid_l2", r.resid_l2},
                 {"runtime_s", r.runtime_s},
                 {"status", r.status},
                 {"resolved", r.resolved}});
  }
  return j.dump(2);
}

std::vector<SweepResult> from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<SweepResult> out;
  for (const auto& e : j) {
    SweepResult r;
    r.epsilon = e.at("epsilon").get<double>();
    r.nu = e.at("nu").get<double>();
    r.alpha = e.at("alpha").get<double>();
    r.N = e.at("N").get<int>();
    r.grid_x1 = e.at("grid_x1").get<int>();
    r.grid_x2 = e.at("grid_x2").get<int>();
    r.T0 = e.at("T0").get<double>();
    r.q_l2_scaled = e.at("q_l2_scaled").get<double>();
    r.q_linf = e.at("q_linf").get<double>();
    r.q_curl_scaled = e.at("q_curl_scaled").get<double>();
    r.resid_linf = e.at("resid_linf").get<double>();
    r.resid_l2 = e.at("resid_l2").get<double>();
    r.runtime_s = e.at("runtime_s").get<double>();
    r.status = e.at("status").get<std::string>();
    r.resolved = e.at("resolved").get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_svg(const std::vector<SweepResult>& rs) {
  // Log-log scatter of the three theorem quantities against epsilon.
  struct Series {
    const char* name;
    const char* color;
    double SweepResult::* field;
  };
  std::vector<Series> series = {
      {"q_l2_scaled", "#1f77b4", &SweepResult::q_l2_scaled},
      {"q_linf", "#d62728", &SweepResult::q_linf},
      {"q_curl_scaled", "#2ca02c", &SweepResult::q_curl_scaled},
  };
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : rs) {
    if (r.epsilon <= 0) continue;
    xmin = std::min(xmin, std::log10(r.epsilon));
    xmax = std::max(xmax, std::log10(r.epsilon));
    for (auto& s : series) {
      double v = r.*(s.field);
      if (v > 0) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) {
    ymin = -1;
    ymax = 0;
  }
  const double W = 560, H = 420, L = 70, B = 60;
  auto X = [&](double lx) {
    return L + (lx - xmin) / (xmax - xmin) * (W - L - 20);
  };
  auto Y = [&](double ly) {
    return H - B - (ly - ymin) / (ymax - ymin) * (H - B - 20);
  };
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
    << H << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  s << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - 20
    << "' y2='" << H - B << "' stroke='black'/>\n";
  s << "<line x1='" << L << "' y1='20' x2='" << L << "' y2='" << H - B
    << "' stroke='black'/>\n";
  s << "<text x='" << (W / 2) << "' y='" << (H - 15)
    << "' text-anchor='middle' font-size='13'>log10 epsilon</text>\n";
  s << "<text x='18' y='" << (H / 2)
    << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
    << (H / 2) << ")'>log10 value</text>\n";
  for (double lx = std::ceil(xmin); lx <= xmax + 1e-9; lx += 1.0)
    s << "<text x='" << X(lx) << "' y='" << (H - B + 18)
      << "' text-anchor='middle' font-size='11'>" << lx << "</text>\n";
  for (double ly = std::ceil(ymin); ly <= ymax + 1e-9; ly += 1.0)
    s << "<text x='" << (L - 8) << "' y='" << Y(ly) + 4
      << "' text-anchor='end' font-size='11'>" << ly << "</text>\n";
  int legend_y = 30;
  for (auto& sr : series) {
    std::ostringstream pts;
    for (const auto& r : rs) {
      double v = r.*(sr.field);
      if (r.epsilon <= 0 || v <= 0) continue;
      double px = X(std::log10(r.epsilon)), py = Y(std::log10(v));
      pts << px << ',' << py << ' ';
      s << "<circle cx='" << px << "' cy='" << py << "' r='3.5' fill='"
        << sr.color << "'/>\n";
    }
    s << "<polyline points='" << pts.str() << "' fill='none' stroke='"
      << sr.color << "' stroke-width='1.2'/>\n";
    s << "<circle cx='" << (W - 170) << "' cy='" << legend_y
      << "' r='4' fill='" << sr.color << "'/>\n";
    s << "<text x='" << (W - 158) << "' y='" << legend_y + 4
      << "' font-size='12'>" << sr.name << "</text>\n";
    legend_y += 18;
  }
  s << "</svg>\n";
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_file: cannot open " + path);
  out.write(content.data(), content.size());
}

}  // namespace roughflow
