#include "roughflow/field_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>

#include "roughflow/errors.hpp"

namespace roughflow {

namespace {
void put_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}
std::uint32_t get_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}
void put_f64_le(std::ostream& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}
double get_f64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}
}  // namespace

void save_field(const std::string& path, const Field& f, double time,
                const std::string& name) {
  nlohmann::json hdr = {
      {"schema", kFieldSchemaVersion},
      {"shape", {f.grid.n1, f.grid.n2()}},
      {"grid", {{"period", f.grid.period}, {"x2", f.grid.x2}}},
      {"time", time},
      {"name", name},
  };
  std::string h = hdr.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("save_field: cannot open " + path);
  put_u32_le(out, static_cast<std::uint32_t>(h.size()));
  out.write(h.data(), h.size());
  for (double v : f.v) put_f64_le(out, v);
  if (!out) throw InputError("save_field: write failed for " + path);
}

LoadedField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_field: cannot open " + path);
  std::uint32_t hlen = get_u32_le(in);
  std::string h(hlen, '\0');
  in.read(h.data(), hlen);
  nlohmann::json hdr = nlohmann::json::parse(h);
  if (hdr.at("schema").get<int>() != kFieldSchemaVersion)
    throw InputError("load_field: unsupported schema version");
  StripGrid g;
  g.n1 = hdr.at("shape")[0].get<int>();
  g.period = hdr.at("grid").at("period").get<double>();
  g.x2 = hdr.at("grid").at("x2").get<std::vector<double>>();
  LoadedField out{Field(g), hdr.at("time").get<double>(),
                  hdr.at("name").get<std::string>()};
  for (auto& v : out.field.v) v = get_f64_le(in);
  if (!in) throw InputError("load_field: truncated file " + path);
  return out;
}

}  // namespace roughflow
