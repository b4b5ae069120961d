#pragma once
#include <string>

#include "roughflow/fields.hpp"

namespace roughflow {

/// Binary field file: a 4-byte little-endian header length, a JSON header
/// {schema, shape, grid, time, name}, then the samples as little-endian
/// float64 in row-major (i, m) order.
constexpr int kFieldSchemaVersion = 1;

void save_field(const std::string& path, const Field& f, double time,
                const std::string& name);

struct LoadedField {
  Field field;
  double time = 0.0;
  std::string name;
};
LoadedField load_field(const std::string& path);

}  // namespace roughflow
