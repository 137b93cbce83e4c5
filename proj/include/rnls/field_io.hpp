#pragma once

#include <filesystem>
#include <string>

#include "rnls/grid.hpp"

namespace rnls {

// Flat binary container for a FieldPair:
//   bytes 0..4   marker "RNLS1" (doubles as the endianness witness)
//   byte  5      backend tag (0 radial, 1 cartesian)
//   uint32      n (radial node count / points per axis), little-endian
//   float64     r_max (radial) or box half width L (cartesian)
//   float64[]   interleaved re,im for u, then for v
void save_field_pair(const FieldPair& pair, const std::filesystem::path& path);
FieldPair load_field_pair(const std::filesystem::path& path);

} // namespace rnls
