#pragma once

#include <filesystem>
#include <string>

#include "ptrap/field_solver.hpp"

namespace ptrap {

// PTGRID01 dump, all fields little-endian:
//   char[8]   "PTGRID01"
//   uint32    nx, ny, nz
//   float64   extent, r0
//   float64   nx*ny*nz node values, x fastest
//   uint8     nx*ny*nz node classes (NodeClass), same order

std::string encode_grid(const PotentialGrid& grid);

/// Rebuilds a grid from dump bytes. The mask carries no geometry; each class's
/// fixed potential is taken from its first node. Throws Error on malformed
/// input.
PotentialGrid decode_grid(std::string_view bytes);

void write_grid_dump(const std::filesystem::path& path, const PotentialGrid& grid);
PotentialGrid read_grid_dump(const std::filesystem::path& path);

/// Node values along the three coordinate axes through the centre:
/// columns axis,coordinate_m,potential,node_class.
std::string axis_profiles_csv(const PotentialGrid& grid);

}  // namespace ptrap
