#pragma once

#include <string>

#include "gridfuse/grid.hpp"

namespace gridfuse {

/// Binary grid file: magic "EOGM", version u32, n_x u32, n_y u32,
/// resolution f64, then the row-major float32 m_F plane followed by the
/// m_O plane. Little-endian throughout.
void save_grid(const EvidentialGrid& grid, const std::string& path);
EvidentialGrid load_grid(const std::string& path);

/// PPM (P6) rendering: red = occupied mass, green = free mass, blue = 0.
/// Rows are ordered so the vehicle-forward axis points up.
void render(const EvidentialGrid& grid, const std::string& path);

}  // namespace gridfuse
