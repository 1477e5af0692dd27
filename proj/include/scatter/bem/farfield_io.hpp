#pragma once

#include "scatter/bem/waves.hpp"

#include <string>

namespace scatter::bem {

/// Binary little-endian far-field file: magic "SFFD", version, L, D, point count, optional
/// noise level, grid, kappa/direction/eta lists, then column-major complex values.
/// Every wavenumber must carry the same number of directions. Throws IoError or ParseError.
void save_farfield(const std::string& path, const FarField& data);
FarField load_farfield(const std::string& path);

/// One row per (point, wave): x,y,z,weight,wave,kappa,re,im.
void export_farfield_csv(const std::string& path, const FarField& data);

} // namespace scatter::bem
