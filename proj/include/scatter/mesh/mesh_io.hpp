#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace scatter::mesh {

/// Reads an OBJ or PLY (ASCII or binary little-endian) file, chosen by extension.
TriangleMesh load_mesh(const std::filesystem::path& path);

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

struct PlyAttributes {
    std::map<std::string, Eigen::VectorXd> vertex;
    std::map<std::string, Eigen::VectorXd> face;
};

/// Binary little-endian PLY with optional per-vertex and per-face scalar properties.
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, const PlyAttributes& attributes = {});

/// Reads the scalar properties stored next to the geometry in a PLY file.
PlyAttributes load_ply_attributes(const std::filesystem::path& path);

} // namespace scatter::mesh
