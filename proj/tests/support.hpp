#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <tuple>
#include <random>
#include <string>

namespace testing_support {

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("scatter_tests_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline scatter::VertexField random_field(int rows, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    scatter::VertexField f(rows, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
    return f;
}

inline Eigen::VectorXd random_vector(Eigen::Index size, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd v(size);
    for (auto& x : v) x = n(rng);
    return v;
}

inline Eigen::VectorXcd random_cvector(Eigen::Index size, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXcd v(size);
    for (auto& x : v) x = {n(rng), n(rng)};
    return v;
}

/// Cube [-1,1]^3 with every face split into an n x n grid of quads, two triangles each.
inline scatter::mesh::TriangleMesh grid_cube(int n)
{
    using scatter::Vec3;
    std::vector<Vec3> verts;
    std::vector<scatter::Tri> tris;
    std::map<std::tuple<long, long, long>, int> index;
    auto vid = [&](const Vec3& p) {
        const auto key = std::make_tuple(std::lround(p.x() * n * 4), std::lround(p.y() * n * 4), std::lround(p.z() * n * 4));
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        verts.push_back(p);
        index.emplace(key, static_cast<int>(verts.size()) - 1);
        return static_cast<int>(verts.size()) - 1;
    };
    for (int axis = 0; axis < 3; ++axis)
        for (int side : {-1, 1}) {
            const int u = (axis + 1) % 3, v = (axis + 2) % 3;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto corner = [&](int a, int b) {
                        Vec3 p;
                        p[axis] = side;
                        p[u] = -1.0 + 2.0 * a / n;
                        p[v] = -1.0 + 2.0 * b / n;
                        return vid(p);
                    };
                    const int p00 = corner(i, j), p10 = corner(i + 1, j), p11 = corner(i + 1, j + 1), p01 = corner(i, j + 1);
                    if (side > 0) {
                        tris.push_back({p00, p10, p11});
                        tris.push_back({p00, p11, p01});
                    } else {
                        tris.push_back({p00, p11, p10});
                        tris.push_back({p00, p01, p11});
                    }
                }
        }
    scatter::VertexField x(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
    return {std::move(x), std::move(tris)};
}

} // namespace testing_support
