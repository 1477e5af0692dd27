#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

namespace scatter::tp {

struct EnergyParams {
    double p = 6.0;
    /// Skip face pairs that share a vertex. Off by default: the discrete kernel is finite there.
    bool exclude_adjacent = false;

    /// Fractional order 2 - 2/p of the matching Sobolev space.
    double s() const { return 2.0 - 2.0 / p; }
    /// Throws ConfigError unless p > 4.
    void validate() const;
};

/// Sum over ordered face pairs t1 != t2 of |<nu_1, m_2 - m_1>|^p / |m_2 - m_1|^(2p) * a_1 a_2.
double tp_energy(const mesh::TriangleMesh& mesh, const EnergyParams& params = {});

struct EnergyGradient {
    double value = 0.0;
    VertexField gradient;
};

/// Energy together with its exact derivative with respect to every vertex coordinate.
EnergyGradient tp_energy_gradient(const mesh::TriangleMesh& mesh, const EnergyParams& params = {});

inline VertexField tp_differential(const mesh::TriangleMesh& mesh, const EnergyParams& params = {})
{
    return tp_energy_gradient(mesh, params).gradient;
}

/// Per-face one-sided sum of the kernel times the partner's area; density . areas == energy.
FaceScalarField tp_density(const mesh::TriangleMesh& mesh, const EnergyParams& params = {});

} // namespace scatter::tp
