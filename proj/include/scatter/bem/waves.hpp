#pragma once

#include "scatter/types.hpp"

#include <optional>
#include <vector>

namespace scatter::bem {

/// Plane waves sharing one wavenumber and coupling parameter.
struct WaveGroup {
    double kappa = 1.0;
    double eta = 1.0;
    std::vector<Vec3> directions;
};

/// Incident plane waves; far-field and density columns are ordered group by group.
struct WaveSet {
    std::vector<WaveGroup> groups;

    int wave_count() const;
    /// Index of the first column belonging to group g.
    int column_offset(int g) const;
    /// Throws ConfigError when a direction is not unit length or kappa/eta are not positive.
    void validate() const;

    /// One group with coupling eta (defaults to kappa when eta <= 0).
    static WaveSet single(double kappa, std::vector<Vec3> directions, double eta = 0.0);
};

/// Quadrature on the unit sphere.
struct EvalGrid {
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> points;
    Eigen::VectorXd weights;

    int size() const { return static_cast<int>(points.rows()); }
    void validate() const;

    /// Icosphere vertices with uniform weights 4*pi/N.
    static EvalGrid icosphere(int level);
};

struct FarField {
    Eigen::MatrixXcd values; // grid points x waves
    EvalGrid grid;
    WaveSet waves;
    std::optional<double> delta;
};

/// Weighted L2 pairing on the sphere, conjugate-linear in the first argument.
cplx farfield_inner(const EvalGrid& grid, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Weighted L2 norm over all columns.
double farfield_norm(const EvalGrid& grid, const Eigen::MatrixXcd& values);

/// Real part of the weighted pairing summed over all columns.
double farfield_real_inner(const EvalGrid& grid, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

} // namespace scatter::bem
