#pragma once

#include "scatter/inverse/forward_model.hpp"
#include "scatter/krylov/gmres.hpp"
#include "scatter/tp/metric.hpp"

#include <functional>
#include <optional>

namespace scatter::inverse {

/// Regularised Gauss-Newton operator DF' DF + alpha M on one shape, with a
/// preconditioner that inverts the translation block exactly and uses the
/// fractional sandwich (scaled by 1/alpha) everywhere else.
class NormalSystem {
public:
    NormalSystem(const ForwardModel& model, const tp::MetricOperator& metric, const tp::Preconditioner& precond,
                 double alpha);

    VertexField apply(const VertexField& v) const;
    VertexField precondition(const VertexField& r) const;
    /// Re <DF e_a, DF e_b> for unit translations e_a.
    const Eigen::Matrix3d& translation_block() const { return h_; }

private:
    const ForwardModel& model_;
    const tp::MetricOperator& metric_;
    const tp::Preconditioner& precond_;
    double alpha_;
    Eigen::Matrix3d h_;
    Eigen::Matrix3d h_inv_;
};

/// Gradient of 1/2 |F - g|^2 + alpha E: DF' (F - g) + alpha grad E.
VertexField objective_gradient(const ForwardModel& model, const Eigen::MatrixXcd& residual, double alpha,
                               const VertexField& energy_gradient);

struct DirectionOptions {
    double tol = 1e-2;
    int max_iterations = 200;
};

struct Direction {
    VertexField v;
    krylov::SolveReport report;
    /// <grad J, v> in the Euclidean pairing.
    double slope = 0.0;
    /// True if the Gauss-Newton solution failed the descent test and v is the
    /// preconditioned steepest-descent direction instead.
    bool fallback = false;
};

/// Solves (DF' DF + alpha M) v = -grad J. Falls back to -P grad J when the
/// inexact solution does not descend (slope > 0).
Direction gauss_newton_direction(const NormalSystem& system, const VertexField& objective_grad,
                                 const DirectionOptions& options);

struct LineSearchOptions {
    double sigma = 1e-4;
    double backtrack = 0.5;
    double min_step = 1e-8;
    /// First trial is min(1, ccd_fraction * collision-free step bound).
    double ccd_fraction = 0.9;
};

struct LineSearchResult {
    double step = 0.0;
    /// Collision-free bound from continuous collision detection (+inf if none).
    double max_step = 0.0;
    double objective = 0.0;
    int trials = 0;
};

/// Objective at a trial shape; std::nullopt marks an inadmissible trial.
using TrialObjective = std::function<std::optional<double>(const mesh::TriangleMesh& trial, double step)>;

/// Armijo backtracking along v starting below the collision-free bound.
/// Trials that degenerate a face count as failed. Throws StepTooSmall.
LineSearchResult line_search(const mesh::TriangleMesh& mesh, const VertexField& v, double objective0, double slope,
                             const TrialObjective& objective, const LineSearchOptions& options = {});

} // namespace scatter::inverse
