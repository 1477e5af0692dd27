#include "scatter/inverse/gauss_newton.hpp"

#include "scatter/error.hpp"
#include "scatter/mesh/ccd.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace scatter::inverse {

NormalSystem::NormalSystem(const ForwardModel& model, const tp::MetricOperator& metric,
                           const tp::Preconditioner& precond, double alpha)
    : model_(model), metric_(metric), precond_(precond), alpha_(alpha)
{
    const int nv = model.geometry().vertices;
    std::array<Eigen::MatrixXcd, 3> images;
    for (int a = 0; a < 3; ++a) {
        VertexField e = VertexField::Zero(nv, 3);
        e.col(a).setOnes();
        images[a] = model.apply_DF(e);
    }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) h_(a, b) = bem::farfield_real_inner(model.grid(), images[a], images[b]);
    h_ = 0.5 * (h_ + h_.transpose().eval());
    Eigen::FullPivLU<Eigen::Matrix3d> lu(h_);
    if (!lu.isInvertible()) throw Error(ErrorKind::FactorizationFailed, "translation block of DF is singular");
    h_inv_ = lu.inverse();
}

VertexField NormalSystem::apply(const VertexField& v) const
{
    const Eigen::MatrixXcd dv = model_.apply_DF(v);
    return VertexField(model_.apply_DF_adjoint(dv) + alpha_ * metric_.apply(v));
}

VertexField NormalSystem::precondition(const VertexField& r) const
{
    VertexField out = precond_.apply(r) / alpha_;
    const Vec3 shift = h_inv_ * r.colwise().sum().transpose();
    out.rowwise() += shift.transpose();
    return out;
}

VertexField objective_gradient(const ForwardModel& model, const Eigen::MatrixXcd& residual, double alpha,
                               const VertexField& energy_gradient)
{
    return VertexField(model.apply_DF_adjoint(residual) + alpha * energy_gradient);
}

Direction gauss_newton_direction(const NormalSystem& system, const VertexField& objective_grad,
                                 const DirectionOptions& options)
{
    const Eigen::VectorXd rhs = -flatten(objective_grad);
    const krylov::VectorOperator<double> op = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        VertexField y = system.apply(unflatten(in));
        out = flatten(y);
    };
    const krylov::VectorOperator<double> pc = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        VertexField y = system.precondition(unflatten(in));
        out = flatten(y);
    };
    auto res = krylov::gmres<double>(op, rhs, {options.tol, options.max_iterations}, &pc);

    Direction d;
    d.v = unflatten(res.x);
    d.report = std::move(res.report);
    d.slope = -rhs.dot(res.x);
    if (d.slope > 0.0) {
        d.fallback = true;
        d.v = -system.precondition(objective_grad);
        d.slope = (objective_grad.array() * d.v.array()).sum();
    }
    return d;
}

LineSearchResult line_search(const mesh::TriangleMesh& mesh, const VertexField& v, double objective0, double slope,
                             const TrialObjective& objective, const LineSearchOptions& options)
{
    LineSearchResult out;
    mesh::CcdOptions ccd;
    ccd.horizon = 1.0 / options.ccd_fraction;
    out.max_step = mesh::ccd_max_step(mesh, v, ccd);
    double t = std::isfinite(out.max_step) ? std::min(1.0, options.ccd_fraction * out.max_step) : 1.0;
    while (t >= options.min_step) {
        ++out.trials;
        std::optional<double> value;
        try {
            value = objective(mesh.with_positions(mesh.positions() + t * v), t);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateFace) throw;
        }
        if (value && std::isfinite(*value) && *value <= objective0 + options.sigma * t * slope) {
            out.step = t;
            out.objective = *value;
            return out;
        }
        t *= options.backtrack;
    }
    throw Error(ErrorKind::StepTooSmall, "line search step fell below " + std::to_string(options.min_step) +
                                             " after " + std::to_string(out.trials) + " trials");
}

} // namespace scatter::inverse
