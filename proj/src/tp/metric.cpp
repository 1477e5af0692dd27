#include "scatter/tp/metric.hpp"

#include "scatter/error.hpp"

#include <cmath>

namespace scatter::tp {

namespace {

/// Dense graph Laplacian diag(rowsum W) - W of the symmetric face weights W.
void to_laplacian(Eigen::MatrixXd& w)
{
    w.diagonal().setZero();
    const Eigen::VectorXd rows = w.rowwise().sum();
    w = -w;
    w.diagonal() = rows;
}

Eigen::SparseMatrix<double> averaging(const mesh::TriangleMesh& mesh)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t < mesh.face_count(); ++t)
        for (int v : mesh.triangles()[t]) trip.emplace_back(t, v, 1.0 / 3.0);
    Eigen::SparseMatrix<double> s(mesh.face_count(), mesh.vertex_count());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

/// Symmetric face weights a_t a_s / |m_s - m_t|^exponent, zero diagonal.
Eigen::MatrixXd distance_weights(const mesh::TriangleMesh& mesh, double exponent)
{
    const int nf = mesh.face_count();
    const auto& m = mesh.barycenters();
    const auto& a = mesh.areas();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nf, nf);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nf; ++t)
        for (int s = 0; s < nf; ++s)
            if (s != t) w(s, t) = a[t] * a[s] * std::pow((m.row(s) - m.row(t)).squaredNorm(), -0.5 * exponent);
    return w;
}

} // namespace

std::vector<Eigen::Matrix3d> hat_gradients(const mesh::TriangleMesh& mesh)
{
    std::vector<Eigen::Matrix3d> out(mesh.face_count());
    const auto& x = mesh.positions();
    for (int t = 0; t < mesh.face_count(); ++t) {
        const Tri& tri = mesh.triangles()[t];
        const Vec3 nu = mesh.normals().row(t).transpose();
        const double twice_area = 2.0 * mesh.areas()[t];
        for (int k = 0; k < 3; ++k) {
            const Vec3 e = x.row(tri[(k + 2) % 3]) - x.row(tri[(k + 1) % 3]);
            out[t].row(k) = nu.cross(e).transpose() / twice_area;
        }
    }
    return out;
}

MetricOperator::MetricOperator(const mesh::TriangleMesh& mesh, const EnergyParams& params)
{
    params.validate();
    const int nf = mesh.face_count(), nv = mesh.vertex_count();
    const double s = params.s(), p = params.p;

    // Fractional part on face differentials: weights a_t a_s / |d|^(2s).
    Eigen::MatrixXd lap = distance_weights(mesh, 2.0 * s);
    to_laplacian(lap);
    const auto grads = hat_gradients(mesh);
    k_ = Eigen::MatrixXd::Zero(nv, nv);
    for (int c = 0; c < 3; ++c) {
        std::vector<Eigen::Triplet<double>> trip;
        for (int t = 0; t < nf; ++t)
            for (int k = 0; k < 3; ++k) trip.emplace_back(t, mesh.triangles()[t][k], grads[t](k, c));
        Eigen::SparseMatrix<double> g(nf, nv);
        g.setFromTriplets(trip.begin(), trip.end());
        const Eigen::MatrixXd lg = lap * g;
        k_.noalias() += 2.0 * (g.transpose() * lg);
    }

    // Curvature-weighted part on face averages: ordered weights
    // |<nu_t, d>|^p / |d|^(sp) * a_t a_s / |d|^4, symmetrised.
    const auto& m = mesh.barycenters();
    const auto& n = mesh.normals();
    const auto& a = mesh.areas();
    lap.setZero();
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nf; ++t)
        for (int u = 0; u < nf; ++u) {
            if (u == t) continue;
            const Vec3 d = (m.row(u) - m.row(t)).transpose();
            const double r2 = d.squaredNorm();
            lap(u, t) = std::pow(std::abs(n.row(t).dot(d)), p) * std::pow(r2, -0.5 * s * p - 2.0) * a[t] * a[u];
        }
    lap = lap + lap.transpose().eval();
    to_laplacian(lap);
    const Eigen::SparseMatrix<double> avg = averaging(mesh);
    const Eigen::MatrixXd la = lap * avg;
    k_.noalias() += avg.transpose() * la;
    k_ = 0.5 * (k_ + k_.transpose().eval());
}

VertexField MetricOperator::apply(const VertexField& u) const
{
    return VertexField(k_ * u);
}

Eigen::VectorXd MetricOperator::apply_flat(const Eigen::VectorXd& u) const
{
    VertexField out = apply(unflatten(u));
    return flatten(out);
}

double MetricOperator::pair(const VertexField& u, const VertexField& w) const
{
    return (u.transpose() * k_ * w).trace();
}

Preconditioner::Preconditioner(const mesh::TriangleMesh& mesh, const EnergyParams& params)
{
    params.validate();
    mass_ = mesh::mass_matrix(mesh);
    Eigen::SparseMatrix<double> lap = mesh::cotan_laplacian(mesh, true);
    double trace_l = 0.0, trace_m = 0.0;
    for (int i = 0; i < lap.rows(); ++i) {
        trace_l += lap.coeff(i, i);
        trace_m += mass_.coeff(i, i);
    }
    const Eigen::SparseMatrix<double> shifted = lap + (1e-6 * trace_l / trace_m) * mass_;
    factor_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(shifted);
    if (factor_->info() != Eigen::Success)
        throw Error(ErrorKind::FactorizationFailed, "factorisation of the shifted Laplacian failed");

    // The order 2 - s form is evaluated on vertex values with lumped masses: face
    // averages have near-null checkerboard modes that would make B nearly singular.
    const int nv = mesh.vertex_count();
    const Eigen::VectorXd lumped = mass_ * Eigen::VectorXd::Ones(nv);
    const auto& x = mesh.positions();
    const double exponent = 2.0 * (2.0 - params.s()) + 2.0;
    b_ = Eigen::MatrixXd::Zero(nv, nv);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nv; ++i)
            if (i != j) b_(i, j) = lumped[i] * lumped[j] * std::pow((x.row(i) - x.row(j)).squaredNorm(), -0.5 * exponent);
    to_laplacian(b_);
    b_ *= 2.0;
    b_ = 0.5 * (b_ + b_.transpose().eval());
}

Eigen::VectorXd Preconditioner::apply_scalar(const Eigen::VectorXd& r) const
{
    Eigen::MatrixXd y = factor_->solve(r);
    y.array() -= y.mean();
    return factor_->solve(Eigen::MatrixXd(b_ * y)).col(0);
}

VertexField Preconditioner::apply(const VertexField& r) const
{
    Eigen::MatrixXd y = factor_->solve(Eigen::MatrixXd(r));
    // B kills constants, and the weakly shifted solve leaves a large constant
    // component whose roundoff would otherwise break the symmetry of the sandwich.
    y.rowwise() -= y.colwise().mean();
    return VertexField(factor_->solve(Eigen::MatrixXd(b_ * y)));
}

Eigen::VectorXd Preconditioner::apply_flat(const Eigen::VectorXd& r) const
{
    VertexField out = apply(unflatten(r));
    return flatten(out);
}

} // namespace scatter::tp
