#include "doctest.h"

#include "support.hpp"

#include "scatter/error.hpp"
#include "scatter/inverse/irgnm.hpp"
#include "scatter/mesh/ccd.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace scatter;
using namespace scatter::inverse;
using testing_support::random_field;
using testing_support::scratch_dir;

namespace {

constexpr double kPi = std::numbers::pi;

bem::WaveSet two_waves() { return bem::WaveSet::single(2.0, {Vec3(0, 0, 1), Vec3(1, 0, 0)}); }

ModelOptions tight(double tol)
{
    ModelOptions o;
    o.forward.tol = tol;
    o.derivative.tol = tol;
    return o;
}

mesh::TriangleMesh ellipsoid(int level) { return mesh::scaled(mesh::icosphere(level), Vec3(1.3, 1.0, 0.8)); }

/// Smooth deformation field: a low-order polynomial of the vertex position.
VertexField smooth_field(const mesh::TriangleMesh& m)
{
    VertexField v(m.vertex_count(), 3);
    for (int i = 0; i < m.vertex_count(); ++i) {
        const Vec3 x = m.vertex(i);
        v.row(i) = Vec3(0.3 * x.y() * x.z() + 0.1, x.x() * x.x() - 0.2 * x.z(), 0.5 * x.x() * x.y() + x.z()).transpose();
    }
    return v;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::MatrixXcd random_cblock(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = testing_support::random_cvector(rows, rng);
    return m;
}

} // namespace

TEST_CASE("shape derivative of zero")
{
    const auto m = ellipsoid(1);
    const auto grid = bem::EvalGrid::icosphere(1);
    const ForwardModel model(m, two_waves(), grid, {});
    CHECK(model.apply_DF(VertexField::Zero(m.vertex_count(), 3)).norm() == 0.0);
    CHECK(model.apply_DF_adjoint(Eigen::MatrixXcd::Zero(grid.size(), 2)).norm() == 0.0);
}

namespace {

/// Relative gap between DF xi and the exact derivative i kappa <xi, d - z> F of
/// the translated far field.
double translation_gap(const mesh::TriangleMesh& m, double tol)
{
    const auto grid = bem::EvalGrid::icosphere(2);
    const auto waves = two_waves();
    const ForwardModel model(m, waves, grid, tight(tol));
    const Vec3 xi(0.3, -0.2, 0.5);
    VertexField v(m.vertex_count(), 3);
    v.rowwise() = xi.transpose();
    Eigen::MatrixXcd expected = model.far_field();
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < grid.size(); ++i) {
            const Vec3 z = grid.points.row(i).transpose();
            expected(i, c) *= cplx(0.0, 2.0 * xi.dot(waves.groups[0].directions[c] - z));
        }
    return bem::farfield_norm(grid, model.apply_DF(v) - expected) / bem::farfield_norm(grid, expected);
}

/// Relative gap between a forward difference of the discrete far field and DF v.
double forward_difference_gap(const mesh::TriangleMesh& m, double h)
{
    const auto grid = bem::EvalGrid::icosphere(2);
    const auto waves = two_waves();
    const auto opt = tight(1e-11);
    const ForwardModel model(m, waves, grid, opt);
    const VertexField v = smooth_field(m);
    const double hs = h * m.diameter() / v.cwiseAbs().maxCoeff();
    const auto moved = bem::forward_far_field(m.with_positions(m.positions() + hs * v), waves, grid, opt.forward);
    const Eigen::MatrixXcd dv = model.apply_DF(v);
    return bem::farfield_norm(grid, (moved.values - model.far_field()) / hs - dv) / bem::farfield_norm(grid, dv);
}

} // namespace

TEST_CASE("shape derivative of a translation converges to the covariance identity")
{
    std::vector<double> gap;
    for (int level : {1, 2, 3}) {
        gap.push_back(translation_gap(ellipsoid(level), 1e-10));
        MESSAGE("level " << level << ": translation derivative gap " << gap.back());
    }
    CHECK(gap[0] / gap[1] >= 1.6);
    CHECK(gap[1] / gap[2] >= 1.6);
}

// DF discretises the continuous derivative with the computed normal derivative,
// so it matches the exact derivative of the discrete map only up to the
// discretisation error (4% at level 2), not to solver tolerance.
TEST_CASE("shape derivative of a translation equals the covariance identity to solver tolerance" *
          doctest::should_fail())
{
    const double tol = 1e-6;
    CHECK(translation_gap(ellipsoid(2), tol) <= 2 * tol);
}

TEST_CASE("forward differences approach the shape derivative up to discretisation error")
{
    // On a fixed mesh the forward difference converges (its own O(h) term
    // vanishes) to a plateau, and the plateau shrinks under refinement.
    const auto m2 = ellipsoid(2);
    const double a = forward_difference_gap(m2, 1e-2), b = forward_difference_gap(m2, 1e-3),
                 c = forward_difference_gap(m2, 1e-4);
    MESSAGE("level 2 gaps: " << a << ", " << b << ", " << c);
    CHECK(std::abs(b - c) < 0.2 * std::abs(a - b));
    const double fine = forward_difference_gap(ellipsoid(3), 1e-4);
    MESSAGE("level 3 gap: " << fine);
    CHECK(c / fine >= 1.6);
}

TEST_CASE("forward-difference error decreases like h over h in {1e-2, 1e-3}" * doctest::should_fail())
{
    const auto m = ellipsoid(2);
    CHECK(forward_difference_gap(m, 1e-2) / forward_difference_gap(m, 1e-3) >= 5.0);
}

TEST_CASE("adjoint consistency")
{
    const auto m = mesh::icosphere(2);
    const auto grid = bem::EvalGrid::icosphere(2);
    bem::WaveSet waves;
    waves.groups = {{kPi, kPi, {Vec3(0, 0, 1), Vec3(1, 0, 0)}}, {2.0, 1.0, {Vec3(0, 1, 0)}}};
    std::mt19937_64 rng(21);
    for (double tol : {1e-2, 1e-8}) {
        const ForwardModel model(m, waves, grid, tight(tol));
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const VertexField v = random_field(m.vertex_count(), rng);
            const Eigen::MatrixXcd y = random_cblock(grid.size(), 3, rng);
            const Eigen::MatrixXcd dv = model.apply_DF(v);
            const double lhs = bem::farfield_real_inner(grid, dv, y);
            const double rhs = (v.array() * model.apply_DF_adjoint(y).array()).sum();
            const double scale = bem::farfield_norm(grid, dv) * bem::farfield_norm(grid, y);
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
            CHECK(std::abs(lhs - rhs) <= 10.0 * (2 * tol) * scale);
        }
        MESSAGE("tol " << tol << ": worst relative adjoint gap " << worst);
    }
}

TEST_CASE("derivative and adjoint are linear")
{
    const auto m = mesh::icosphere(2);
    const auto grid = bem::EvalGrid::icosphere(1);
    const ForwardModel model(m, two_waves(), grid, {});
    std::mt19937_64 rng(22);
    const VertexField v = random_field(m.vertex_count(), rng);
    const Eigen::MatrixXcd y = random_cblock(grid.size(), 2, rng);
    const Eigen::MatrixXcd dv = model.apply_DF(v);
    CHECK((model.apply_DF(2.0 * v) - 2.0 * dv).norm() <= 1e-12 * dv.norm());
    const VertexField ay = model.apply_DF_adjoint(y);
    CHECK((model.apply_DF_adjoint(2.0 * y) - 2.0 * ay).norm() <= 1e-12 * ay.norm());
}

TEST_CASE("Gauss-Newton direction vanishes at a critical point with zero residual")
{
    const auto m = mesh::icosphere(1);
    const auto grid = bem::EvalGrid::icosphere(1);
    const ForwardModel model(m, two_waves(), grid, {});
    const tp::EnergyParams params;
    const tp::MetricOperator metric(m, params);
    const tp::Preconditioner precond(m, params);
    const NormalSystem system(model, metric, precond, 1.0);
    const auto d = gauss_newton_direction(system, VertexField::Zero(m.vertex_count(), 3), {});
    CHECK(d.v.norm() == 0.0);
    CHECK_FALSE(d.fallback);
}

TEST_CASE("with a dominant regulariser the direction follows the Sobolev energy descent")
{
    const auto m = ellipsoid(1);
    const auto grid = bem::EvalGrid::icosphere(1);
    const ForwardModel model(m, two_waves(), grid, {});
    std::mt19937_64 rng(31);
    const Eigen::MatrixXcd residual = random_cblock(grid.size(), 2, rng);
    const tp::EnergyParams params;
    const auto eg = tp::tp_energy_gradient(m, params);
    const VertexField data_grad = model.apply_DF_adjoint(residual);
    const double alpha = 1e6 * data_grad.norm() / eg.gradient.norm();

    const tp::MetricOperator metric(m, params);
    const tp::Preconditioner precond(m, params);
    const NormalSystem system(model, metric, precond, alpha);
    const auto d = gauss_newton_direction(system, objective_gradient(model, residual, alpha, eg.gradient), {1e-6, 500});
    CHECK(d.report.converged);

    // Independent route: dense pseudo-inverse of the scalar metric, whose kernel
    // is the constants, applied to each coordinate of -grad E.
    const Eigen::MatrixXd& k = metric.scalar_matrix();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(k.rows(), k.cols());
    const Eigen::MatrixXd expected = (k + ones).ldlt().solve(-eg.gradient);
    VertexField v = d.v;
    v.rowwise() -= v.colwise().mean();
    const double cosine = (v.array() * expected.array()).sum() / (v.norm() * expected.norm());
    MESSAGE("angle to the Sobolev descent direction: " << std::acos(std::min(1.0, cosine)) * 180 / kPi << " degrees");
    CHECK(cosine >= std::cos(5.0 * kPi / 180.0));
}

namespace {

VertexField uniform_field(int rows, const Vec3& value)
{
    VertexField v(rows, 3);
    v.rowwise() = value.transpose();
    return v;
}

} // namespace

TEST_CASE("line search accepts the full step on a quadratic without collisions")
{
    const auto m = mesh::icosphere(1);
    const VertexField v = uniform_field(m.vertex_count(), Vec3(1, 0, 0));
    int calls = 0;
    const TrialObjective quad = [&](const mesh::TriangleMesh&, double t) -> std::optional<double> {
        ++calls;
        return (t - 1.0) * (t - 1.0) - 1.0;
    };
    const auto ls = line_search(m, v, 0.0, -2.0, quad);
    CHECK(std::isinf(ls.max_step));
    CHECK(ls.step == 1.0);
    CHECK(ls.trials == 1);
    CHECK(calls == 1);
}

TEST_CASE("line search stays below the first contact")
{
    // The unit icosphere's extreme x features are edges parallel to z through
    // y = 0, so the spheres below touch exactly when the right one has moved by 1.
    const auto a = mesh::icosphere(1);
    const double extent = a.positions().col(0).maxCoeff();
    const auto m = mesh::merged(a, mesh::translated(a, Vec3(2 * extent + 1.0, 0, 0)));
    VertexField v = VertexField::Zero(m.vertex_count(), 3);
    v.bottomRows(a.vertex_count()).col(0).setConstant(-2.0);
    const TrialObjective decreasing = [](const mesh::TriangleMesh&, double t) -> std::optional<double> { return -t; };
    const auto ls = line_search(m, v, 0.0, -1.0, decreasing);
    CHECK(ls.max_step <= 0.5 + 1e-9);
    CHECK(ls.step < 0.5);
    CHECK_FALSE(mesh::self_intersects(m.with_positions(m.positions() + ls.step * v)));
}

TEST_CASE("line search with zero Armijo parameter accepts any decrease")
{
    const auto m = mesh::icosphere(1);
    const VertexField v = uniform_field(m.vertex_count(), Vec3(0, 1, 0));
    const TrialObjective slight = [](const mesh::TriangleMesh&, double t) -> std::optional<double> {
        return -1e-12 * t;
    };
    LineSearchOptions opts;
    opts.sigma = 0.0;
    CHECK(line_search(m, v, 0.0, -1.0, slight, opts).step == 1.0);
    opts.sigma = 1e-4;
    CHECK_THROWS_WITH_AS(line_search(m, v, 0.0, -1.0, slight, opts), doctest::Contains("line search"), Error);
}

TEST_CASE("line search reports a step that is too small")
{
    const auto m = mesh::icosphere(1);
    const VertexField v = uniform_field(m.vertex_count(), Vec3(0, 0, 1));
    const TrialObjective rising = [](const mesh::TriangleMesh&, double t) -> std::optional<double> { return t; };
    try {
        line_search(m, v, 0.0, -1.0, rising);
        FAIL("expected StepTooSmall");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepTooSmall);
    }
}

TEST_CASE("line search treats degenerate and inadmissible trials as failures")
{
    const auto m = mesh::icosphere(1);
    const VertexField v = uniform_field(m.vertex_count(), Vec3(0, 0, 1));
    const TrialObjective guarded = [](const mesh::TriangleMesh&, double t) -> std::optional<double> {
        if (t > 0.3) throw Error(ErrorKind::DegenerateFace, "collapsed face");
        if (t > 0.2) return std::nullopt;
        return -t;
    };
    const auto ls = line_search(m, v, 0.0, -1.0, guarded);
    CHECK(ls.step == 0.125);
    CHECK(ls.trials == 4);
}

TEST_CASE("noisy data has the requested relative noise level and is reproducible")
{
    const auto truth = ellipsoid(1);
    const auto grid = bem::EvalGrid::icosphere(1);
    const auto waves = two_waves();
    const auto clean = make_noisy_data(truth, waves, grid, 0.0, 5);
    REQUIRE(clean.delta.has_value());
    CHECK(*clean.delta == 0.0);
    CHECK(clean.values == bem::forward_far_field(truth, waves, grid, {}).values);

    const auto noisy = make_noisy_data(truth, waves, grid, 1.0, 5);
    const double norm = bem::farfield_norm(grid, clean.values);
    CHECK(std::abs(*noisy.delta / norm - 0.01) <= 1e-12);
    CHECK(std::abs(bem::farfield_norm(grid, noisy.values - clean.values) - *noisy.delta) <= 1e-12 * norm);

    const auto again = make_noisy_data(truth, waves, grid, 1.0, 5);
    CHECK(again.values == noisy.values);
    CHECK(*again.delta == *noisy.delta);
    CHECK(make_noisy_data(truth, waves, grid, 1.0, 6).values != noisy.values);
    CHECK_THROWS_AS(make_noisy_data(truth, waves, grid, -1.0, 5), Error);
}

TEST_CASE("wavenumber selection keeps matching columns and scales the noise level")
{
    bem::FarField data;
    data.grid = bem::EvalGrid::icosphere(0);
    data.waves.groups = {{1.0, 1.0, {Vec3(0, 0, 1)}}, {2.0, 2.0, {Vec3(1, 0, 0), Vec3(0, 1, 0)}}};
    data.values = Eigen::MatrixXcd::Zero(data.grid.size(), 3);
    data.values.col(0).setConstant(cplx(3.0, 0.0));
    data.values.col(1).setConstant(cplx(0.0, 4.0));
    data.delta = 0.5;
    const auto high = select_wavenumbers(data, {2.0});
    REQUIRE(high.waves.groups.size() == 1);
    CHECK(high.waves.groups[0].directions.size() == 2);
    CHECK(high.values.col(0) == data.values.col(1));
    CHECK(high.values.col(1) == data.values.col(2));
    CHECK(*high.delta == doctest::Approx(0.5 * 4.0 / 5.0).epsilon(1e-14));
    CHECK_THROWS_AS(select_wavenumbers(data, {3.0}), Error);
}

TEST_CASE("configuration validation")
{
    const auto rejects = [](auto mutate) {
        GNConfig c;
        mutate(c);
        try {
            c.validate();
        } catch (const Error& e) {
            return e.kind() == ErrorKind::ConfigError;
        }
        return false;
    };
    CHECK_NOTHROW(GNConfig{}.validate());
    CHECK(rejects([](GNConfig& c) { c.rho = 1.0; }));
    CHECK(rejects([](GNConfig& c) { c.rho = 0.0; }));
    CHECK(rejects([](GNConfig& c) { c.tau = 1.0; }));
    CHECK(rejects([](GNConfig& c) { c.alpha0 = 0.0; }));
    CHECK(rejects([](GNConfig& c) { c.sigma = 1.0; }));
    CHECK(rejects([](GNConfig& c) { c.tol_derivative = 1e-8; }));
    CHECK(rejects([](GNConfig& c) { c.max_iterations = -1; }));
    CHECK(rejects([](GNConfig& c) { c.energy.p = 4.0; }));
    CHECK(rejects([](GNConfig& c) { c.stages = {{}}; }));
}

namespace {

bem::FarField exact_data(const mesh::TriangleMesh& truth, double delta)
{
    auto data = bem::forward_far_field(truth, two_waves(), bem::EvalGrid::icosphere(1), {});
    data.delta = delta;
    return data;
}

} // namespace

TEST_CASE("reconstruction stops at once when the start already explains the data")
{
    const auto start = mesh::icosphere(1);
    GNConfig cfg;
    const auto state = irgnm_run(start, exact_data(start, 1e-3), cfg);
    CHECK(state.stop == StopReason::Discrepancy);
    CHECK(state.k == 0);
    REQUIRE(state.history.size() == 1);
    CHECK(state.history[0].residual < cfg.tau * 1e-3);
    CHECK(state.mesh.positions() == start.positions());
}

TEST_CASE("reconstruction with no iteration budget stops on the budget")
{
    GNConfig cfg;
    cfg.max_iterations = 0;
    const auto state = irgnm_run(mesh::icosphere(1), exact_data(ellipsoid(1), 1e-3), cfg);
    CHECK(state.stop == StopReason::IterationBudget);
    CHECK(to_string(state.stop) == "iteration budget");
    CHECK(state.history.size() == 1);
}

TEST_CASE("reconstruction history, run directory and determinism")
{
    GNConfig cfg;
    cfg.alpha0 = 0.1;
    cfg.max_iterations = 3;
    cfg.eta = 0.0;
    const auto data = exact_data(ellipsoid(1), 1e-6);
    const auto dir = scratch_dir("irgnm_run");
    RunOutput out{dir / "a", "{\"schema_version\": 1}", true};
    const auto state = irgnm_run(mesh::icosphere(1), data, cfg, &out);
    CHECK(state.stop == StopReason::IterationBudget);
    REQUIRE(state.history.size() == 4);
    int decreasing = 0;
    for (std::size_t k = 0; k < state.history.size(); ++k) {
        const auto& r = state.history[k];
        CHECK(r.k == static_cast<int>(k));
        CHECK(std::abs(r.alpha - cfg.alpha0 * std::pow(cfg.rho, static_cast<double>(k))) <= 1e-15 * r.alpha);
        if (k + 1 < state.history.size()) {
            CHECK(r.step_taken);
            CHECK(r.slope < 0.0);
            CHECK(r.step < r.max_step);
            CHECK(r.energy_bound);
            decreasing += state.history[k + 1].residual <= r.residual;
        }
    }
    CHECK(decreasing >= 0.9 * 3);
    for (const char* f : {"history.csv", "timing.csv", "stop_reason.txt", "config.json", "final.obj", "iter_0000.obj",
                          "iter_0003.obj"})
        CHECK_MESSAGE(std::filesystem::exists(dir / "a" / f), f);
    CHECK(slurp(dir / "a" / "stop_reason.txt").rfind("iteration budget\n", 0) == 0);
    CHECK(slurp(dir / "a" / "config.json") == "{\"schema_version\": 1}");

    RunOutput again{dir / "b", "", false};
    irgnm_run(mesh::icosphere(1), data, cfg, &again);
    CHECK(slurp(dir / "a" / "history.csv") == slurp(dir / "b" / "history.csv"));
    CHECK_FALSE(std::filesystem::exists(dir / "b" / "iter_0000.obj"));
}

TEST_CASE("reconstruction rejects an intersecting start")
{
    const auto a = mesh::icosphere(1);
    const auto bad = mesh::merged(a, mesh::translated(a, Vec3(0.5, 0, 0)));
    CHECK_THROWS_AS(irgnm_run(bad, exact_data(a, 1e-3), GNConfig{}), Error);
}
