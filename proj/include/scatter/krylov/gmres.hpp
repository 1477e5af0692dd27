#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace scatter::krylov {

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    /// Arnoldi produced a zero vector before the tolerance was met.
    bool breakdown = false;
    /// Residual estimate after each iteration (starts with 1).
    std::vector<double> history;
};

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Maps a block of column vectors to a block of the same shape.
template <class Scalar>
using BlockOperator = std::function<void(const Block<Scalar>& in, Block<Scalar>& out)>;

template <class Scalar>
using VectorOperator = std::function<void(const Vector<Scalar>& in, Vector<Scalar>& out)>;

struct GmresOptions {
    double tol = 1e-6;
    int max_iterations = 500;
};

template <class Scalar>
struct BlockResult {
    Block<Scalar> x;
    std::vector<SolveReport> reports;
};

template <class Scalar>
struct Result {
    Vector<Scalar> x;
    SolveReport report;
};

namespace detail {

template <class Scalar>
struct Givens {
    double c = 1.0;
    Scalar s = Scalar(0);

    static Givens make(Scalar a, Scalar b)
    {
        using std::abs;
        Givens g;
        const double aa = abs(a), ab = abs(b);
        if (ab == 0.0) return g;
        if (aa == 0.0) {
            g.c = 0.0;
            g.s = Scalar(1);
            return g;
        }
        const double t = std::hypot(aa, ab);
        g.c = aa / t;
        g.s = (a / aa) * Eigen::numext::conj(b) / t;
        return g;
    }

    void apply(Scalar& a, Scalar& b) const
    {
        const Scalar na = c * a + s * b;
        b = -Eigen::numext::conj(s) * a + c * b;
        a = na;
    }
};

/// Arnoldi process and least-squares state of one right-hand side.
template <class Scalar>
struct Column {
    std::vector<Vector<Scalar>> basis;
    std::vector<Vector<Scalar>> hess; // column j has j + 2 entries
    std::vector<Givens<Scalar>> rot;
    std::vector<Scalar> g;
    double beta = 0.0;
    bool done = false;
    SolveReport report;

    Vector<Scalar> combination(int k) const
    {
        // Back substitution on the rotated Hessenberg system.
        std::vector<Scalar> y(k);
        for (int i = k - 1; i >= 0; --i) {
            Scalar sum = g[i];
            for (int j = i + 1; j < k; ++j) sum -= hess[j][i] * y[j];
            y[i] = sum / hess[i][i];
        }
        Vector<Scalar> out = Vector<Scalar>::Zero(basis[0].size());
        for (int i = 0; i < k; ++i) out += y[i] * basis[i];
        return out;
    }
};

} // namespace detail

/// Unrestarted GMRES with right preconditioning on every column of `rhs`.
/// Columns advance in lockstep so each iteration issues one block operator
/// application covering all unconverged columns. Orthogonalization is modified
/// Gram-Schmidt with one reorthogonalization pass. The reported residual is the
/// true relative residual of the returned iterate.
template <class Scalar>
BlockResult<Scalar> gmres_block(const BlockOperator<Scalar>& apply, const Block<Scalar>& rhs,
                                const GmresOptions& options, const BlockOperator<Scalar>* precond = nullptr)
{
    const Eigen::Index n = rhs.rows();
    const int ncols = static_cast<int>(rhs.cols());
    std::vector<detail::Column<Scalar>> cols(ncols);
    BlockResult<Scalar> result;
    result.x = Block<Scalar>::Zero(n, ncols);
    result.reports.resize(ncols);

    for (int c = 0; c < ncols; ++c) {
        auto& col = cols[c];
        col.beta = rhs.col(c).norm();
        if (col.beta == 0.0) {
            col.done = true;
            col.report.converged = true;
            col.report.history = {0.0};
            continue;
        }
        col.basis.push_back(rhs.col(c) / col.beta);
        col.g.push_back(Scalar(col.beta));
        col.report.history.push_back(1.0);
        col.report.relative_residual = 1.0;
    }

    auto active_columns = [&] {
        std::vector<int> a;
        for (int c = 0; c < ncols; ++c)
            if (!cols[c].done) a.push_back(c);
        return a;
    };

    for (int it = 0; it < options.max_iterations; ++it) {
        const std::vector<int> active = active_columns();
        if (active.empty()) break;

        Block<Scalar> v(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) v.col(k) = cols[active[k]].basis.back();
        Block<Scalar> z;
        if (precond) (*precond)(v, z);
        else z = v;
        Block<Scalar> w;
        apply(z, w);

        for (std::size_t k = 0; k < active.size(); ++k) {
            auto& col = cols[active[k]];
            Vector<Scalar> wk = w.col(k);
            const double wnorm = wk.norm();
            const int j = static_cast<int>(col.basis.size()) - 1;
            Vector<Scalar> h = Vector<Scalar>::Zero(j + 2);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) {
                    const Scalar hij = col.basis[i].dot(wk);
                    h[i] += hij;
                    wk -= hij * col.basis[i];
                }
            const double hnext = wk.norm();
            h[j + 1] = Scalar(hnext);

            for (int i = 0; i < j; ++i) col.rot[i].apply(h[i], h[i + 1]);
            const auto rot = detail::Givens<Scalar>::make(h[j], h[j + 1]);
            rot.apply(h[j], h[j + 1]);
            if (!(std::abs(h[j]) > 1e-14 * wnorm) || wnorm == 0.0) {
                // The new direction is dependent on the previous ones and the
                // projected system became singular: keep the last iterate.
                col.done = true;
                col.report.breakdown = col.report.history.back() > options.tol;
                continue;
            }
            col.rot.push_back(rot);
            col.g.push_back(Scalar(0));
            rot.apply(col.g[j], col.g[j + 1]);
            col.hess.push_back(h);

            const double est = std::abs(col.g[j + 1]) / col.beta;
            col.report.history.push_back(est);
            col.report.iterations = j + 1;

            const bool collapsed = hnext <= 1e-14 * wnorm;
            if (est <= options.tol || collapsed) {
                col.done = true;
                col.report.breakdown = collapsed && est > options.tol;
            } else {
                col.basis.push_back(wk / hnext);
            }
        }
    }

    // Assemble iterates and measure true residuals with one block application.
    std::vector<int> solved;
    for (int c = 0; c < ncols; ++c)
        if (!cols[c].hess.empty()) solved.push_back(c);
    if (!solved.empty()) {
        Block<Scalar> y(n, static_cast<Eigen::Index>(solved.size()));
        for (std::size_t k = 0; k < solved.size(); ++k) {
            auto& col = cols[solved[k]];
            y.col(k) = col.combination(static_cast<int>(col.hess.size()));
        }
        Block<Scalar> x;
        if (precond) (*precond)(y, x);
        else x = y;
        Block<Scalar> ax;
        apply(x, ax);
        for (std::size_t k = 0; k < solved.size(); ++k) {
            const int c = solved[k];
            result.x.col(c) = x.col(k);
            auto& rep = cols[c].report;
            rep.relative_residual = (rhs.col(c) - ax.col(k)).norm() / cols[c].beta;
            rep.converged = rep.relative_residual <= options.tol;
        }
    }
    for (int c = 0; c < ncols; ++c) result.reports[c] = std::move(cols[c].report);
    return result;
}

/// Single right-hand-side convenience wrapper around gmres_block.
template <class Scalar>
Result<Scalar> gmres(const VectorOperator<Scalar>& apply, const Vector<Scalar>& rhs, const GmresOptions& options,
                     const VectorOperator<Scalar>* precond = nullptr)
{
    const BlockOperator<Scalar> block_apply = [&](const Block<Scalar>& in, Block<Scalar>& out) {
        out.resize(in.rows(), in.cols());
        for (Eigen::Index c = 0; c < in.cols(); ++c) {
            Vector<Scalar> o;
            apply(in.col(c), o);
            out.col(c) = o;
        }
    };
    BlockOperator<Scalar> block_precond;
    if (precond) {
        block_precond = [&](const Block<Scalar>& in, Block<Scalar>& out) {
            out.resize(in.rows(), in.cols());
            for (Eigen::Index c = 0; c < in.cols(); ++c) {
                Vector<Scalar> o;
                (*precond)(in.col(c), o);
                out.col(c) = o;
            }
        };
    }
    Block<Scalar> b = rhs;
    auto r = gmres_block<Scalar>(block_apply, b, options, precond ? &block_precond : nullptr);
    return {r.x.col(0), std::move(r.reports[0])};
}

} // namespace scatter::krylov
