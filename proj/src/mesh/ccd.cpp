#include "scatter/mesh/ccd.hpp"

#include "scatter/error.hpp"
#include "scatter/mesh/bvh.hpp"
#include "scatter/mesh/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scatter::mesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Distance used to decide contact between two faces. Faces sharing vertices
/// are compared on the features they do not share, since their full distance
/// is identically zero.
class PairDistance {
public:
    PairDistance(const Tri& a, const Tri& b) : a_(a), b_(b)
    {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (a[i] == b[j]) {
                    shared_a_[shared_] = i;
                    shared_b_[shared_] = j;
                    ++shared_;
                }
    }

    int shared() const { return shared_; }

    double operator()(const VertexField& x) const
    {
        Vec3 ta[3], tb[3];
        for (int k = 0; k < 3; ++k) {
            ta[k] = x.row(a_[k]).transpose();
            tb[k] = x.row(b_[k]).transpose();
        }
        if (shared_ == 0) return triangle_triangle_distance(ta, tb);
        if (shared_ == 1) {
            // Rotate so the shared vertex comes first.
            const int i = shared_a_[0], j = shared_b_[0];
            const Vec3 a1 = ta[(i + 1) % 3], a2 = ta[(i + 2) % 3];
            const Vec3 b1 = tb[(j + 1) % 3], b2 = tb[(j + 2) % 3];
            return std::min(segment_triangle_distance(a1, a2, tb[0], tb[1], tb[2]),
                            segment_triangle_distance(b1, b2, ta[0], ta[1], ta[2]));
        }
        if (shared_ == 2) {
            const int oa = 3 - shared_a_[0] - shared_a_[1];
            const int ob = 3 - shared_b_[0] - shared_b_[1];
            const Vec3& p = ta[shared_a_[0]];
            const Vec3& q = ta[shared_a_[1]];
            const Vec3& c = ta[oa];
            const Vec3& d = tb[ob];
            double r = std::min(point_triangle_distance(c, tb[0], tb[1], tb[2]),
                                point_triangle_distance(d, ta[0], ta[1], ta[2]));
            r = std::min(r, segment_segment_distance(p, c, q, d));
            r = std::min(r, segment_segment_distance(q, c, p, d));
            return r;
        }
        return kInf;
    }

    /// Bound on how fast the pair distance can shrink per unit t.
    double closing_speed(const VertexField& dir) const
    {
        double l = 0.0;
        for (int i : a_)
            for (int j : b_) l = std::max(l, (dir.row(i) - dir.row(j)).norm());
        return l;
    }

private:
    Tri a_, b_;
    int shared_ = 0;
    int shared_a_[3] = {0, 0, 0};
    int shared_b_[3] = {0, 0, 0};
};

Box face_box(const VertexField& x, const Tri& t)
{
    Box b;
    b.setEmpty();
    for (int k : t) b.extend(Vec3(x.row(k).transpose()));
    return b;
}

} // namespace

double ccd_max_step(const TriangleMesh& mesh, const VertexField& direction, const CcdOptions& options)
{
    if (direction.rows() != mesh.vertex_count())
        throw Error(ErrorKind::ShapeMismatch, "direction length differs from vertex count");
    const double vmax = direction.rowwise().norm().maxCoeff();
    if (!(vmax > 0.0)) return kInf;

    const VertexField& x0 = mesh.positions();
    const double margin = options.margin_factor * mesh.mean_edge_length();
    double horizon = options.horizon;
    if (!(horizon > 0.0)) {
        const Vec3 extent = x0.colwise().maxCoeff() - x0.colwise().minCoeff();
        horizon = 10.0 * extent.norm() / vmax;
    }

    const VertexField x1 = x0 + horizon * direction;
    std::vector<Box> boxes(mesh.face_count());
    for (int t = 0; t < mesh.face_count(); ++t) {
        Box b = face_box(x0, mesh.triangles()[t]);
        b.extend(face_box(x1, mesh.triangles()[t]));
        b.min().array() -= margin;
        b.max().array() += margin;
        boxes[t] = b;
    }
    const Bvh bvh(std::move(boxes));

    double best = horizon;
    bool bounded = false;
    VertexField x(x0.rows(), 3);
    for (const auto& [fa, fb] : bvh.self_overlaps()) {
        const PairDistance dist(mesh.triangles()[fa], mesh.triangles()[fb]);
        if (dist.shared() == 3) continue;
        const double d0 = dist(x0);
        if (d0 <= 0.0)
            throw Error(ErrorKind::AlreadyIntersecting,
                        "faces " + std::to_string(fa) + " and " + std::to_string(fb) + " intersect");
        const double speed = dist.closing_speed(direction);
        if (!(speed > 0.0)) continue;

        double t = 0.0;
        double d = d0;
        for (int step = 0; step < options.max_advancement_steps; ++step) {
            if (d <= margin) break;
            t += (d - margin) / speed;
            if (t >= best) break;
            x = x0 + t * direction;
            d = dist(x);
        }
        if (t < best) {
            best = t;
            bounded = true;
        }
    }
    return bounded ? best : kInf;
}

bool self_intersects(const TriangleMesh& mesh)
{
    std::vector<Box> boxes(mesh.face_count());
    for (int t = 0; t < mesh.face_count(); ++t) boxes[t] = face_box(mesh.positions(), mesh.triangles()[t]);
    const Bvh bvh(std::move(boxes));
    for (const auto& [fa, fb] : bvh.self_overlaps()) {
        const PairDistance dist(mesh.triangles()[fa], mesh.triangles()[fb]);
        if (dist.shared() < 3 && dist(mesh.positions()) <= 0.0) return true;
    }
    return false;
}

} // namespace scatter::mesh
