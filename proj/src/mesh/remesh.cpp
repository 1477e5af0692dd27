#include "scatter/mesh/remesh.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace scatter::mesh {

namespace {

class Editor {
public:
    explicit Editor(const TriangleMesh& mesh)
    {
        for (int i = 0; i < mesh.vertex_count(); ++i) pos_.push_back(mesh.vertex(i));
        faces_ = mesh.triangles();
        face_alive_.assign(faces_.size(), true);
        vertex_alive_.assign(pos_.size(), true);
        vf_ = mesh.topology().vertex_faces;
    }

    struct EdgeFaces {
        int f1 = -1; // contains a -> b
        int f2 = -1; // contains b -> a
        int c = -1;  // apex of f1
        int d = -1;  // apex of f2
    };

    std::vector<std::pair<int, int>> edges() const
    {
        std::vector<std::pair<int, int>> out;
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f]) continue;
            for (int k = 0; k < 3; ++k) {
                const int a = faces_[f][k], b = faces_[f][(k + 1) % 3];
                if (a < b) out.emplace_back(a, b);
            }
        }
        return out;
    }

    bool alive(int v) const { return vertex_alive_[v]; }
    double length(int a, int b) const { return (pos_[a] - pos_[b]).norm(); }

    bool edge_exists(int a, int b) const
    {
        for (int f : vf_[a])
            if (contains(f, b)) return true;
        return false;
    }

    EdgeFaces edge_faces(int a, int b) const
    {
        EdgeFaces e;
        for (int f : vf_[a]) {
            const Tri& t = faces_[f];
            for (int k = 0; k < 3; ++k) {
                if (t[k] == a && t[(k + 1) % 3] == b) {
                    e.f1 = f;
                    e.c = t[(k + 2) % 3];
                }
                if (t[k] == b && t[(k + 1) % 3] == a) {
                    e.f2 = f;
                    e.d = t[(k + 2) % 3];
                }
            }
        }
        return e;
    }

    int valence(int v) const { return static_cast<int>(vf_[v].size()); }

    std::set<int> neighbors(int v) const
    {
        std::set<int> n;
        for (int f : vf_[v])
            for (int k : faces_[f])
                if (k != v) n.insert(k);
        return n;
    }

    void split(int a, int b)
    {
        const EdgeFaces e = edge_faces(a, b);
        const int m = static_cast<int>(pos_.size());
        pos_.push_back(0.5 * (pos_[a] + pos_[b]));
        vertex_alive_.push_back(true);
        vf_.emplace_back();

        const int n1 = add_face({m, b, e.c});
        faces_[e.f1] = {a, m, e.c};
        const int n2 = add_face({m, a, e.d});
        faces_[e.f2] = {b, m, e.d};

        remove_incidence(b, e.f1);
        remove_incidence(a, e.f2);
        vf_[m] = {e.f1, e.f2};
        for (int k : faces_[n1]) vf_[k].push_back(n1);
        for (int k : faces_[n2]) vf_[k].push_back(n2);
    }

    /// Collapses b into a, moving a to the edge midpoint. Returns false if the
    /// collapse would be non-manifold, flip a face, or create a long edge.
    bool try_collapse(int a, int b, double max_len)
    {
        const EdgeFaces e = edge_faces(a, b);
        if (e.f1 < 0 || e.f2 < 0 || e.c == e.d) return false;
        std::set<int> na = neighbors(a), nb = neighbors(b);
        std::vector<int> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
        if (common.size() != 2) return false;
        if (valence(e.c) <= 3 || valence(e.d) <= 3) return false;
        if (valence(a) + valence(b) - 4 < 3) return false;

        const Vec3 p = 0.5 * (pos_[a] + pos_[b]);
        for (int n : na)
            if (n != b && (p - pos_[n]).norm() > max_len) return false;
        for (int n : nb)
            if (n != a && (p - pos_[n]).norm() > max_len) return false;

        for (int v : {a, b})
            for (int f : vf_[v]) {
                if (f == e.f1 || f == e.f2) continue;
                Tri t = faces_[f];
                const Vec3 n_old = normal(t);
                for (int& k : t)
                    if (k == a || k == b) k = -1;
                const Vec3 q0 = t[0] < 0 ? p : pos_[t[0]];
                const Vec3 q1 = t[1] < 0 ? p : pos_[t[1]];
                const Vec3 q2 = t[2] < 0 ? p : pos_[t[2]];
                const Vec3 n_new = (q1 - q0).cross(q2 - q0);
                if (n_new.norm() < 1e-12 * (q1 - q0).squaredNorm() || n_old.dot(n_new.normalized()) < 0.2)
                    return false;
            }

        for (int f : {e.f1, e.f2}) {
            face_alive_[f] = false;
            for (int k : faces_[f]) remove_incidence(k, f);
        }
        for (int f : vf_[b]) {
            for (int& k : faces_[f])
                if (k == b) k = a;
            vf_[a].push_back(f);
        }
        vf_[b].clear();
        vertex_alive_[b] = false;
        pos_[a] = p;
        return true;
    }

    bool should_flip(int a, int b) const
    {
        const EdgeFaces e = edge_faces(a, b);
        if (e.f1 < 0 || e.f2 < 0) return false;
        return angle(e.c, a, b) + angle(e.d, a, b) > std::numbers::pi + 1e-10;
    }

    bool try_flip(int a, int b)
    {
        const EdgeFaces e = edge_faces(a, b);
        if (e.c == e.d || edge_exists(e.c, e.d)) return false;
        if (valence(a) <= 3 || valence(b) <= 3) return false;
        const Vec3 n1 = normal(faces_[e.f1]), n2 = normal(faces_[e.f2]);
        if (n1.dot(n2) < 0.7) return false;
        const Tri t1 = {e.d, b, e.c};
        const Tri t2 = {e.c, a, e.d};
        const Vec3 avg = (n1 + n2).normalized();
        if (normal(t1).dot(avg) < 0.2 || normal(t2).dot(avg) < 0.2) return false;

        faces_[e.f1] = t1;
        faces_[e.f2] = t2;
        remove_incidence(a, e.f1);
        remove_incidence(b, e.f2);
        vf_[e.d].push_back(e.f1);
        vf_[e.c].push_back(e.f2);
        return true;
    }

    void smooth(int rounds)
    {
        for (int r = 0; r < rounds; ++r) {
            std::vector<Vec3> next = pos_;
            for (std::size_t v = 0; v < pos_.size(); ++v) {
                if (!vertex_alive_[v]) continue;
                const std::set<int> nbrs = neighbors(static_cast<int>(v));
                Vec3 centroid = Vec3::Zero();
                for (int n : nbrs) centroid += pos_[n];
                centroid /= static_cast<double>(nbrs.size());
                Vec3 nrm = Vec3::Zero();
                for (int f : vf_[v]) {
                    const Tri& t = faces_[f];
                    nrm += (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
                }
                nrm.normalize();
                Vec3 delta = centroid - pos_[v];
                delta -= nrm.dot(delta) * nrm;
                next[v] = pos_[v] + 0.5 * delta;
            }
            pos_ = std::move(next);
        }
    }

    TriangleMesh build() const
    {
        std::vector<int> remap(pos_.size(), -1);
        int nv = 0;
        for (std::size_t v = 0; v < pos_.size(); ++v)
            if (vertex_alive_[v]) remap[v] = nv++;
        VertexField x(nv, 3);
        for (std::size_t v = 0; v < pos_.size(); ++v)
            if (remap[v] >= 0) x.row(remap[v]) = pos_[v].transpose();
        std::vector<Tri> tris;
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f]) continue;
            Tri t = faces_[f];
            for (int& k : t) k = remap[k];
            tris.push_back(t);
        }
        return TriangleMesh(std::move(x), std::move(tris));
    }

private:
    bool contains(int f, int v) const
    {
        const Tri& t = faces_[f];
        return t[0] == v || t[1] == v || t[2] == v;
    }

    int add_face(const Tri& t)
    {
        faces_.push_back(t);
        face_alive_.push_back(true);
        return static_cast<int>(faces_.size()) - 1;
    }

    void remove_incidence(int v, int f)
    {
        auto& list = vf_[v];
        list.erase(std::remove(list.begin(), list.end(), f), list.end());
    }

    Vec3 normal(const Tri& t) const
    {
        return (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]).normalized();
    }

    double angle(int apex, int a, int b) const
    {
        const Vec3 u = pos_[a] - pos_[apex], v = pos_[b] - pos_[apex];
        return std::atan2(u.cross(v).norm(), u.dot(v));
    }

    std::vector<Vec3> pos_;
    std::vector<Tri> faces_;
    std::vector<bool> face_alive_;
    std::vector<bool> vertex_alive_;
    std::vector<std::vector<int>> vf_;
};

} // namespace

TriangleMesh remesh(const TriangleMesh& mesh, double target_edge, int smoothing_rounds, RemeshReport* report)
{
    if (!(target_edge > 0.0)) throw Error(ErrorKind::RemeshFailed, "target edge length must be positive");
    RemeshReport rep;
    Editor ed(mesh);
    const double hi = 4.0 / 3.0 * target_edge;
    const double lo = 4.0 / 5.0 * target_edge;
    constexpr int kMaxPasses = 32;

    for (int pass = 0; pass < kMaxPasses; ++pass) {
        int count = 0;
        for (const auto& [a, b] : ed.edges()) {
            if (ed.length(a, b) > hi) {
                ed.split(a, b);
                ++count;
            }
        }
        rep.splits += count;
        if (count == 0) break;
    }

    for (int pass = 0; pass < kMaxPasses; ++pass) {
        int count = 0;
        int skipped = 0;
        for (const auto& [a, b] : ed.edges()) {
            if (!ed.alive(a) || !ed.alive(b) || !ed.edge_exists(a, b)) continue;
            if (ed.length(a, b) >= lo) continue;
            if (ed.try_collapse(a, b, hi)) ++count;
            else ++skipped;
        }
        rep.collapses += count;
        rep.skipped_collapses = skipped;
        if (count == 0) break;
    }

    for (int pass = 0; pass < kMaxPasses; ++pass) {
        int count = 0;
        int skipped = 0;
        for (const auto& [a, b] : ed.edges()) {
            if (!ed.edge_exists(a, b) || !ed.should_flip(a, b)) continue;
            if (ed.try_flip(a, b)) ++count;
            else ++skipped;
        }
        rep.flips += count;
        rep.skipped_flips = skipped;
        if (count == 0) break;
    }

    ed.smooth(smoothing_rounds);

    if (report) *report = rep;
    try {
        return ed.build();
    } catch (const Error& err) {
        throw Error(ErrorKind::RemeshFailed, err.what());
    }
}

} // namespace scatter::mesh
