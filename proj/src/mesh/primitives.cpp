#include "scatter/mesh/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scatter::mesh {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2)
{
    const Vec3 d1 = q1 - p1;
    const Vec3 d2 = q2 - p2;
    const Vec3 r = p1 - p2;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    double s = 0.0, t = 0.0;
    if (a <= 1e-300 && e <= 1e-300) return r.norm();
    if (a <= 1e-300) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= 1e-300) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 n = (b - a).cross(c - a);
    const double sp = n.dot(p - a);
    const double sq = n.dot(q - a);
    if ((sp > 0.0 && sq > 0.0) || (sp < 0.0 && sq < 0.0) || sp == sq) return false;
    const Vec3 x = p + (sp / (sp - sq)) * (q - p);
    const double w0 = n.dot((b - x).cross(c - x));
    const double w1 = n.dot((c - x).cross(a - x));
    const double w2 = n.dot((a - x).cross(b - x));
    return (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0);
}

double segment_triangle_distance(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c)
{
    if (segment_crosses_triangle(p, q, a, b, c)) return 0.0;
    double d = std::min(point_triangle_distance(p, a, b, c), point_triangle_distance(q, a, b, c));
    d = std::min(d, segment_segment_distance(p, q, a, b));
    d = std::min(d, segment_segment_distance(p, q, b, c));
    d = std::min(d, segment_segment_distance(p, q, c, a));
    return d;
}

double triangle_triangle_distance(const Vec3* t1, const Vec3* t2)
{
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3 && d > 0.0; ++k) {
        d = std::min(d, segment_triangle_distance(t1[k], t1[(k + 1) % 3], t2[0], t2[1], t2[2]));
        d = std::min(d, segment_triangle_distance(t2[k], t2[(k + 1) % 3], t1[0], t1[1], t1[2]));
    }
    return d;
}

double winding_contribution(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Van Oosterom-Strackee solid angle formula.
    const Vec3 x = a - p, y = b - p, z = c - p;
    const double lx = x.norm(), ly = y.norm(), lz = z.norm();
    const double num = x.dot(y.cross(z));
    const double den = lx * ly * lz + x.dot(y) * lz + y.dot(z) * lx + z.dot(x) * ly;
    return 2.0 * std::atan2(num, den) / (4.0 * std::numbers::pi);
}

} // namespace scatter::mesh
