#pragma once

#include "scatter/types.hpp"

namespace scatter::mesh {

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2);

/// True if the closed segment pq crosses the (non-coplanar) triangle abc.
bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c);

double segment_triangle_distance(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c);

/// Distance between two triangles, 0 if they intersect.
double triangle_triangle_distance(const Vec3* t1, const Vec3* t2);

/// Signed solid angle of triangle abc seen from p, divided by 4pi.
double winding_contribution(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace scatter::mesh
