#pragma once

// Reference values computed independently of the library: partial-wave series
// for the sound-soft sphere and brute-force quadrature of the weakly singular integral.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracles {

using cplx = std::complex<double>;

inline cplx sph_hankel1(unsigned n, double x) { return {std::sph_bessel(n, x), std::sph_neumann(n, x)}; }

inline int series_terms(double ka) { return static_cast<int>(ka + 4.0 * std::cbrt(ka) + 12.0); }

/// Far-field pattern of a sound-soft sphere of radius a hit by exp(i k x.d),
/// normalised so that u_s ~ exp(i k r)/r * u_inf; theta is the angle between
/// observation direction and d.
inline cplx sphere_farfield(double k, double a, double cos_theta)
{
    cplx sum = 0.0;
    for (int n = 0; n <= series_terms(k * a); ++n)
        sum += (2.0 * n + 1.0) * std::sph_bessel(n, k * a) / sph_hankel1(n, k * a) * std::legendre(n, cos_theta);
    return cplx(0.0, 1.0) / k * sum;
}

/// Outward normal derivative of the total field on the same sphere.
inline cplx sphere_normal_derivative(double k, double a, double cos_theta)
{
    cplx sum = 0.0;
    cplx in = 1.0;
    const double x = k * a;
    for (int n = 0; n <= series_terms(x); ++n) {
        sum += in * (2.0 * n + 1.0) * k * cplx(0.0, -1.0) / (x * x * sph_hankel1(n, x)) * std::legendre(n, cos_theta);
        in *= cplx(0.0, 1.0);
    }
    return sum;
}

/// Adaptive Simpson rule.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50)
{
    const auto step = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi, double whole,
                          double eps, int level) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (level <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return self(self, lo, mid, flo, flm, fmid, left, 0.5 * eps, level - 1) +
               self(self, mid, hi, fmid, frm, fhi, right, 0.5 * eps, level - 1);
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return step(step, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Integral of 1/|p - y| over a planar triangle for p strictly inside it, in polar
/// coordinates around p: the radial integral is the distance to the boundary.
inline double inverse_distance_integral(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                        const Eigen::Vector3d& c)
{
    const Eigen::Vector3d e1 = (b - a).normalized();
    const Eigen::Vector3d e2 = (c - a - (c - a).dot(e1) * e1).normalized();
    const auto flat = [&](const Eigen::Vector3d& q) { return Eigen::Vector2d((q - p).dot(e1), (q - p).dot(e2)); };
    const Eigen::Vector2d v[3] = {flat(a), flat(b), flat(c)};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d q0 = v[k], q1 = v[(k + 1) % 3];
        double t0 = std::atan2(q0.y(), q0.x());
        double t1 = std::atan2(q1.y(), q1.x());
        if (t1 < t0) t1 += 2.0 * std::numbers::pi;
        const Eigen::Vector2d edge = q1 - q0;
        const auto reach = [&](double th) {
            const Eigen::Vector2d dir(std::cos(th), std::sin(th));
            // Solve s*dir = q0 + u*edge for s.
            const double det = dir.x() * (-edge.y()) - dir.y() * (-edge.x());
            return (q0.x() * (-edge.y()) - q0.y() * (-edge.x())) / det;
        };
        total += adaptive_simpson(reach, t0, t1, 1e-14);
    }
    return total;
}

} // namespace oracles
