#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "darcy/rng.hpp"
#include "darcy/vec3.hpp"

namespace darcy {

struct Box {
    Vec3 lo, hi;

    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    double volume() const {
        Vec3 e = extent();
        return e.x * e.y * e.z;
    }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }
    bool contains_box(const Box& b) const { return contains(b.lo) && contains(b.hi); }
    Box intersect(const Box& b) const {
        return {{std::max(lo.x, b.lo.x), std::max(lo.y, b.lo.y), std::max(lo.z, b.lo.z)},
                {std::min(hi.x, b.hi.x), std::min(hi.y, b.hi.y), std::min(hi.z, b.hi.z)}};
    }
    bool empty() const { return lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z; }
};

/// Domain of the continuum problem: an axis-aligned box or a ball, both
/// star-shaped with respect to their center.
struct DomainSpec {
    enum class Kind { Box, Ball };

    Kind kind = Kind::Box;
    Box box{{0, 0, 0}, {1, 1, 1}};   // valid when kind == Box
    Vec3 ball_center{0, 0, 0};       // valid when kind == Ball
    double ball_radius = 1.0;

    static DomainSpec unit_cube() { return DomainSpec{}; }
    static DomainSpec centered_cube(double side) {
        DomainSpec d;
        double h = 0.5 * side;
        d.box = {{-h, -h, -h}, {h, h, h}};
        return d;
    }
    static DomainSpec ball(const Vec3& c, double r) {
        DomainSpec d;
        d.kind = Kind::Ball;
        d.ball_center = c;
        d.ball_radius = r;
        return d;
    }

    Vec3 center() const { return kind == Kind::Box ? box.center() : ball_center; }

    double volume() const {
        if (kind == Kind::Box) return box.volume();
        return 4.0 / 3.0 * M_PI * ball_radius * ball_radius * ball_radius;
    }

    bool contains(const Vec3& p) const {
        if (kind == Kind::Box) return box.contains(p);
        return norm2(p - ball_center) <= ball_radius * ball_radius;
    }

    /// Radius of the smallest ball about center() containing the domain.
    double circumradius() const {
        if (kind == Kind::Ball) return ball_radius;
        return 0.5 * norm(box.extent());
    }

    Box bounding_box() const {
        if (kind == Kind::Box) return box;
        Vec3 r{ball_radius, ball_radius, ball_radius};
        return {ball_center - r, ball_center + r};
    }

    /// The blown-up copy (1/eps) * D.
    DomainSpec scaled(double factor) const {
        DomainSpec d = *this;
        if (kind == Kind::Box) {
            d.box.lo = factor * box.lo;
            d.box.hi = factor * box.hi;
        } else {
            d.ball_center = factor * ball_center;
            d.ball_radius = factor * ball_radius;
        }
        return d;
    }

    Vec3 sample(Rng& rng) const {
        if (kind == Kind::Box) {
            return {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
                    rng.uniform(box.lo.z, box.hi.z)};
        }
        for (;;) {
            Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            if (norm2(p) <= 1.0) return ball_center + ball_radius * p;
        }
    }

    /// Distance from an interior point to the boundary along direction u
    /// (|u| = 1). Returns +inf if p is outside.
    double exit_distance(const Vec3& p, const Vec3& u) const {
        if (!contains(p)) return std::numeric_limits<double>::infinity();
        if (kind == Kind::Ball) {
            Vec3 d = p - ball_center;
            double b = dot(d, u);
            double c = norm2(d) - ball_radius * ball_radius;
            return -b + std::sqrt(std::max(0.0, b * b - c));
        }
        double t = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            if (u[i] > 1e-300) t = std::min(t, (box.hi[i] - p[i]) / u[i]);
            else if (u[i] < -1e-300) t = std::min(t, (box.lo[i] - p[i]) / u[i]);
        }
        return std::max(t, 0.0);
    }
};

} // namespace darcy
