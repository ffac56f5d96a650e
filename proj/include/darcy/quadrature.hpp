#pragma once

#include <functional>
#include <vector>

#include "darcy/vec3.hpp"

namespace darcy::quadrature {

struct Rule1D {
    std::vector<double> nodes;   // on (-1, 1)
    std::vector<double> weights; // sum to 2
};

/// Gauss-Legendre rule by Newton iteration on the Legendre recurrence.
Rule1D gauss_legendre(int n);

/// Lat-long sphere rule: Gauss-Legendre in cos(theta) x uniform longitudes.
/// `order` Gauss nodes and 2*order longitudes; weights sum to 4*pi*r^2.
struct SphereRule {
    std::vector<Vec3> points;    // on the sphere of radius r about center
    std::vector<Vec3> normals;   // outward unit normals
    std::vector<double> weights;
};

SphereRule sphere_rule(const Vec3& center, double r, int order);

/// Average of f over the sphere at the given order.
double sphere_average(const Vec3& center, double r, int order,
                      const std::function<double(const Vec3&)>& f);

} // namespace darcy::quadrature
