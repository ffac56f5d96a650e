// Independent reference implementations used to freeze expected values.
// Everything here is deliberately brute-force or textbook-numeric and shares
// no code path with the library implementations it checks.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "darcy/geometry.hpp"
#include "darcy/vec3.hpp"

namespace oracles {

using darcy::Vec3;

/// O(n^2) half-nearest-neighbor distances.
std::vector<double> brute_force_half_nn(const std::vector<Vec3>& pts);

/// O(n^2) connected components of the dilated-ball intersection graph;
/// returns sorted component membership lists (all sizes).
std::vector<std::vector<std::uint32_t>> brute_force_components(
    const std::vector<darcy::geometry::Ball>& balls, double dilation);

/// Flux 4*pi*r^2 w'(r) at the outer radius of the radial annulus problem
/// (r^2 w')' = 0, w(a)=0, w(R)=1, solved by second-order finite differences
/// on `nodes` points (Thomas algorithm).
double radial_bvp_flux(double a, double R, int nodes);

/// Value of the Dirichlet Poisson problem -lap(u) = 1 on the unit cube at an
/// interior point, by the triple sine series summed to `tol`.
double unit_cube_poisson_value(double x, double y, double z, double tol = 1e-8);

/// Union volume of balls by counting midpoints of an n^3 grid over the box.
double rasterized_union_volume(const std::vector<darcy::geometry::Ball>& balls,
                               const darcy::Box& box, int n);

/// Adaptive Simpson on [a,b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Surface integral over the sphere |x - c| = r by Simpson in theta and phi
/// (independent of the library's Gauss-Legendre lat-long rule).
double sphere_integral_simpson(const Vec3& c, double r, int n,
                               const std::function<double(const Vec3&)>& f);

/// Exact smallest enclosing ball of two balls.
darcy::geometry::Ball two_ball_seb(const darcy::geometry::Ball& a,
                                   const darcy::geometry::Ball& b);

struct MeanStd {
    double mean = 0.0;
    double sd = 0.0;
    double stderr_ = 0.0;
};
MeanStd mean_std(const std::vector<double>& v);

} // namespace oracles
