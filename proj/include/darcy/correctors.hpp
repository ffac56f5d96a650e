#pragma once

#include <optional>
#include <vector>

#include "darcy/domain.hpp"
#include "darcy/geometry.hpp"
#include "darcy/vec3.hpp"

namespace darcy::correctors {

/// Radially harmonic oscillating test function on an annulus: 0 on the inner
/// sphere (the hole), 1 on and beyond the outer sphere.
///
///   w(r) = (1/a - 1/r) / (1/a - 1/R)   for a <= r <= R.
struct ScalarCorrector {
    Vec3 center;
    double a; // inner radius, eps^alpha * rho
    double R; // outer radius, R_{eps,z}

    double eval(const Vec3& x) const;
    double eval_radial(double r) const;

    /// Constant normal-derivative density on the outer sphere.
    double boundary_density() const { return a / (R * (R - a)); }
};

/// Total outward flux through the outer sphere; equals the annulus capacity
/// cap(B_a; B_R) = 4*pi*a*R/(R-a).
double scalar_flux(double a, double R);

/// Y_{eps,z} = eps^3 * rho * R_eps / (R_eps - eps^alpha*rho). Also reachable
/// as eps^{3-alpha} * scalar_flux(eps^alpha*rho, R_eps) / (4*pi); both routes
/// agree to machine precision and tests pin that identity.
double Y_value(double eps, double alpha, double rho, double R_eps);

inline double ball_capacity(double r) { return 4.0 * M_PI * r; }
inline double stokes_ball_capacity(double r) { return 6.0 * M_PI * r; }

/// Classical Stokes flow past a sphere of radius r0: velocity equal to e_i on
/// the sphere, decaying at infinity, with its pressure. Unit viscosity.
struct StokesCellSolution {
    int direction = 0; // i in {0,1,2}
    double r0 = 1.0;

    Vec3 velocity(const Vec3& x) const;
    double pressure(const Vec3& x) const;
    /// (nu . grad) w - q nu with nu the outward normal of the flow domain
    /// (pointing toward the sphere), evaluated at x with |x| >= r0.
    Vec3 traction(const Vec3& x) const;
};

/// Surface integral of the traction over the sphere of radius r >= r0.
/// Momentum balance makes it r-independent: 6*pi*r0 in the i-th slot.
/// Integrates at `order` and 2*`order`; throws QuadratureUnderResolved if the
/// two disagree beyond 1e-6 relative.
Vec3 stokes_flux(const StokesCellSolution& sol, double r, int order = 16);

struct CapacityEstimate {
    double capacity = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::size_t unknowns = 0;
};

/// Variational capacity of a union of balls inside a box (or inside the
/// sphere of radius `outer_radius` when given): minimizes the discrete
/// Dirichlet energy of the potential that is 1 on ball nodes and 0 on the
/// outer boundary, by conjugate gradients on a 7-point grid.
CapacityEstimate numerical_capacity(const std::vector<geometry::Ball>& balls, const Box& box,
                                    double h, double tol,
                                    std::optional<double> outer_radius = std::nullopt);

} // namespace darcy::correctors
