#include "darcy/correctors.hpp"

#include <algorithm>
#include <cmath>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"
#include "darcy/gridcg.hpp"
#include "darcy/quadrature.hpp"

namespace darcy::correctors {

// ---------------------------------------------------------------------------
// Scalar annulus corrector
// ---------------------------------------------------------------------------

double ScalarCorrector::eval_radial(double r) const {
    if (r <= a) return 0.0;
    if (r >= R) return 1.0;
    return (1.0 / a - 1.0 / r) / (1.0 / a - 1.0 / R);
}

double ScalarCorrector::eval(const Vec3& x) const { return eval_radial(norm(x - center)); }

namespace {
void check_annulus(double a, double R) {
    if (!(a > 0.0) || !(R > a) || (R - a) <= 1e-12 * R) {
        throw DegenerateAnnulus("annulus radii a=" + fmt_double(a) + ", R=" + fmt_double(R));
    }
}
} // namespace

double scalar_flux(double a, double R) {
    check_annulus(a, R);
    return 4.0 * M_PI * a * R / (R - a);
}

double Y_value(double eps, double alpha, double rho, double R_eps) {
    const double a = std::pow(eps, alpha) * rho;
    check_annulus(a, R_eps);
    return eps * eps * eps * rho * R_eps / (R_eps - a);
}

// ---------------------------------------------------------------------------
// Stokes flow past a sphere
// ---------------------------------------------------------------------------

Vec3 StokesCellSolution::velocity(const Vec3& x) const {
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double r3 = r * r2, r5 = r3 * r2;
    Vec3 e{0, 0, 0};
    e[direction] = 1.0;
    const double s = x[direction];
    const double c1 = 0.75 * r0;          // Stokeslet strength
    const double c2 = 0.25 * r0 * r0 * r0; // potential-dipole strength
    Vec3 v;
    for (int a = 0; a < 3; ++a) {
        v[a] = c1 * (e[a] / r + s * x[a] / r3) + c2 * (e[a] / r3 - 3.0 * s * x[a] / r5);
    }
    return v;
}

double StokesCellSolution::pressure(const Vec3& x) const {
    const double r2 = norm2(x);
    return 1.5 * r0 * x[direction] / (r2 * std::sqrt(r2));
}

Vec3 StokesCellSolution::traction(const Vec3& x) const {
    // nu is the outward normal of the exterior flow domain, nu = -x/|x|.
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double r4 = r2 * r2, r6 = r4 * r2;
    Vec3 e{0, 0, 0};
    e[direction] = 1.0;
    const double s = x[direction];
    const double c1 = 0.75 * r0;
    const double c2 = 0.25 * r0 * r0 * r0;
    const double q = 1.5 * r0 * s / (r2 * r);
    Vec3 t;
    for (int a = 0; a < 3; ++a) {
        const double radial_grad = c1 * (-e[a] / r2 - s * x[a] / r4) +
                                   c2 * (-3.0 * e[a] / r4 + 9.0 * s * x[a] / r6);
        t[a] = -radial_grad + q * x[a] / r;
    }
    return t;
}

namespace {

Vec3 flux_at_order(const StokesCellSolution& sol, double r, int order) {
    quadrature::SphereRule rule = quadrature::sphere_rule({0, 0, 0}, r, order);
    Vec3 total{0, 0, 0};
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
        total += rule.weights[i] * sol.traction(rule.points[i]);
    }
    return total;
}

} // namespace

Vec3 stokes_flux(const StokesCellSolution& sol, double r, int order) {
    if (r < sol.r0) throw DegenerateAnnulus("flux sphere radius below the obstacle radius");
    Vec3 coarse = flux_at_order(sol, r, order);
    Vec3 fine = flux_at_order(sol, r, 2 * order);
    const double scale = std::max(norm(fine), 1e-300);
    if (norm(fine - coarse) > 1e-6 * scale) {
        throw QuadratureUnderResolved("stokes_flux orders " + fmt_u64(order) + "/" +
                                      fmt_u64(2 * order) + " disagree by " +
                                      fmt_double(norm(fine - coarse) / scale) + " relative");
    }
    return fine;
}

// ---------------------------------------------------------------------------
// Grid capacity
// ---------------------------------------------------------------------------

CapacityEstimate numerical_capacity(const std::vector<geometry::Ball>& balls, const Box& box,
                                    double h, double tol, std::optional<double> outer_radius) {
    using gridcg::NodeState;

    double min_radius = std::numeric_limits<double>::infinity();
    for (const auto& b : balls) min_radius = std::min(min_radius, b.radius);
    if (!balls.empty() && h > min_radius / 3.0) {
        throw UnderResolvedBall("grid spacing " + fmt_double(h) +
                                " does not resolve the smallest ball (radius " +
                                fmt_double(min_radius) + "; need h <= radius/3)");
    }

    gridcg::GridGeom geom;
    geom.origin = box.lo;
    geom.h = h;
    Vec3 ext = box.extent();
    geom.nx = static_cast<int>(std::floor(ext.x / h + 0.5)) + 1;
    geom.ny = static_cast<int>(std::floor(ext.y / h + 0.5)) + 1;
    geom.nz = static_cast<int>(std::floor(ext.z / h + 0.5)) + 1;

    std::vector<NodeState> state(geom.size(), NodeState::Free);
    const Vec3 c0 = box.center();
    // Outer boundary: the box faces, or everything at/past the given sphere.
    for (int k = 0; k < geom.nz; ++k)
        for (int j = 0; j < geom.ny; ++j)
            for (int i = 0; i < geom.nx; ++i) {
                const bool face = i == 0 || j == 0 || k == 0 || i == geom.nx - 1 ||
                                  j == geom.ny - 1 || k == geom.nz - 1;
                if (face) {
                    state[geom.id(i, j, k)] = NodeState::Zero;
                } else if (outer_radius) {
                    if (norm(geom.pos(i, j, k) - c0) >= *outer_radius)
                        state[geom.id(i, j, k)] = NodeState::Zero;
                }
            }
    // Conductor nodes: node centers inside any ball.
    for (const auto& b : balls) {
        const int ilo = std::max(0, static_cast<int>(std::floor((b.center.x - b.radius - box.lo.x) / h)));
        const int jlo = std::max(0, static_cast<int>(std::floor((b.center.y - b.radius - box.lo.y) / h)));
        const int klo = std::max(0, static_cast<int>(std::floor((b.center.z - b.radius - box.lo.z) / h)));
        const int ihi = std::min(geom.nx - 1, static_cast<int>(std::ceil((b.center.x + b.radius - box.lo.x) / h)));
        const int jhi = std::min(geom.ny - 1, static_cast<int>(std::ceil((b.center.y + b.radius - box.lo.y) / h)));
        const int khi = std::min(geom.nz - 1, static_cast<int>(std::ceil((b.center.z + b.radius - box.lo.z) / h)));
        const double r2 = b.radius * b.radius;
        for (int k = klo; k <= khi; ++k)
            for (int j = jlo; j <= jhi; ++j)
                for (int i = ilo; i <= ihi; ++i) {
                    if (norm2(geom.pos(i, j, k) - b.center) <= r2)
                        state[geom.id(i, j, k)] = NodeState::One;
                }
    }

    gridcg::MaskedPoisson problem(geom, std::move(state));
    gridcg::SolveStats stats;
    std::vector<double> u = problem.solve({}, tol, &stats);

    CapacityEstimate est;
    est.capacity = problem.dirichlet_energy(u);
    est.iterations = stats.iterations;
    est.residual = stats.relative_residual;
    est.unknowns = problem.unknowns();
    return est;
}

} // namespace darcy::correctors
