#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "darcy/clusters.hpp"
#include "darcy/geometry.hpp"

namespace darcy::measures {

/// Rule for the cube multiplier k(eps): rounds eps^{-9(alpha-1)/20} up, never
/// below 2. Overridable wherever a covering is built.
int default_cube_multiplier(double eps, double alpha);

/// Default gamma for the good/bad split: (20/21)(alpha - 1).
double default_gamma(double alpha);

struct CoveringCell {
    std::array<int, 3> lattice;      // base-cube lattice coordinates
    double volume = 0.0;             // exact, after unit-cell swaps
    Box bbox;                        // bounding box of base cube + gains
    bool boundary = false;           // base cube not contained in the domain
    std::vector<std::uint32_t> atoms; // good-center hole indices homed here
};

/// Covering of the domain by kEps-cubes with the unit cells of good centers
/// re-attached to the base cube holding their center. Unit cells are swapped
/// only when they do not overlap any other good unit cell; conflicted centers
/// keep their geometric cube, are counted, and raise CellOverlap in strict
/// mode. Membership of a center is always by its base cube.
struct Covering {
    int k = 0;
    double eps = 0.0;
    double cell_side = 0.0; // k * eps
    Vec3 anchor;            // lattice origin
    std::array<int, 3> dims{};
    std::vector<CoveringCell> cells;
    int overlap_conflicts = 0;      // good unit cells left un-swapped
    double max_diam = 0.0;          // sup of cell bounding-box diagonals
    std::vector<std::int32_t> cell_of_atom;    // hole index -> cell index or -1
    std::vector<std::uint8_t> atom_conflicted; // hole index -> un-swapped flag

    std::size_t cell_index(int i, int j, int l) const {
        return (static_cast<std::size_t>(l) * dims[1] + j) * dims[0] + i;
    }
};

Covering build_covering(const geometry::HoleSet& holes, const clusters::Partition& part, int k,
                        bool strict = false);

enum class Mode { Scalar, Stokes };

/// Sphere-supported flux measure: one atom per good center, carried by the
/// sphere of radius R_{eps,z} with constant density. The scalar atom has
/// total flux 4*pi*Y_{eps,z}; Stokes mode scales everything by 3/2.
struct FluxAtom {
    std::uint32_t hole = 0; // index into the hole set
    Vec3 center;
    double R = 0.0;       // sphere radius R_{eps,z}
    double Y = 0.0;       // eps^3 rho R/(R - eps^alpha rho)
    double density = 0.0; // sigma^{-2} d_nu w on the sphere (scalar mode)
};

struct FluxMeasure {
    Mode mode = Mode::Scalar;
    double eps = 0.0;
    std::vector<FluxAtom> atoms;

    double mode_factor() const { return mode == Mode::Scalar ? 1.0 : 1.5; }
    /// Total flux of one atom under the current mode.
    double atom_mass(const FluxAtom& a) const { return mode_factor() * 4.0 * M_PI * a.Y; }
    double total_mass() const;
};

FluxMeasure build_flux_measure(const geometry::HoleSet& holes,
                               const geometry::NeighborStats& stats,
                               const clusters::Partition& part, Mode mode);

/// Cell-constant step function m_eps(k): cell value (4pi/|K|) sum Y (scalar)
/// or 3/2 times that (Stokes); empty cells carry 0.
struct StepFunction {
    Mode mode = Mode::Scalar;
    std::vector<double> values; // one per covering cell
};

StepFunction step_function(const Covering& covering, const FluxMeasure& measure);

struct KvBound {
    double bound = 0.0;
    int containment_violations = 0; // atoms failing the 2R-inside-own-cell test
};

/// Kohn-Vogelius style bound on the H^-1 distance between the rescaled flux
/// measure and its cell averages: max_j diam(K_j) * (sum_i |g_i|_{L2}^2 / r_i)^{1/2}.
KvBound kv_bound(const FluxMeasure& measure, const Covering& covering);

/// sigma^{-2} <mu_eps, phi>: sum over atoms of the atom mass times the sphere
/// average of phi (lat-long quadrature at `order`, verified at 2*order).
double pairing(const FluxMeasure& measure, const std::function<double(const Vec3&)>& phi,
               int order = 16);

/// || m - target ||_{L2} over the non-boundary covering cells.
double l2_step_discrepancy(const Covering& covering, const StepFunction& m, double target);

struct HminusOne {
    double value = 0.0;
    std::size_t unknowns = 0;
    int iterations = 0;
};

/// Numeric H^-1 norm of (sigma^{-2} mu_eps - m): both are deposited on a grid
/// (atoms conserve their total flux to the nearest node), -lap(phi) = density
/// is solved with zero Dirichlet data, and the Dirichlet energy of phi is the
/// squared norm.
HminusOne h_minus_one_numeric(const FluxMeasure& measure, const Covering& covering,
                              const StepFunction& m, const Box& box, double h, double tol);

/// Smooth compactly-supported bump: exp(1 - 1/(1-t^2)) for t = |x-c|/w < 1.
struct BumpFunction {
    Vec3 center{0.5, 0.5, 0.5};
    double width = 0.3;

    double operator()(const Vec3& x) const {
        const double t2 = norm2(x - center) / (width * width);
        if (t2 >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - t2));
    }

    /// Integral over R^3 by radial quadrature (adaptive Simpson), good to
    /// ~1e-12; the value enters targets, never the measure itself.
    double integral() const;
};

} // namespace darcy::measures
