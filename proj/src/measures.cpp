#include "darcy/measures.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"
#include "darcy/gridcg.hpp"
#include "darcy/quadrature.hpp"

namespace darcy::measures {

using geometry::Ball;
using geometry::HoleSet;

int default_cube_multiplier(double eps, double alpha) {
    const double k = std::pow(eps, -9.0 * (alpha - 1.0) / 20.0);
    return std::max(2, static_cast<int>(std::ceil(k - 1e-12)));
}

double default_gamma(double alpha) { return 20.0 / 21.0 * (alpha - 1.0); }

// ---------------------------------------------------------------------------
// Covering
// ---------------------------------------------------------------------------

Covering build_covering(const HoleSet& holes, const clusters::Partition& part, int k,
                        bool strict) {
    if (k < 2) throw ConfigInvalid("k", "cube multiplier must be >= 2");

    Covering cov;
    cov.k = k;
    cov.eps = holes.eps;
    cov.cell_side = k * holes.eps;
    const double side = cov.cell_side;
    const double eps = holes.eps;

    const Box dbox = holes.domain.bounding_box();
    // One ring of extra cubes so every swapped unit cell stays on the lattice.
    cov.anchor = dbox.lo - Vec3{side, side, side};
    const Vec3 ext = dbox.hi - cov.anchor;
    for (int a = 0; a < 3; ++a)
        cov.dims[a] = static_cast<int>(std::ceil(ext[a] / side - 1e-12)) + 1;

    const std::size_t n_cells =
        static_cast<std::size_t>(cov.dims[0]) * cov.dims[1] * cov.dims[2];
    cov.cells.resize(n_cells);
    for (int l = 0; l < cov.dims[2]; ++l)
        for (int j = 0; j < cov.dims[1]; ++j)
            for (int i = 0; i < cov.dims[0]; ++i) {
                CoveringCell& cell = cov.cells[cov.cell_index(i, j, l)];
                cell.lattice = {i, j, l};
                cell.volume = side * side * side;
                Vec3 lo = cov.anchor + Vec3{i * side, j * side, l * side};
                cell.bbox = {lo, lo + Vec3{side, side, side}};
                // Boundary cells are those whose base cube is not inside D.
                if (holes.domain.kind == DomainSpec::Kind::Box) {
                    cell.boundary = !holes.domain.box.contains_box(
                        {lo + Vec3{1e-12, 1e-12, 1e-12}, cell.bbox.hi - Vec3{1e-12, 1e-12, 1e-12}});
                } else {
                    cell.boundary = false;
                    for (int c = 0; c < 8; ++c) {
                        Vec3 corner{c & 1 ? cell.bbox.hi.x : lo.x, c & 2 ? cell.bbox.hi.y : lo.y,
                                    c & 4 ? cell.bbox.hi.z : lo.z};
                        if (!holes.domain.contains(corner)) cell.boundary = true;
                    }
                }
            }

    cov.cell_of_atom.assign(holes.balls.size(), -1);
    cov.atom_conflicted.assign(holes.balls.size(), 0);

    auto lattice_of = [&](const Vec3& p) {
        std::array<int, 3> c;
        for (int a = 0; a < 3; ++a) {
            c[a] = static_cast<int>(std::floor((p[a] - cov.anchor[a]) / side));
            c[a] = std::clamp(c[a], 0, cov.dims[a] - 1);
        }
        return c;
    };

    // Conflicts: two good unit cells overlap iff centers are closer than eps
    // in every coordinate.
    std::unordered_map<geometry::CellKey, std::vector<std::uint32_t>, geometry::CellKeyHash> grid;
    auto gkey = [&](const Vec3& p) {
        return geometry::CellKey{static_cast<std::int32_t>(std::floor(p.x / eps)),
                                 static_cast<std::int32_t>(std::floor(p.y / eps)),
                                 static_cast<std::int32_t>(std::floor(p.z / eps))};
    };
    for (std::uint32_t idx : part.good) grid[gkey(holes.balls[idx].center)].push_back(idx);
    for (std::uint32_t idx : part.good) {
        const Vec3& p = holes.balls[idx].center;
        geometry::CellKey c = gkey(p);
        bool conflict = false;
        for (std::int32_t i = c.i - 1; i <= c.i + 1 && !conflict; ++i)
            for (std::int32_t j = c.j - 1; j <= c.j + 1 && !conflict; ++j)
                for (std::int32_t l = c.k - 1; l <= c.k + 1 && !conflict; ++l) {
                    auto it = grid.find({i, j, l});
                    if (it == grid.end()) continue;
                    for (std::uint32_t other : it->second) {
                        if (other == idx) continue;
                        const Vec3& q = holes.balls[other].center;
                        if (std::abs(p.x - q.x) < eps && std::abs(p.y - q.y) < eps &&
                            std::abs(p.z - q.z) < eps) {
                            conflict = true;
                            break;
                        }
                    }
                }
        if (conflict) {
            cov.atom_conflicted[idx] = 1;
            ++cov.overlap_conflicts;
        }
    }
    if (strict && cov.overlap_conflicts > 0) {
        throw CellOverlap("unit cells of " + std::to_string(cov.overlap_conflicts) +
                          " good centers overlap; eps is too large for this gamma");
    }

    for (std::uint32_t idx : part.good) {
        const Vec3& p = holes.balls[idx].center;
        const std::array<int, 3> home = lattice_of(p);
        const std::size_t home_idx = cov.cell_index(home[0], home[1], home[2]);
        cov.cell_of_atom[idx] = static_cast<std::int32_t>(home_idx);
        cov.cells[home_idx].atoms.push_back(idx);
        if (cov.atom_conflicted[idx]) continue;

        const Box unit{{p.x - eps / 2, p.y - eps / 2, p.z - eps / 2},
                       {p.x + eps / 2, p.y + eps / 2, p.z + eps / 2}};
        const std::array<int, 3> lo = lattice_of(unit.lo);
        const std::array<int, 3> hi = lattice_of(unit.hi);
        if (lo == home && hi == home) continue; // interior unit cell, no swap
        for (int l = lo[2]; l <= hi[2]; ++l)
            for (int j = lo[1]; j <= hi[1]; ++j)
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    if (i == home[0] && j == home[1] && l == home[2]) continue;
                    CoveringCell& neighbor = cov.cells[cov.cell_index(i, j, l)];
                    Box nb{cov.anchor + Vec3{i * side, j * side, l * side}, {}};
                    nb.hi = nb.lo + Vec3{side, side, side};
                    Box piece = unit.intersect(nb);
                    if (piece.empty()) continue;
                    const double v = piece.volume();
                    neighbor.volume -= v;
                    cov.cells[home_idx].volume += v;
                }
        CoveringCell& homecell = cov.cells[home_idx];
        homecell.bbox.lo = {std::min(homecell.bbox.lo.x, unit.lo.x),
                            std::min(homecell.bbox.lo.y, unit.lo.y),
                            std::min(homecell.bbox.lo.z, unit.lo.z)};
        homecell.bbox.hi = {std::max(homecell.bbox.hi.x, unit.hi.x),
                            std::max(homecell.bbox.hi.y, unit.hi.y),
                            std::max(homecell.bbox.hi.z, unit.hi.z)};
    }

    cov.max_diam = 0.0;
    for (const CoveringCell& cell : cov.cells)
        cov.max_diam = std::max(cov.max_diam, norm(cell.bbox.hi - cell.bbox.lo));
    return cov;
}

// ---------------------------------------------------------------------------
// Flux measure
// ---------------------------------------------------------------------------

FluxMeasure build_flux_measure(const HoleSet& holes, const geometry::NeighborStats& stats,
                               const clusters::Partition& part, Mode mode) {
    FluxMeasure m;
    m.mode = mode;
    m.eps = holes.eps;
    const double eps3 = holes.eps * holes.eps * holes.eps;
    m.atoms.reserve(part.good.size());
    for (std::uint32_t idx : part.good) {
        const Ball& b = holes.balls[idx];
        const double R = stats.R_eps[idx];
        const double a = b.radius;
        if (!(R > a))
            throw DegenerateAnnulus("good center with R_eps <= hole radius (index " +
                                    fmt_u64(idx) + ")");
        FluxAtom atom;
        atom.hole = idx;
        atom.center = b.center;
        atom.R = R;
        atom.Y = eps3 * b.rho * R / (R - a);
        atom.density = eps3 * b.rho / (R * (R - a));
        m.atoms.push_back(atom);
    }
    return m;
}

double FluxMeasure::total_mass() const {
    double s = 0.0;
    for (const FluxAtom& a : atoms) s += atom_mass(a);
    return s;
}

// ---------------------------------------------------------------------------
// Step function, KV bound, pairings
// ---------------------------------------------------------------------------

StepFunction step_function(const Covering& covering, const FluxMeasure& measure) {
    StepFunction sf;
    sf.mode = measure.mode;
    sf.values.assign(covering.cells.size(), 0.0);
    for (const FluxAtom& a : measure.atoms) {
        const std::int32_t cell = covering.cell_of_atom[a.hole];
        if (cell >= 0) sf.values[cell] += a.Y;
    }
    const double factor = measure.mode_factor() * 4.0 * M_PI;
    for (std::size_t c = 0; c < sf.values.size(); ++c) {
        sf.values[c] = sf.values[c] > 0.0 ? factor * sf.values[c] / covering.cells[c].volume : 0.0;
    }
    return sf;
}

KvBound kv_bound(const FluxMeasure& measure, const Covering& covering) {
    KvBound kv;
    const double eps = covering.eps;
    double sum = 0.0;
    for (const FluxAtom& a : measure.atoms) {
        const double g = measure.mode_factor() * a.density;
        sum += 4.0 * M_PI * a.R * g * g; // |g|^2_{L2} / R = 4 pi R g^2

        // Containment: B_{2R}(c) inside the own cell. Sufficient tests: the
        // ball fits the eps/2-shrunk base cube, or it fits the (un-conflicted)
        // swapped unit cell.
        const std::int32_t ci = covering.cell_of_atom[a.hole];
        bool contained = false;
        if (ci >= 0) {
            const CoveringCell& cell = covering.cells[ci];
            Vec3 lo = covering.anchor + Vec3{cell.lattice[0] * covering.cell_side,
                                             cell.lattice[1] * covering.cell_side,
                                             cell.lattice[2] * covering.cell_side};
            Vec3 hi = lo + Vec3{covering.cell_side, covering.cell_side, covering.cell_side};
            const double m = 2.0 * a.R + eps / 2.0;
            contained = a.center.x - lo.x >= m && hi.x - a.center.x >= m &&
                        a.center.y - lo.y >= m && hi.y - a.center.y >= m &&
                        a.center.z - lo.z >= m && hi.z - a.center.z >= m;
            if (!contained && 2.0 * a.R <= eps / 2.0 && !covering.atom_conflicted[a.hole])
                contained = true;
        }
        if (!contained) ++kv.containment_violations;
    }
    kv.bound = covering.max_diam * std::sqrt(sum);
    return kv;
}

namespace {

double pairing_at_order(const FluxMeasure& measure, const std::function<double(const Vec3&)>& phi,
                        int order) {
    double total = 0.0;
    for (const FluxAtom& a : measure.atoms) {
        const double avg = quadrature::sphere_average(a.center, a.R, order, phi);
        total += measure.atom_mass(a) * avg;
    }
    return total;
}

} // namespace

double pairing(const FluxMeasure& measure, const std::function<double(const Vec3&)>& phi,
               int order) {
    const double coarse = pairing_at_order(measure, phi, order);
    const double fine = pairing_at_order(measure, phi, 2 * order);
    const double scale = std::max({std::abs(coarse), std::abs(fine), 1e-300});
    if (std::abs(fine - coarse) > 1e-6 * scale && std::abs(fine - coarse) > 1e-14) {
        throw QuadratureUnderResolved("sphere averages at orders " + std::to_string(order) +
                                      " and " + std::to_string(2 * order) + " disagree by " +
                                      fmt_double(std::abs(fine - coarse) / scale) + " relative");
    }
    return fine;
}

double l2_step_discrepancy(const Covering& covering, const StepFunction& m, double target) {
    double sum = 0.0;
    for (std::size_t c = 0; c < covering.cells.size(); ++c) {
        if (covering.cells[c].boundary) continue;
        const double d = m.values[c] - target;
        sum += covering.cells[c].volume * d * d;
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Numeric H^-1
// ---------------------------------------------------------------------------

HminusOne h_minus_one_numeric(const FluxMeasure& measure, const Covering& covering,
                              const StepFunction& m, const Box& box, double h, double tol) {
    using gridcg::NodeState;

    for (const FluxAtom& a : measure.atoms) {
        if (a.R < 3.0 * h)
            throw UnderResolvedBall("sphere of radius " + fmt_double(a.R) +
                                    " needs h <= R/3, got h = " + fmt_double(h));
    }

    gridcg::GridGeom geom;
    geom.origin = box.lo;
    geom.h = h;
    const Vec3 ext = box.extent();
    geom.nx = static_cast<int>(std::floor(ext.x / h + 0.5)) + 1;
    geom.ny = static_cast<int>(std::floor(ext.y / h + 0.5)) + 1;
    geom.nz = static_cast<int>(std::floor(ext.z / h + 0.5)) + 1;

    std::vector<NodeState> state(geom.size(), NodeState::Free);
    for (int k = 0; k < geom.nz; ++k)
        for (int j = 0; j < geom.ny; ++j)
            for (int i = 0; i < geom.nx; ++i) {
                if (i == 0 || j == 0 || k == 0 || i == geom.nx - 1 || j == geom.ny - 1 ||
                    k == geom.nz - 1)
                    state[geom.id(i, j, k)] = NodeState::Zero;
            }
    gridcg::MaskedPoisson problem(geom, std::move(state));

    // Signed density: atoms deposited to nearest nodes (conserving each total
    // flux), the step function subtracted cell-wise.
    std::vector<double> density(geom.size(), 0.0);
    const double inv_h3 = 1.0 / (h * h * h);
    for (const FluxAtom& a : measure.atoms) {
        auto rule = quadrature::sphere_rule(a.center, a.R, 8);
        const double g = measure.mode_factor() * a.density;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec3& p = rule.points[q];
            int i = std::clamp(static_cast<int>(std::floor((p.x - box.lo.x) / h + 0.5)), 0,
                               geom.nx - 1);
            int j = std::clamp(static_cast<int>(std::floor((p.y - box.lo.y) / h + 0.5)), 0,
                               geom.ny - 1);
            int k = std::clamp(static_cast<int>(std::floor((p.z - box.lo.z) / h + 0.5)), 0,
                               geom.nz - 1);
            density[geom.id(i, j, k)] += rule.weights[q] * g * inv_h3;
        }
    }
    const double side = covering.cell_side;
    for (int k = 0; k < geom.nz; ++k)
        for (int j = 0; j < geom.ny; ++j)
            for (int i = 0; i < geom.nx; ++i) {
                const Vec3 p = geom.pos(i, j, k);
                std::array<int, 3> c;
                bool inside = true;
                for (int a = 0; a < 3; ++a) {
                    c[a] = static_cast<int>(std::floor((p[a] - covering.anchor[a]) / side));
                    if (c[a] < 0 || c[a] >= covering.dims[a]) inside = false;
                }
                if (!inside) continue;
                density[geom.id(i, j, k)] -= m.values[covering.cell_index(c[0], c[1], c[2])];
            }

    std::vector<double> f_free(problem.unknowns());
    const auto& nodes = problem.free_nodes();
    for (std::size_t q = 0; q < nodes.size(); ++q) f_free[q] = density[nodes[q]];

    gridcg::SolveStats stats;
    std::vector<double> phi = problem.solve(f_free, tol, &stats);

    HminusOne out;
    out.value = std::sqrt(problem.dirichlet_energy(phi));
    out.unknowns = problem.unknowns();
    out.iterations = stats.iterations;
    return out;
}

// ---------------------------------------------------------------------------
// Bump test function
// ---------------------------------------------------------------------------

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1);
}

} // namespace

double BumpFunction::integral() const {
    auto radial = [](double t) {
        if (t >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - t * t)) * t * t;
    };
    const double unit =
        simpson(radial, 0.0, 1.0, radial(0.0), radial(0.5), radial(1.0), 1e-14, 40);
    return 4.0 * M_PI * width * width * width * unit;
}

} // namespace darcy::measures
