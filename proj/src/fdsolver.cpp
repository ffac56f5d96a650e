#include "darcy/fdsolver.hpp"

#include <algorithm>
#include <cmath>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"

namespace darcy::fdsolver {

using gridcg::GridGeom;
using gridcg::NodeState;

MaskedGrid rasterize(const geometry::HoleSet& holes, const Box& box, double h) {
    double min_radius = std::numeric_limits<double>::infinity();
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < holes.balls.size(); ++i) {
        if (holes.balls[i].radius < min_radius) {
            min_radius = holes.balls[i].radius;
            min_idx = i;
        }
    }
    if (!holes.balls.empty() && h > min_radius / 3.0) {
        throw UnderResolvedHole("ball " + fmt_u64(min_idx) + " with radius " +
                                fmt_double(min_radius) + " needs h <= " +
                                fmt_double(min_radius / 3.0) + ", got " + fmt_double(h));
    }

    MaskedGrid grid;
    grid.geom.origin = box.lo;
    grid.geom.h = h;
    const Vec3 ext = box.extent();
    grid.geom.nx = static_cast<int>(std::floor(ext.x / h + 0.5)) + 1;
    grid.geom.ny = static_cast<int>(std::floor(ext.y / h + 0.5)) + 1;
    grid.geom.nz = static_cast<int>(std::floor(ext.z / h + 0.5)) + 1;
    grid.state.assign(grid.geom.size(), NodeState::Free);

    for (int k = 0; k < grid.geom.nz; ++k)
        for (int j = 0; j < grid.geom.ny; ++j)
            for (int i = 0; i < grid.geom.nx; ++i) {
                if (i == 0 || j == 0 || k == 0 || i == grid.geom.nx - 1 ||
                    j == grid.geom.ny - 1 || k == grid.geom.nz - 1)
                    grid.state[grid.geom.id(i, j, k)] = NodeState::Zero;
            }

    // Hole nodes: node centers inside any ball. Marked ball-by-ball over the
    // ball's lattice bounding box; Zero doubles as the hole state since both
    // carry u = 0.
    std::size_t n_hole = 0;
    for (const geometry::Ball& b : holes.balls) {
        const int ilo = std::max(1, static_cast<int>(std::floor((b.center.x - b.radius - box.lo.x) / h)));
        const int jlo = std::max(1, static_cast<int>(std::floor((b.center.y - b.radius - box.lo.y) / h)));
        const int klo = std::max(1, static_cast<int>(std::floor((b.center.z - b.radius - box.lo.z) / h)));
        const int ihi = std::min(grid.geom.nx - 2, static_cast<int>(std::ceil((b.center.x + b.radius - box.lo.x) / h)));
        const int jhi = std::min(grid.geom.ny - 2, static_cast<int>(std::ceil((b.center.y + b.radius - box.lo.y) / h)));
        const int khi = std::min(grid.geom.nz - 2, static_cast<int>(std::ceil((b.center.z + b.radius - box.lo.z) / h)));
        const double r2 = b.radius * b.radius;
        for (int k = klo; k <= khi; ++k)
            for (int j = jlo; j <= jhi; ++j)
                for (int i = ilo; i <= ihi; ++i) {
                    const std::size_t id = grid.geom.id(i, j, k);
                    if (grid.state[id] == NodeState::Free &&
                        norm2(grid.geom.pos(i, j, k) - b.center) <= r2) {
                        grid.state[id] = NodeState::Zero;
                        ++n_hole;
                    }
                }
    }
    grid.n_hole = n_hole;
    const std::size_t inner = static_cast<std::size_t>(grid.geom.nx - 2) *
                              (grid.geom.ny - 2) * (grid.geom.nz - 2);
    grid.n_interior = inner - n_hole;
    grid.hole_fraction = inner > 0 ? static_cast<double>(n_hole) / inner : 0.0;
    return grid;
}

Solution solve_poisson(MaskedGrid grid, double f_const, double tol) {
    gridcg::MaskedPoisson problem(grid.geom, std::move(grid.state));
    std::vector<double> f(problem.unknowns(), f_const);
    gridcg::SolveStats stats;
    std::vector<double> u = problem.solve(f, tol, &stats);
    return Solution{std::move(problem), std::move(u), stats.iterations, stats.relative_residual};
}

double load_work(const Solution& sol, double f_const) {
    const double h3 = std::pow(sol.problem.geom().h, 3);
    double s = 0.0;
    for (double v : sol.u) s += v;
    return h3 * f_const * s;
}

DarcyError darcy_error(const Solution& sol, double eps, double alpha, double f_const,
                       const pointprocess::RadiiLaw& law, double lambda, double p) {
    if (!(p >= 1.0 && p < 2.0)) throw DegenerateExponent("p must lie in [1,2)");
    const GridGeom& g = sol.problem.geom();
    const double sigma2 = std::pow(eps, -(3.0 - alpha));
    DarcyError out;
    out.p = p;
    out.k_target = 1.0 / (4.0 * M_PI * lambda * pointprocess::moment(law, 1.0));

    const Vec3 ext{g.h * (g.nx - 1), g.h * (g.ny - 1), g.h * (g.nz - 1)};
    const double margin = 0.1 * norm(ext);
    const int mi = static_cast<int>(std::ceil(margin / g.h));

    double lp_sum = 0.0, mean_sum = 0.0;
    std::size_t n_core = 0;
    for (int k = mi; k < g.nz - mi; ++k)
        for (int j = mi; j < g.ny - mi; ++j)
            for (int i = mi; i < g.nx - mi; ++i) {
                const std::size_t node = g.id(i, j, k);
                if (sol.problem.unknown_index(node) < 0) continue; // hole or face
                const double su = sigma2 * sol.u[sol.problem.unknown_index(node)];
                lp_sum += std::pow(std::abs(su - out.k_target * f_const), p);
                mean_sum += su;
                ++n_core;
            }
    const double h3 = g.h * g.h * g.h;
    out.lp_error = n_core > 0 ? std::pow(lp_sum * h3, 1.0 / p) : 0.0;
    out.core_mean = n_core > 0 ? mean_sum / static_cast<double>(n_core) : 0.0;
    out.core_nodes = n_core;

    const double energy = sol.problem.dirichlet_energy(sol.u); // sum h^3 |grad u|^2
    const double sigma = std::pow(eps, -(3.0 - alpha) / 2.0);
    out.energy_norm = sigma * std::sqrt(energy);

    double l2 = 0.0;
    for (double v : sol.u) l2 += v * v;
    l2 = std::sqrt(h3 * l2);
    const double logfac = 1.0 + std::pow(std::abs(std::log(eps)), 1.5);
    const double denom = (1.0 / sigma) * logfac * std::sqrt(energy);
    out.poincare_ratio = denom > 0.0 ? l2 / denom : 0.0;
    return out;
}

ConvergenceReport convergence_sweep(const SweepConfig& cfg) {
    ConvergenceReport report;
    report.k_target =
        1.0 / (4.0 * M_PI * cfg.base.lambda * pointprocess::moment(cfg.base.radii_law, 1.0));

    const Box box = cfg.base.domain.bounding_box();
    std::vector<std::vector<double>> errors_by_seed(cfg.n_seeds);

    for (std::size_t ei = 0; ei < cfg.eps_list.size(); ++ei) {
        for (int seed = 0; seed < cfg.n_seeds; ++seed) {
            SweepCell cell;
            cell.eps = cfg.eps_list[ei];
            cell.seed = derive_seed(cfg.base.seed, ei, static_cast<std::uint64_t>(seed));
            cell.h = cfg.h;
            cell.p = cfg.p;
            cell.control_no_holes = cfg.control_no_holes;
            try {
                pointprocess::ProcessParams params = cfg.base;
                params.eps = cell.eps;
                params.seed = cell.seed;
                pointprocess::Realization real = pointprocess::sample_realization(params);
                if (cfg.control_no_holes) real.points.clear();
                geometry::HoleSet holes = geometry::build_holes(real);
                MaskedGrid grid = rasterize(holes, box, cfg.h);
                Solution sol = solve_poisson(std::move(grid), cfg.f_const, cfg.tol);
                cell.iterations = sol.iterations;
                cell.residual = sol.residual;
                DarcyError de = darcy_error(sol, cell.eps, params.alpha, cfg.f_const,
                                            params.radii_law, params.lambda, cfg.p);
                cell.lp_error = de.lp_error;
                cell.core_mean = de.core_mean;
                cell.energy_norm = de.energy_norm;
                cell.poincare_ratio = de.poincare_ratio;
                errors_by_seed[seed].push_back(de.lp_error);
            } catch (const std::exception& e) {
                cell.error = e.what();
                errors_by_seed[seed].push_back(std::numeric_limits<double>::quiet_NaN());
            }
            report.cells.push_back(std::move(cell));
        }
    }

    // Error trend: strictly decreasing along the eps list for a majority of
    // seeds (the list is expected coarse-to-fine).
    int decreasing = 0, comparable = 0;
    for (int seed = 0; seed < cfg.n_seeds; ++seed) {
        const auto& e = errors_by_seed[seed];
        if (e.size() < 2) continue;
        bool ok = true, valid = true;
        for (std::size_t i = 0; i + 1 < e.size(); ++i) {
            if (std::isnan(e[i]) || std::isnan(e[i + 1])) valid = false;
            else if (!(e[i + 1] < e[i])) ok = false;
        }
        if (valid) {
            ++comparable;
            if (ok) ++decreasing;
        }
    }
    report.error_trend_decreasing = comparable > 0 && 2 * decreasing > comparable;

    double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
    for (const SweepCell& c : report.cells) {
        if (!c.error.empty() || c.energy_norm <= 0.0) continue;
        emin = std::min(emin, c.energy_norm);
        emax = std::max(emax, c.energy_norm);
    }
    report.energy_ratio = emin < std::numeric_limits<double>::infinity() ? emax / emin : 0.0;
    report.energy_bounded = report.energy_ratio > 0.0 && report.energy_ratio < 3.0;
    return report;
}

} // namespace darcy::fdsolver
