#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darcy/geometry.hpp"
#include "darcy/gridcg.hpp"
#include "darcy/pointprocess.hpp"

namespace darcy::fdsolver {

/// Node classification of the perforated box: holes and the outer boundary
/// carry homogeneous Dirichlet data, the rest are unknowns.
struct MaskedGrid {
    gridcg::GridGeom geom;
    std::vector<gridcg::NodeState> state;
    std::size_t n_hole = 0;
    std::size_t n_interior = 0;
    double hole_fraction = 0.0; // holes / non-face nodes
};

/// Classifies nodes against the hole set. Requires h <= min(radius)/3 and
/// names the smallest offending ball otherwise.
MaskedGrid rasterize(const geometry::HoleSet& holes, const Box& box, double h);

struct Solution {
    gridcg::MaskedPoisson problem; // owns geometry and mask
    std::vector<double> u;         // compact values on unknowns
    int iterations = 0;
    double residual = 0.0;

    double value(int i, int j, int k) const {
        return problem.value_at(problem.geom().id(i, j, k), u);
    }
};

/// -lap(u) = f on the pore space, u = 0 on holes and the box faces, by
/// conjugate gradients to relative residual <= tol.
Solution solve_poisson(MaskedGrid grid, double f_const, double tol = 1e-8);

/// sum h^3 f u over the pore nodes (left side of the discrete energy identity).
double load_work(const Solution& sol, double f_const);

struct DarcyError {
    double lp_error = 0.0;       // ||sigma^2 u - k f||_Lp over core pore nodes
    double p = 1.0;
    double core_mean = 0.0;      // mean of sigma^2 u over core pore nodes
    double k_target = 0.0;       // (4 pi lambda E[rho])^{-1}
    double energy_norm = 0.0;    // sigma * sqrt(sum h^3 |grad_h u|^2)
    double poincare_ratio = 0.0; // ||u||_L2 / (sigma^{-1}(1+|log eps|^{3/2})||grad u||_L2)
    std::size_t core_nodes = 0;
};

/// Core region: pore nodes farther than 0.1*diam(box) from the box boundary.
DarcyError darcy_error(const Solution& sol, double eps, double alpha, double f_const,
                       const pointprocess::RadiiLaw& law, double lambda, double p);

struct SweepCell {
    double eps = 0.0;
    std::uint64_t seed = 0;
    double h = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double lp_error = 0.0;
    double p = 1.0;
    double core_mean = 0.0;
    double energy_norm = 0.0;
    double poincare_ratio = 0.0;
    bool control_no_holes = false; // flagged: no-hole control run, no plateau
    std::string error;             // nonempty when this cell failed
};

struct ConvergenceReport {
    std::vector<SweepCell> cells;
    double k_target = 0.0;
    bool error_trend_decreasing = false; // per-seed majority across the eps list
    double energy_ratio = 0.0;           // max/min energy norm across cells
    bool energy_bounded = false;         // ratio < 3
};

struct SweepConfig {
    pointprocess::ProcessParams base; // eps overridden per entry
    std::vector<double> eps_list;
    int n_seeds = 1;
    double h = 1.0 / 64.0;
    double f_const = 1.0;
    double p = 1.0;
    double tol = 1e-8;
    bool control_no_holes = false;
};

/// Runs the (eps, seed) grid, aggregates norms and trend verdicts; individual
/// cell failures are recorded, never fatal for the sweep.
ConvergenceReport convergence_sweep(const SweepConfig& cfg);

} // namespace darcy::fdsolver
