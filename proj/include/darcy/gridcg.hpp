#pragma once

#include <cstdint>
#include <vector>

#include "darcy/domain.hpp"
#include "darcy/vec3.hpp"

namespace darcy::gridcg {

enum class NodeState : std::uint8_t {
    Free = 0, // unknown of the linear system
    Zero = 1, // Dirichlet u = 0 (outer boundary, holes)
    One = 2,  // Dirichlet u = 1 (capacity conductor)
};

struct GridGeom {
    Vec3 origin;
    double h = 0.0;
    int nx = 0, ny = 0, nz = 0;

    std::size_t size() const {
        return static_cast<std::size_t>(nx) * ny * static_cast<std::size_t>(nz);
    }
    std::size_t id(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    Vec3 pos(int i, int j, int k) const {
        return {origin.x + h * i, origin.y + h * j, origin.z + h * k};
    }
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Matrix-free 7-point Laplacian with mixed Dirichlet data on a uniform grid.
/// CG with fixed-block reductions: results are independent of thread count.
class MaskedPoisson {
  public:
    MaskedPoisson(GridGeom geom, std::vector<NodeState> state);

    const GridGeom& geom() const { return geom_; }
    const std::vector<NodeState>& state() const { return state_; }
    std::size_t unknowns() const { return nodes_.size(); }

    /// Solves -lap(u) = f with the stored Dirichlet data. `f_free` is either
    /// empty (f = 0) or one value per unknown in unknown order. Returns the
    /// compact solution vector. Throws SolverDiverged past the iteration cap.
    std::vector<double> solve(const std::vector<double>& f_free, double tol,
                              SolveStats* stats = nullptr, int max_iter_override = 0) const;

    /// Full-grid value of a node given the compact solution.
    double value_at(std::size_t node, const std::vector<double>& u) const;

    /// h * sum over grid links of (u_i - u_j)^2, with Dirichlet values filled
    /// in. For the capacity potential this is the Dirichlet energy.
    double dirichlet_energy(const std::vector<double>& u) const;

    /// One value per unknown, in unknown order (for building f vectors).
    template <class F>
    std::vector<double> sample_free(F&& f) const {
        std::vector<double> out(nodes_.size());
        for (std::size_t m = 0; m < nodes_.size(); ++m) out[m] = f(nodes_[m]);
        return out;
    }

    const std::vector<std::size_t>& free_nodes() const { return nodes_; }
    std::int64_t unknown_index(std::size_t node) const { return idx_[node]; }

  private:
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    double dot(const std::vector<double>& a, const std::vector<double>& b) const;

    GridGeom geom_;
    std::vector<NodeState> state_;
    std::vector<std::int64_t> idx_;       // node -> unknown index or -1
    std::vector<std::size_t> nodes_;      // unknown -> node
    std::vector<double> bc_rhs_;          // Dirichlet coupling, one per unknown
};

} // namespace darcy::gridcg
