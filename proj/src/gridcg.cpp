#include "darcy/gridcg.hpp"

#include <cmath>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"

namespace darcy::gridcg {

namespace {
constexpr std::size_t kBlock = 8192; // fixed reduction block, scheduling-proof

double dirichlet_value(NodeState s) { return s == NodeState::One ? 1.0 : 0.0; }
} // namespace

MaskedPoisson::MaskedPoisson(GridGeom geom, std::vector<NodeState> state)
    : geom_(geom), state_(std::move(state)) {
    const std::size_t n = geom_.size();
    idx_.assign(n, -1);
    for (std::size_t m = 0; m < n; ++m) {
        if (state_[m] == NodeState::Free) {
            idx_[m] = static_cast<std::int64_t>(nodes_.size());
            nodes_.push_back(m);
        }
    }
    // Fold Dirichlet neighbors into the right-hand side once.
    const double inv_h2 = 1.0 / (geom_.h * geom_.h);
    bc_rhs_.assign(nodes_.size(), 0.0);
    const std::size_t sx = 1, sy = geom_.nx,
                      sz = static_cast<std::size_t>(geom_.nx) * geom_.ny;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        const std::size_t node = nodes_[m];
        const int i = static_cast<int>(node % geom_.nx);
        const int j = static_cast<int>((node / geom_.nx) % geom_.ny);
        const int k = static_cast<int>(node / (static_cast<std::size_t>(geom_.nx) * geom_.ny));
        double acc = 0.0;
        auto add = [&](bool in_range, std::size_t nbr) {
            if (!in_range) return;
            if (state_[nbr] != NodeState::Free) acc += dirichlet_value(state_[nbr]);
        };
        add(i > 0, node - sx);
        add(i < geom_.nx - 1, node + sx);
        add(j > 0, node - sy);
        add(j < geom_.ny - 1, node + sy);
        add(k > 0, node - sz);
        add(k < geom_.nz - 1, node + sz);
        bc_rhs_[m] = acc * inv_h2;
    }
}

void MaskedPoisson::apply(const std::vector<double>& x, std::vector<double>& y) const {
    const double inv_h2 = 1.0 / (geom_.h * geom_.h);
    const std::size_t sy = geom_.nx, sz = static_cast<std::size_t>(geom_.nx) * geom_.ny;
    const std::int64_t n = static_cast<std::int64_t>(nodes_.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t m = 0; m < n; ++m) {
        const std::size_t node = nodes_[m];
        const int i = static_cast<int>(node % geom_.nx);
        const int j = static_cast<int>((node / geom_.nx) % geom_.ny);
        const int k = static_cast<int>(node / sz);
        double acc = 6.0 * x[m];
        auto sub = [&](bool in_range, std::size_t nbr) {
            if (!in_range) return;
            std::int64_t q = idx_[nbr];
            if (q >= 0) acc -= x[q];
        };
        sub(i > 0, node - 1);
        sub(i < geom_.nx - 1, node + 1);
        sub(j > 0, node - sy);
        sub(j < geom_.ny - 1, node + sy);
        sub(k > 0, node - sz);
        sub(k < geom_.nz - 1, node + sz);
        y[m] = acc * inv_h2;
    }
}

double MaskedPoisson::dot(const std::vector<double>& a, const std::vector<double>& b) const {
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
        const std::size_t lo = blk * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        partial[blk] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v; // fixed order
    return s;
}

std::vector<double> MaskedPoisson::solve(const std::vector<double>& f_free, double tol,
                                         SolveStats* stats, int max_iter_override) const {
    const std::size_t n = nodes_.size();
    std::vector<double> u(n, 0.0);
    if (n == 0) {
        if (stats) *stats = {0, 0.0};
        return u;
    }
    std::vector<double> r(bc_rhs_);
    if (!f_free.empty()) {
        for (std::size_t m = 0; m < n; ++m) r[m] += f_free[m];
    }
    const double rhs_norm = std::sqrt(dot(r, r));
    if (rhs_norm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return u;
    }
    std::vector<double> p(r), Ap(n, 0.0);
    double rr = dot(r, r);
    const int max_iter = max_iter_override > 0
                             ? max_iter_override
                             : static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 50;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::sqrt(rr) <= tol * rhs_norm) break;
        apply(p, Ap);
        const double pAp = dot(p, Ap);
        const double alpha = rr / pAp;
        const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < nn; ++i) {
            u[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < nn; ++i) p[i] = r[i] + beta * p[i];
    }
    const double rel = std::sqrt(rr) / rhs_norm;
    if (rel > tol) {
        throw SolverDiverged("conjugate gradients stalled at relative residual " +
                             fmt_double(rel) + " after " + fmt_u64(it) + " iterations");
    }
    if (stats) *stats = {it, rel};
    return u;
}

double MaskedPoisson::value_at(std::size_t node, const std::vector<double>& u) const {
    const std::int64_t q = idx_[node];
    if (q >= 0) return u[q];
    return dirichlet_value(state_[node]);
}

double MaskedPoisson::dirichlet_energy(const std::vector<double>& u) const {
    const std::size_t sy = geom_.nx, sz = static_cast<std::size_t>(geom_.nx) * geom_.ny;
    const std::int64_t nzl = geom_.nz;
    const std::size_t nblocks = static_cast<std::size_t>(nzl);
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < nzl; ++k) {
        double s = 0.0;
        for (int j = 0; j < geom_.ny; ++j)
            for (int i = 0; i < geom_.nx; ++i) {
                const std::size_t node = geom_.id(i, j, k);
                const double v = value_at(node, u);
                if (i + 1 < geom_.nx) {
                    const double d = value_at(node + 1, u) - v;
                    s += d * d;
                }
                if (j + 1 < geom_.ny) {
                    const double d = value_at(node + sy, u) - v;
                    s += d * d;
                }
                if (k + 1 < nzl) {
                    const double d = value_at(node + sz, u) - v;
                    s += d * d;
                }
            }
        partial[k] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return geom_.h * s;
}

} // namespace darcy::gridcg
