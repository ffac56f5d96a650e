#include "darcy/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"

namespace darcy::clusters {

using geometry::Ball;
using geometry::CellKey;
using geometry::CellKeyHash;
using geometry::HoleSet;

// ---------------------------------------------------------------------------
// Size classes
// ---------------------------------------------------------------------------

int class_of_radius(double radius, double eps, double kappa, int k_max) {
    if (radius < std::pow(eps, 1.0 + 2.0 * kappa)) return -3;
    if (radius >= std::pow(eps, 1.0 - k_max * kappa)) return k_max;
    for (int k = -2; k < k_max; ++k) {
        if (radius >= std::pow(eps, 1.0 - k * kappa) &&
            radius < std::pow(eps, 1.0 - (k + 1) * kappa))
            return k;
    }
    // Unreachable for radius in (0, inf); guard against NaN.
    return -3;
}

SizeClasses size_classes(const HoleSet& holes, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigInvalid("kappa", "must lie in (0,1)");
    SizeClasses sc;
    sc.kappa = kappa;
    sc.k_max = static_cast<int>(std::floor(1.0 / kappa)) + 1;
    sc.classes.assign(sc.k_max + 4, {});
    for (std::uint32_t i = 0; i < holes.balls.size(); ++i) {
        const int k = class_of_radius(holes.balls[i].radius, holes.eps, kappa, sc.k_max);
        sc.of(k).push_back(i);
    }
    return sc;
}

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent, rank_;
    explicit UnionFind(std::size_t n) : parent(n), rank_(n, 0) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }
};

bool dilated_overlap(const Ball& a, const Ball& b, double dilation) {
    const double rr = dilation * (a.radius + b.radius);
    return norm2(a.center - b.center) <= rr * rr;
}

/// Greedy clique restricted to one component: try each of the first few
/// members as an anchor and grow by pairwise intersection.
int greedy_clique_size(const std::vector<std::uint32_t>& comp, const HoleSet& holes,
                       double dilation) {
    const std::size_t tries = std::min<std::size_t>(comp.size(), 8);
    int best = comp.empty() ? 0 : 1;
    for (std::size_t t = 0; t < tries; ++t) {
        std::vector<std::uint32_t> clique{comp[t]};
        for (std::uint32_t cand : comp) {
            if (cand == comp[t]) continue;
            bool ok = true;
            for (std::uint32_t m : clique) {
                if (!dilated_overlap(holes.balls[cand], holes.balls[m], dilation)) {
                    ok = false;
                    break;
                }
            }
            if (ok) clique.push_back(cand);
        }
        best = std::max(best, static_cast<int>(clique.size()));
    }
    return best;
}

} // namespace

ChainReport detect_chains(const SizeClasses& classes, const HoleSet& holes, double dilation) {
    ChainReport report;
    report.dilation = dilation;
    for (int k = -3; k < classes.k_max; ++k) {
        PairChains pc;
        pc.k = k;
        std::vector<std::uint32_t> members = classes.of(k);
        members.insert(members.end(), classes.of(k + 1).begin(), classes.of(k + 1).end());
        if (!members.empty()) {
            double max_r = 0.0;
            for (std::uint32_t idx : members) max_r = std::max(max_r, holes.balls[idx].radius);
            const double cell = 2.0 * dilation * max_r;

            std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid;
            auto key = [&](const Vec3& p) {
                return CellKey{static_cast<std::int32_t>(std::floor(p.x / cell)),
                               static_cast<std::int32_t>(std::floor(p.y / cell)),
                               static_cast<std::int32_t>(std::floor(p.z / cell))};
            };
            for (std::uint32_t m = 0; m < members.size(); ++m)
                grid[key(holes.balls[members[m]].center)].push_back(m);

            UnionFind uf(members.size());
            for (std::uint32_t m = 0; m < members.size(); ++m) {
                const Ball& bm = holes.balls[members[m]];
                CellKey c = key(bm.center);
                for (std::int32_t i = c.i - 1; i <= c.i + 1; ++i)
                    for (std::int32_t j = c.j - 1; j <= c.j + 1; ++j)
                        for (std::int32_t l = c.k - 1; l <= c.k + 1; ++l) {
                            auto it = grid.find({i, j, l});
                            if (it == grid.end()) continue;
                            for (std::uint32_t other : it->second) {
                                if (other <= m) continue;
                                if (dilated_overlap(bm, holes.balls[members[other]], dilation))
                                    uf.unite(m, other);
                            }
                        }
            }
            std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> comps;
            for (std::uint32_t m = 0; m < members.size(); ++m)
                comps[uf.find(m)].push_back(members[m]);
            pc.max_component = members.empty() ? 0 : 1;
            for (auto& [root, comp] : comps) {
                pc.max_component = std::max(pc.max_component, static_cast<int>(comp.size()));
                if (comp.size() >= 2) {
                    std::sort(comp.begin(), comp.end());
                    pc.components.push_back(comp);
                }
            }
            std::sort(pc.components.begin(), pc.components.end());
            pc.greedy_clique = members.empty() ? 0 : 1;
            for (const auto& comp : pc.components)
                pc.greedy_clique =
                    std::max(pc.greedy_clique, greedy_clique_size(comp, holes, dilation));
        }
        report.pairs.push_back(std::move(pc));
    }
    return report;
}

ChainLemmaParams chain_lemma_params(double alpha, double beta, double kappa) {
    if (!(beta > 0.0)) throw InadmissibleLaw("chain parameters need beta > 0");
    ChainLemmaParams p;
    const double bound = std::min(beta / 6.0, alpha * alpha * beta / (6.0 + 2.0 * alpha * beta));
    p.kappa = kappa > 0.0 ? kappa : 0.9 * bound;
    if (p.kappa >= bound)
        throw ConfigInvalid("kappa", "must be below min(beta/6, alpha^2 beta/(6+2 alpha beta)) = " +
                                         fmt_double(bound));
    p.k_max = static_cast<int>(std::floor(1.0 / p.kappa)) + 1;
    // First class index whose emptiness probability already decays at the
    // target rate: k*kappa >= 1 - alpha^2 beta/(6+2 alpha beta).
    const double c_star = 1.0 - alpha * alpha * beta / (6.0 + 2.0 * alpha * beta);
    p.k0 = static_cast<int>(std::ceil(c_star / p.kappa - 1e-12));
    // Chain budget for the low classes, from the product bound p0 * p1^{M-1}.
    const double q = 3.0 / alpha + beta;
    const double f0 = alpha * beta + (-3.0 * p.kappa - 1.0) * q;
    const double need = alpha * beta / 2.0 - f0;
    p.M = 1 + std::max(0, static_cast<int>(std::ceil(need / (alpha * beta) - 1e-12)));
    p.exponent = alpha * beta / 2.0;
    return p;
}

Wilson wilson_interval(int hits, int n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double phat = static_cast<double>(hits) / n;
    const double z2n = z * z / n;
    const double center = (phat + z2n / 2.0) / (1.0 + z2n);
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2n / (4.0 * n)) / (1.0 + z2n);
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ChainSweep chain_probability_sweep(const pointprocess::ProcessParams& base, double kappa, int M,
                                   const std::vector<double>& eps_list, int n_seeds) {
    auto adm = pointprocess::check_admissibility(base.radii_law, base.alpha);
    if (adm.kind != pointprocess::AdmissibilityKind::AdmissibleStokes)
        throw InadmissibleLaw("chain sweep needs a finite 3/alpha+beta moment for some beta > 0");
    const double beta = std::min(adm.beta_sup, 1e6);
    auto lemma = chain_lemma_params(base.alpha, beta, kappa);

    ChainSweep sweep;
    sweep.kappa = kappa;
    sweep.M = M;
    sweep.k0 = lemma.k0;
    sweep.exponent = base.alpha * beta / 2.0;

    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
        pointprocess::ProcessParams params = base;
        params.eps = eps_list[ei];
        std::vector<ChainSweepRow> rows;
        int top_hits = 0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            params.seed = derive_seed(base.seed, ei, static_cast<std::uint64_t>(seed));
            auto real = pointprocess::sample_realization(params);
            auto holes = geometry::build_holes(real);
            auto classes = size_classes(holes, kappa);
            auto chains = detect_chains(classes, holes);
            if (rows.empty()) {
                rows.resize(chains.pairs.size());
                for (std::size_t p = 0; p < chains.pairs.size(); ++p) {
                    rows[p].eps = params.eps;
                    rows[p].k = chains.pairs[p].k;
                    rows[p].n_seeds = n_seeds;
                }
            }
            bool top_nonempty = false;
            for (std::size_t p = 0; p < chains.pairs.size(); ++p) {
                const PairChains& pc = chains.pairs[p];
                if (pc.greedy_clique >= M) ++rows[p].hits_clique;
                if (pc.max_component >= M) ++rows[p].hits_component;
                rows[p].max_component = std::max(rows[p].max_component, pc.max_component);
                rows[p].greedy_clique = std::max(rows[p].greedy_clique, pc.greedy_clique);
                if (pc.k >= lemma.k0 && pc.max_component >= 1) top_nonempty = true;
            }
            if (top_nonempty) ++top_hits;
        }
        sweep.top_nonempty_hits.push_back(top_hits);
        for (auto& row : rows) {
            row.phat = n_seeds > 0 ? static_cast<double>(row.hits_clique) / n_seeds : 0.0;
            Wilson w = wilson_interval(row.hits_clique, n_seeds);
            row.wilson_lo = w.lo;
            row.wilson_hi = w.hi;
            sweep.rows.push_back(row);
        }
    }
    return sweep;
}

// ---------------------------------------------------------------------------
// Good/bad partition
// ---------------------------------------------------------------------------

Partition good_bad_partition(const HoleSet& holes, const geometry::NeighborStats& stats,
                             double gamma, const PartitionOptions& opts) {
    if (!(gamma > 0.0 && gamma < holes.alpha - 1.0))
        throw ConfigInvalid("gamma", "must lie in (0, alpha-1)");

    const double eps = holes.eps;
    const double r_min = std::pow(eps, 1.0 + gamma / 2.0); // separation floor
    const double a_max = std::pow(eps, 1.0 + gamma);       // size ceiling
    const double clip = std::pow(eps, opts.clip_kappa);

    Partition part;
    part.gamma = gamma;
    const std::size_t n = holes.balls.size();
    part.is_good.assign(n, false);
    for (std::uint32_t i = 0; i < n; ++i) {
        part.is_good[i] = stats.R_eps[i] >= r_min && holes.balls[i].radius <= a_max;
    }

    auto safety_ball = [&](std::uint32_t i) {
        const Ball& b = holes.balls[i];
        return Ball{b.center, opts.theta_b * std::min(b.radius, clip), b.rho};
    };

    std::vector<Ball> safety;
    for (std::uint32_t i = 0; i < n; ++i)
        if (!part.is_good[i]) safety.push_back(safety_ball(i));

    // Demote good centers whose R/2-ball still meets the safety region; each
    // demotion enlarges D_b, so iterate until stable.
    std::vector<Ball> frontier = safety;
    while (!frontier.empty()) {
        geometry::SpatialIndex idx(frontier, std::max(eps, 1e-12));
        std::vector<std::uint32_t> cand;
        std::vector<Ball> added;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (!part.is_good[i]) continue;
            const Vec3& c = holes.balls[i].center;
            const double r2 = stats.R_eps[i] / 2.0;
            Box qbox{{c.x - r2, c.y - r2, c.z - r2}, {c.x + r2, c.y + r2, c.z + r2}};
            idx.query_box(qbox, cand);
            for (std::uint32_t f : cand) {
                const Ball& s = frontier[f];
                const double reach = r2 + s.radius;
                if (norm2(c - s.center) < reach * reach) {
                    part.is_good[i] = false;
                    ++part.violations_fixed;
                    added.push_back(safety_ball(i));
                    break;
                }
            }
        }
        safety.insert(safety.end(), added.begin(), added.end());
        frontier = std::move(added);
    }

    for (std::uint32_t i = 0; i < n; ++i) {
        if (part.is_good[i]) {
            part.good.push_back(i);
        } else {
            part.bad.push_back(i);
            part.cap_bound += holes.balls[i].rho;
            part.vanish_stat += std::pow(holes.balls[i].rho, 3.0 / holes.alpha);
        }
    }
    part.cap_bound *= holes.eps_alpha;
    part.vanish_stat *= eps * eps * eps;
    part.safety = std::move(safety);
    return part;
}

// ---------------------------------------------------------------------------
// Cluster hierarchy
// ---------------------------------------------------------------------------

Ball enclosing_ball(const Ball& a, const Ball& b) {
    const double d = norm(b.center - a.center);
    if (d + b.radius <= a.radius) return a;
    if (d + a.radius <= b.radius) return b;
    const double r = 0.5 * (d + a.radius + b.radius);
    const double t = (r - a.radius) / d; // along a->b
    Ball out;
    out.center = a.center + t * (b.center - a.center);
    out.radius = r;
    out.rho = std::max(a.rho, b.rho);
    return out;
}

namespace {

/// Center minimizing max_i(|c - c_i| + r_i) by subgradient steps; the radius
/// is evaluated exactly at the final center, so containment always holds.
CoverBall enclose_group(const std::vector<CoverBall>& balls,
                        const std::vector<std::uint32_t>& group) {
    CoverBall out;
    if (group.size() == 1) return balls[group[0]];
    if (group.size() == 2) {
        const CoverBall &a = balls[group[0]], &b = balls[group[1]];
        Ball m = enclosing_ball({a.center, a.radius, 0.0}, {b.center, b.radius, 0.0});
        out.center = m.center;
        out.radius = m.radius;
    } else {
        Vec3 c{0, 0, 0};
        for (std::uint32_t g : group) c += balls[g].center;
        c = c / static_cast<double>(group.size());
        double step = 0.0;
        for (std::uint32_t g : group)
            step = std::max(step, norm(balls[g].center - c) + balls[g].radius);
        for (int it = 0; it < 200; ++it) {
            double worst = -1.0;
            Vec3 dir{0, 0, 0};
            for (std::uint32_t g : group) {
                double v = norm(balls[g].center - c) + balls[g].radius;
                if (v > worst) {
                    worst = v;
                    dir = balls[g].center - c;
                }
            }
            double len = norm(dir);
            if (len < 1e-15) break;
            c += (step / len) * dir;
            step *= 0.85;
        }
        out.center = c;
        out.radius = 0.0;
        for (std::uint32_t g : group)
            out.radius = std::max(out.radius, norm(balls[g].center - c) + balls[g].radius);
    }
    out.rho_ref = 0.0;
    for (std::uint32_t g : group) {
        out.rho_ref = std::max(out.rho_ref, balls[g].rho_ref);
        out.members.insert(out.members.end(), balls[g].members.begin(), balls[g].members.end());
    }
    std::sort(out.members.begin(), out.members.end());
    return out;
}

} // namespace

ClusterHierarchy build_hierarchy(const SizeClasses& classes, const HoleSet& holes, double theta,
                                 double Lambda, int M) {
    if (!(theta > 1.0)) throw ConfigInvalid("theta", "must be > 1");
    if (!(Lambda >= theta * theta)) throw ConfigInvalid("Lambda", "must be >= theta^2");

    ClusterHierarchy hier;
    hier.theta = theta;
    hier.Lambda = Lambda;
    hier.M = M;
    hier.levels.assign(classes.classes.size(), {});

    const double th2 = theta * theta;
    const double size_cap = Lambda * std::pow(holes.eps, classes.kappa);

    for (int k = classes.k_max; k >= -3; --k) {
        std::vector<CoverBall> level;
        for (std::uint32_t idx : classes.of(k)) {
            CoverBall cb;
            cb.center = holes.balls[idx].center;
            cb.radius = holes.balls[idx].radius;
            cb.rho_ref = holes.balls[idx].rho;
            cb.lambda = 1.0;
            cb.members = {idx};
            level.push_back(std::move(cb));
        }
        // Merge until theta^2-dilates are pairwise disjoint.
        bool merged = true;
        while (merged && level.size() > 1) {
            merged = false;
            double max_r = 0.0;
            for (const CoverBall& cb : level) max_r = std::max(max_r, cb.radius);
            const double cell = std::max(2.0 * th2 * max_r, 1e-12);
            std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid;
            auto key = [&](const Vec3& p) {
                return CellKey{static_cast<std::int32_t>(std::floor(p.x / cell)),
                               static_cast<std::int32_t>(std::floor(p.y / cell)),
                               static_cast<std::int32_t>(std::floor(p.z / cell))};
            };
            for (std::uint32_t i = 0; i < level.size(); ++i)
                grid[key(level[i].center)].push_back(i);
            UnionFind uf(level.size());
            for (std::uint32_t i = 0; i < level.size(); ++i) {
                CellKey c = key(level[i].center);
                for (std::int32_t a = c.i - 1; a <= c.i + 1; ++a)
                    for (std::int32_t b = c.j - 1; b <= c.j + 1; ++b)
                        for (std::int32_t g = c.k - 1; g <= c.k + 1; ++g) {
                            auto it = grid.find({a, b, g});
                            if (it == grid.end()) continue;
                            for (std::uint32_t j : it->second) {
                                if (j <= i) continue;
                                const double rr = th2 * (level[i].radius + level[j].radius);
                                if (norm2(level[i].center - level[j].center) < rr * rr)
                                    uf.unite(i, j);
                            }
                        }
            }
            std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> groups;
            for (std::uint32_t i = 0; i < level.size(); ++i) groups[uf.find(i)].push_back(i);
            if (groups.size() == level.size()) break;
            merged = true;
            std::vector<CoverBall> next;
            std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> ordered(
                groups.begin(), groups.end());
            std::sort(ordered.begin(), ordered.end(),
                      [](const auto& a, const auto& b) { return a.second[0] < b.second[0]; });
            for (auto& [root, group] : ordered) next.push_back(enclose_group(level, group));
            level = std::move(next);
        }
        for (CoverBall& cb : level) {
            cb.lambda = cb.radius / (holes.eps_alpha * cb.rho_ref);
            if (cb.lambda < 1.0) cb.lambda = 1.0; // enclosing radius >= largest member
        }
        hier.levels[k + 3] = std::move(level);
    }

    // Feasibility: lambda budget and size cap ...
    for (const auto& level : hier.levels)
        for (const CoverBall& cb : level) {
            if (cb.lambda > Lambda) {
                hier.offending = cb.members;
                hier.failure = "lambda " + fmt_double(cb.lambda) + " exceeds Lambda";
                return hier;
            }
            if (cb.radius > size_cap) {
                hier.offending = cb.members;
                hier.failure = "covering radius " + fmt_double(cb.radius) +
                               " exceeds Lambda*eps^kappa = " + fmt_double(size_cap);
                return hier;
            }
        }
    // ... cross-level separation: original balls of class k must avoid the
    // theta-dilates of every lower-level covering ball.
    for (int k = -3; k <= classes.k_max; ++k) {
        for (std::uint32_t idx : classes.of(k)) {
            const Ball& orig = holes.balls[idx];
            for (int l = -3; l < k; ++l) {
                for (const CoverBall& cb : hier.levels[l + 3]) {
                    const double rr = orig.radius + theta * cb.radius;
                    if (norm2(orig.center - cb.center) < rr * rr) {
                        hier.offending = cb.members;
                        hier.offending.push_back(idx);
                        hier.failure = "class " + std::to_string(k) +
                                       " ball meets a theta-dilated level-" + std::to_string(l) +
                                       " covering ball";
                        return hier;
                    }
                }
            }
        }
    }
    hier.feasible = true;
    return hier;
}

} // namespace darcy::clusters
