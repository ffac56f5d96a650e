#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darcy/geometry.hpp"
#include "darcy/pointprocess.hpp"

namespace darcy::clusters {

/// Dyadic-in-exponent size classes of the hole radii. Class k holds centers
/// with eps^{1-k*kappa} <= eps^alpha*rho < eps^{1-(k+1)*kappa}; class -3
/// catches everything below eps^{1+2*kappa} and class k_max everything at or
/// above eps^{1-k_max*kappa}. Intervals are half-open (left-closed), so a
/// radius sitting exactly on a threshold joins the class whose infimum it is.
struct SizeClasses {
    double kappa = 0.0;
    int k_max = 0;
    std::vector<std::vector<std::uint32_t>> classes; // index 0 <-> k = -3

    int k_lo() const { return -3; }
    std::vector<std::uint32_t>& of(int k) { return classes[k + 3]; }
    const std::vector<std::uint32_t>& of(int k) const { return classes[k + 3]; }
    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.size();
        return n;
    }
};

SizeClasses size_classes(const geometry::HoleSet& holes, double kappa);

/// Class membership of a single radius value (exposed for property tests).
int class_of_radius(double radius, double eps, double kappa, int k_max);

/// Connectivity of the 4-dilated balls within each class pair I_k u I_{k+1}.
struct PairChains {
    int k = 0;                 // the pair (I_k, I_{k+1})
    int max_component = 0;     // largest connected component of the dilated graph
    int greedy_clique = 0;     // greedy lower bound on the largest chain (clique)
    std::vector<std::vector<std::uint32_t>> components; // membership (size >= 2 only)
};

struct ChainReport {
    double dilation = 4.0;
    std::vector<PairChains> pairs; // k = -3 .. k_max-1 in order
};

ChainReport detect_chains(const SizeClasses& classes, const geometry::HoleSet& holes,
                          double dilation = 4.0);

/// Parameters with which the chain lemma runs: admissible kappa, the class
/// count, the first "top" class k0, and the chain-length budget M, together
/// with the probability decay exponent alpha*beta/2.
struct ChainLemmaParams {
    double kappa = 0.0;
    int k_max = 0;
    int k0 = 0;
    int M = 0;
    double exponent = 0.0;
};

ChainLemmaParams chain_lemma_params(double alpha, double beta, double kappa = 0.0);

struct ChainSweepRow {
    double eps = 0.0;
    int k = 0;
    int n_seeds = 0;
    int hits_clique = 0;    // seeds with a greedy chain of length >= M in the pair
    int hits_component = 0; // seeds with a connected component of size >= M
    int max_component = 0;  // largest component seen over all seeds
    int greedy_clique = 0;  // largest greedy clique seen over all seeds
    double phat = 0.0;      // hits_clique / n_seeds
    double wilson_lo = 0.0, wilson_hi = 0.0;
};

struct ChainSweep {
    double kappa = 0.0;
    int M = 0;
    int k0 = 0;            // first class index the lemma empties outright
    double exponent = 0.0; // theoretical decay alpha*beta/2
    std::vector<ChainSweepRow> rows;
    /// Per eps: number of seeds where some pair with k >= k0 is nonempty
    /// (the emptiness event the lemma controls in the top classes).
    std::vector<int> top_nonempty_hits;
};

/// Monte Carlo frequencies of chains of length >= M per class pair across an
/// eps sweep. Throws InadmissibleLaw when the law has no finite 3/alpha+beta
/// moment for any beta > 0.
ChainSweep chain_probability_sweep(const pointprocess::ProcessParams& base, double kappa, int M,
                                   const std::vector<double>& eps_list, int n_seeds);

struct Wilson {
    double lo = 0.0, hi = 0.0;
};
Wilson wilson_interval(int hits, int n, double z = 1.96);

/// Good/bad split of the holes: good centers are isolated (R_eps >= eps^{1+gamma/2})
/// and small (eps^alpha*rho <= eps^{1+gamma}); everything else is bad. The
/// safety region D_b is the union of dilated bad balls, and good centers whose
/// R/2-ball still meets D_b are demoted until none are left.
struct PartitionOptions {
    double theta_b = 2.0;    // dilation of the bad balls forming D_b
    double clip_kappa = 0.15; // bad-ball radii are clipped at eps^clip_kappa
};

struct Partition {
    double gamma = 0.0;
    std::vector<std::uint32_t> good; // indices into the hole set
    std::vector<std::uint32_t> bad;
    std::vector<geometry::Ball> safety; // D_b as a union of balls
    double cap_bound = 0.0;   // eps^alpha * sum_bad rho
    double vanish_stat = 0.0; // eps^3 * sum_bad rho^{3/alpha}
    int violations_fixed = 0; // demotions needed to clear the separation property
    std::vector<bool> is_good; // per hole index
};

Partition good_bad_partition(const geometry::HoleSet& holes, const geometry::NeighborStats& stats,
                             double gamma, const PartitionOptions& opts = {});

/// One covering ball of the cluster hierarchy.
struct CoverBall {
    Vec3 center;
    double radius = 0.0;
    double lambda = 1.0; // radius / (eps^alpha * rho_ref)
    double rho_ref = 1.0;
    std::vector<std::uint32_t> members; // original hole indices
};

struct ClusterHierarchy {
    double theta = 2.0;
    double Lambda = 64.0;
    int M = 0;
    bool feasible = false;
    std::vector<std::vector<CoverBall>> levels; // index 0 <-> k = -3
    std::vector<std::uint32_t> offending;       // violating group when infeasible
    std::string failure; // which invariant broke, empty when feasible
};

/// Greedy realization of the cluster hierarchy: per level, from the largest
/// class down, overlapping theta^2-dilates are merged into one enclosing
/// ball. Feasible iff inclusion, same-level separation, cross-level
/// separation and the size cap all hold with lambda <= Lambda.
ClusterHierarchy build_hierarchy(const SizeClasses& classes, const geometry::HoleSet& holes,
                                 double theta, double Lambda, int M);

/// Smallest ball enclosing two balls (exact; used as the merge primitive and
/// as the test oracle for pairwise merges).
geometry::Ball enclosing_ball(const geometry::Ball& a, const geometry::Ball& b);

} // namespace darcy::clusters
