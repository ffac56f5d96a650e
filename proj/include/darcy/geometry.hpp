#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "darcy/domain.hpp"
#include "darcy/pointprocess.hpp"
#include "darcy/vec3.hpp"

namespace darcy::geometry {

struct Ball {
    Vec3 center;   // physical position eps*z
    double radius; // eps^alpha * rho
    double rho;    // the mark
};

struct CellKey {
    std::int32_t i, j, k;
    bool operator==(const CellKey& o) const { return i == o.i && j == o.j && k == o.k; }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const {
        std::uint64_t h = static_cast<std::uint32_t>(c.i);
        h = h * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(c.j);
        h = h * 0xC2B2AE3D27D4EB4Full + static_cast<std::uint32_t>(c.k);
        h ^= h >> 29;
        return static_cast<std::size_t>(h * 0x94D049BB133111EBull);
    }
};

/// Uniform spatial hash over ball centers with a separate bucket for the few
/// balls larger than the cell size, so queries stay exact (no false negatives)
/// under heavy-tailed radii.
class SpatialIndex {
  public:
    SpatialIndex() = default;
    SpatialIndex(const std::vector<Ball>& balls, double cell_size);

    /// Indices of every ball possibly intersecting the axis-aligned box;
    /// callers do the exact test. Never misses an intersecting ball.
    void query_box(const Box& box, std::vector<std::uint32_t>& out) const;

    /// Indices of balls whose center lies in the box (exact).
    void query_centers(const Box& box, std::vector<std::uint32_t>& out) const;

    bool any_ball_contains(const Vec3& p) const;

    double cell_size() const { return cell_; }

  private:
    CellKey key_of(const Vec3& p) const;

    const std::vector<Ball>* balls_ = nullptr;
    double cell_ = 1.0;
    double small_radius_cap_ = 0.0; // balls above this live in large_
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> by_cell_;
    std::vector<std::uint32_t> large_;
};

/// The physical hole set H^eps: one ball of radius eps^alpha*rho per center.
struct HoleSet {
    double eps = 0.0;
    double alpha = 0.0;
    double eps_alpha = 0.0; // eps^alpha, computed once
    DomainSpec domain;
    std::vector<Ball> balls;
    std::vector<Vec3> centers_blownup; // the z coordinates (center/eps)
    SpatialIndex index;                // cell size ~ eps
};

HoleSet build_holes(const pointprocess::Realization& real);

/// Per-center separation statistics at the blown-up scale and their physical
/// rescalings. d is half the nearest-neighbor distance; isolated centers get
/// d = +inf and R = 1/2.
struct NeighborStats {
    std::vector<double> d;       // half min distance to other centers (blown-up)
    std::vector<double> R;       // min(d, 1/2)
    std::vector<double> R_eps;   // eps * R
    std::vector<double> r_hat;   // Voronoi diameter proxy; filled on demand
};

NeighborStats neighbor_stats(const HoleSet& holes);

struct VolumeFraction {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_samples = 0;
};

/// Monte Carlo estimate of |H^eps cap D| / |D|.
VolumeFraction volume_fraction(const HoleSet& holes, std::uint64_t n_samples, std::uint64_t seed);

/// True iff a single ball swallows the whole domain.
bool is_covered(const HoleSet& holes);

/// Directional proxy for the Voronoi cell diameters r_z at the blown-up
/// scale: chords through each center along sampled directions, cut by the
/// bisector planes of the neighbors and clipped at the blown-up domain.
/// Underestimates the true diameter by at most the directional slack.
std::vector<double> voronoi_diameter_proxy(const HoleSet& holes, const NeighborStats& stats,
                                           int n_directions = 64);

/// The sampled direction set (26 lattice directions first, then a Fibonacci
/// sphere fill). Exposed for the slack analysis in tests.
std::vector<Vec3> proxy_directions(int n_directions);

/// Poincare constant of the perforated domain from the cell-diameter proxies:
/// C(p)^p = (eps^3 sum r^{6/(2-p)})^{(2-p)/2} for p in [1,2),
/// C(2)^2 = min(eps^3 sum exp(r^2), 1).
double poincare_constant(double eps, const std::vector<double>& r_hat, double p);

} // namespace darcy::geometry
