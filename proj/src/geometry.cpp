#include "darcy/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "darcy/errors.hpp"

namespace darcy::geometry {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// SpatialIndex
// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(const std::vector<Ball>& balls, double cell_size)
    : balls_(&balls), cell_(cell_size > 0 ? cell_size : 1.0) {
    small_radius_cap_ = cell_;
    for (std::uint32_t i = 0; i < balls.size(); ++i) {
        if (balls[i].radius > small_radius_cap_) {
            large_.push_back(i);
        } else {
            by_cell_[key_of(balls[i].center)].push_back(i);
        }
    }
}

CellKey SpatialIndex::key_of(const Vec3& p) const {
    return {static_cast<std::int32_t>(std::floor(p.x / cell_)),
            static_cast<std::int32_t>(std::floor(p.y / cell_)),
            static_cast<std::int32_t>(std::floor(p.z / cell_))};
}

void SpatialIndex::query_box(const Box& box, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (!balls_) return;
    // A small ball intersecting the box has its center within small_radius_cap_.
    Box inflated{box.lo - Vec3{small_radius_cap_, small_radius_cap_, small_radius_cap_},
                 box.hi + Vec3{small_radius_cap_, small_radius_cap_, small_radius_cap_}};
    CellKey lo = key_of(inflated.lo), hi = key_of(inflated.hi);
    for (std::int32_t i = lo.i; i <= hi.i; ++i)
        for (std::int32_t j = lo.j; j <= hi.j; ++j)
            for (std::int32_t k = lo.k; k <= hi.k; ++k) {
                auto it = by_cell_.find({i, j, k});
                if (it == by_cell_.end()) continue;
                out.insert(out.end(), it->second.begin(), it->second.end());
            }
    out.insert(out.end(), large_.begin(), large_.end());
}

void SpatialIndex::query_centers(const Box& box, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (!balls_) return;
    CellKey lo = key_of(box.lo), hi = key_of(box.hi);
    for (std::int32_t i = lo.i; i <= hi.i; ++i)
        for (std::int32_t j = lo.j; j <= hi.j; ++j)
            for (std::int32_t k = lo.k; k <= hi.k; ++k) {
                auto it = by_cell_.find({i, j, k});
                if (it != by_cell_.end())
                    for (std::uint32_t idx : it->second)
                        if (box.contains((*balls_)[idx].center)) out.push_back(idx);
            }
    for (std::uint32_t idx : large_)
        if (box.contains((*balls_)[idx].center)) out.push_back(idx);
}

bool SpatialIndex::any_ball_contains(const Vec3& p) const {
    if (!balls_) return false;
    auto hit = [&](std::uint32_t idx) {
        const Ball& b = (*balls_)[idx];
        return norm2(p - b.center) <= b.radius * b.radius;
    };
    CellKey c = key_of(p);
    for (std::int32_t i = c.i - 1; i <= c.i + 1; ++i)
        for (std::int32_t j = c.j - 1; j <= c.j + 1; ++j)
            for (std::int32_t k = c.k - 1; k <= c.k + 1; ++k) {
                auto it = by_cell_.find({i, j, k});
                if (it == by_cell_.end()) continue;
                for (std::uint32_t idx : it->second)
                    if (hit(idx)) return true;
            }
    for (std::uint32_t idx : large_)
        if (hit(idx)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// HoleSet
// ---------------------------------------------------------------------------

HoleSet build_holes(const pointprocess::Realization& real) {
    HoleSet h;
    h.eps = real.params.eps;
    h.alpha = real.params.alpha;
    h.eps_alpha = std::pow(h.eps, h.alpha);
    h.domain = real.params.domain;
    h.balls.reserve(real.points.size());
    h.centers_blownup.reserve(real.points.size());
    for (const auto& p : real.points) {
        h.balls.push_back({h.eps * p.z, h.eps_alpha * p.rho, p.rho});
        h.centers_blownup.push_back(p.z);
    }
    h.index = SpatialIndex(h.balls, h.eps);
    return h;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor separations
// ---------------------------------------------------------------------------

namespace {

/// Grid over the blown-up centers for exact nearest-neighbor queries via
/// expanding ring search.
class CenterGrid {
  public:
    CenterGrid(const std::vector<Vec3>& pts, double cell) : pts_(pts), cell_(cell) {
        span_ = cell_;
        if (!pts.empty()) {
            Vec3 lo = pts[0], hi = pts[0];
            for (const Vec3& p : pts) {
                lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
                hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
            }
            span_ = std::max(span_, norm(hi - lo));
        }
        for (std::uint32_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    double nearest_other(std::uint32_t self) const {
        const Vec3& p = pts_[self];
        CellKey c = key(p);
        double best = kInf;
        for (int ring = 0;; ++ring) {
            // Points in ring r sit at distance >= (r-1)*cell from p, so once
            // best beats that floor no farther ring can improve it.
            double ring_floor = ring > 0 ? (ring - 1) * cell_ : 0.0;
            if (best <= ring_floor * ring_floor) break;
            if (ring_floor > span_ + cell_) break;
            scan_ring(c, ring, p, self, best);
        }
        return std::sqrt(best);
    }

  private:
    CellKey key(const Vec3& p) const {
        return {static_cast<std::int32_t>(std::floor(p.x / cell_)),
                static_cast<std::int32_t>(std::floor(p.y / cell_)),
                static_cast<std::int32_t>(std::floor(p.z / cell_))};
    }

    void scan_ring(const CellKey& c, int ring, const Vec3& p, std::uint32_t self,
                   double& best) const {
        for (std::int32_t i = c.i - ring; i <= c.i + ring; ++i)
            for (std::int32_t j = c.j - ring; j <= c.j + ring; ++j)
                for (std::int32_t k = c.k - ring; k <= c.k + ring; ++k) {
                    if (std::max({std::abs(i - c.i), std::abs(j - c.j), std::abs(k - c.k)}) != ring)
                        continue;
                    auto it = cells_.find({i, j, k});
                    if (it == cells_.end()) continue;
                    for (std::uint32_t idx : it->second) {
                        if (idx == self) continue;
                        best = std::min(best, norm2(pts_[idx] - p));
                    }
                }
    }

    const std::vector<Vec3>& pts_;
    double cell_;
    double span_;
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

double typical_spacing(const HoleSet& holes) {
    const double vol = holes.domain.scaled(1.0 / holes.eps).volume();
    const double n = std::max<std::size_t>(holes.balls.size(), 1);
    return std::cbrt(vol / n);
}

} // namespace

NeighborStats neighbor_stats(const HoleSet& holes) {
    NeighborStats s;
    const std::size_t n = holes.centers_blownup.size();
    s.d.resize(n);
    s.R.resize(n);
    s.R_eps.resize(n);
    if (n == 0) return s;
    if (n == 1) {
        s.d[0] = kInf;
        s.R[0] = 0.5;
        s.R_eps[0] = 0.5 * holes.eps;
        return s;
    }
    CenterGrid grid(holes.centers_blownup, typical_spacing(holes));
    for (std::size_t i = 0; i < n; ++i) {
        double nn = grid.nearest_other(static_cast<std::uint32_t>(i));
        s.d[i] = 0.5 * nn;
        s.R[i] = std::min(s.d[i], 0.5);
        s.R_eps[i] = holes.eps * s.R[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Coverage and volume statistics
// ---------------------------------------------------------------------------

VolumeFraction volume_fraction(const HoleSet& holes, std::uint64_t n_samples,
                               std::uint64_t seed) {
    VolumeFraction vf;
    vf.n_samples = n_samples;
    if (n_samples == 0) return vf;
    Rng rng = Rng::stream(seed, 0x70F);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        Vec3 p = holes.domain.sample(rng);
        if (holes.index.any_ball_contains(p)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    vf.estimate = p;
    vf.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    return vf;
}

bool is_covered(const HoleSet& holes) {
    const Vec3 c0 = holes.domain.center();
    const double circ = holes.domain.circumradius();
    for (const Ball& b : holes.balls) {
        if (norm(b.center - c0) + circ <= b.radius) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Voronoi diameter proxy
// ---------------------------------------------------------------------------

std::vector<Vec3> proxy_directions(int n_directions) {
    std::vector<Vec3> dirs;
    // The 26 axis/edge/corner directions come first: they pin down lattice
    // cells exactly and make the worst-case slack easy to state.
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                Vec3 v{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
                dirs.push_back(v / norm(v));
            }
    // Extra directions come in antipodal pairs from a Fibonacci hemisphere,
    // so every sample still measures a full chord through the center.
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    const int n_pairs = std::max(0, (n_directions - 26 + 1) / 2);
    for (int m = 0; m < n_pairs; ++m) {
        double y = (m + 0.5) / n_pairs; // upper hemisphere only
        double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        double phi = golden * m;
        Vec3 v{r * std::cos(phi), y, r * std::sin(phi)};
        dirs.push_back(v);
        dirs.push_back({-v.x, -v.y, -v.z});
    }
    return dirs;
}

std::vector<double> voronoi_diameter_proxy(const HoleSet& holes, const NeighborStats& stats,
                                           int n_directions) {
    const std::vector<Vec3>& pts = holes.centers_blownup;
    const std::size_t n = pts.size();
    std::vector<double> r_hat(n, 0.0);
    if (n == 0) return r_hat;

    const DomainSpec blown = holes.domain.scaled(1.0 / holes.eps);
    const std::vector<Vec3> dirs = proxy_directions(std::max(n_directions, 26));

    // Neighbor gathering: bisector of a neighbor at distance L cuts a ray no
    // closer than L/2, so neighbors beyond 2*t_max are irrelevant.
    const double cell = typical_spacing(holes);
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells;
    auto key = [&](const Vec3& p) {
        return CellKey{static_cast<std::int32_t>(std::floor(p.x / cell)),
                       static_cast<std::int32_t>(std::floor(p.y / cell)),
                       static_cast<std::int32_t>(std::floor(p.z / cell))};
    };
    for (std::uint32_t i = 0; i < n; ++i) cells[key(pts[i])].push_back(i);

    std::vector<double> t(dirs.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& z = pts[i];
        for (std::size_t d = 0; d < dirs.size(); ++d)
            t[d] = blown.exit_distance(z, dirs[d]);

        double t_max = 0.0;
        for (double v : t) t_max = std::max(t_max, v);

        CellKey c = key(z);
        for (int ring = 0;; ++ring) {
            // A neighbor at distance L cuts no ray closer than L/2, so rings
            // past 2*t_max cannot shrink any chord.
            double ring_floor = ring > 0 ? (ring - 1) * cell : 0.0;
            if (ring > 1 && 0.5 * ring_floor > t_max) break;
            bool touched = false;
            for (std::int32_t a = c.i - ring; a <= c.i + ring; ++a)
                for (std::int32_t b = c.j - ring; b <= c.j + ring; ++b)
                    for (std::int32_t g = c.k - ring; g <= c.k + ring; ++g) {
                        if (std::max({std::abs(a - c.i), std::abs(b - c.j),
                                      std::abs(g - c.k)}) != ring)
                            continue;
                        auto it = cells.find({a, b, g});
                        if (it == cells.end()) continue;
                        touched = true;
                        for (std::uint32_t jdx : it->second) {
                            if (jdx == i) continue;
                            Vec3 dy = pts[jdx] - z;
                            double L2 = norm2(dy);
                            for (std::size_t d = 0; d < dirs.size(); ++d) {
                                double proj = dot(dirs[d], dy);
                                if (proj > 0.0) t[d] = std::min(t[d], 0.5 * L2 / proj);
                            }
                        }
                    }
            if (touched) {
                t_max = 0.0;
                for (double v : t) t_max = std::max(t_max, v);
            }
        }

        double best = 0.0;
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            // Lattice block: lexicographic order makes index 25-d the
            // antipode. Fibonacci block: pairs are adjacent.
            std::size_t opp = d < 26 ? (25 - d) : (((d - 26) ^ 1u) + 26);
            best = std::max(best, t[d] + t[opp]);
        }
        r_hat[i] = best;
    }
    (void)stats;
    return r_hat;
}

double poincare_constant(double eps, const std::vector<double>& r_hat, double p) {
    if (!(p >= 1.0 && p <= 2.0)) throw DegenerateExponent("p must lie in [1,2]");
    const double e3 = eps * eps * eps;
    if (p == 2.0) {
        double s = 0.0;
        for (double r : r_hat) s += std::exp(r * r);
        return std::sqrt(std::min(e3 * s, 1.0));
    }
    const double q = 6.0 / (2.0 - p);
    double s = 0.0;
    for (double r : r_hat) s += std::pow(r, q);
    const double cp = std::pow(e3 * s, (2.0 - p) / 2.0); // this is C(p)^p
    return std::pow(cp, 1.0 / p);
}

} // namespace darcy::geometry
