#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "darcy/geometry.hpp"
#include "oracles.hpp"

using namespace darcy;
using namespace darcy::geometry;

namespace {

pointprocess::Realization make_real(double lambda, double eps, double alpha,
                                    pointprocess::RadiiLaw law, std::uint64_t seed,
                                    DomainSpec domain = DomainSpec::unit_cube()) {
    pointprocess::ProcessParams p;
    p.lambda = lambda;
    p.eps = eps;
    p.alpha = alpha;
    p.radii_law = law;
    p.seed = seed;
    p.domain = domain;
    return pointprocess::sample_realization(p);
}

} // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("build_holes applies the radius law exactly") {
    pointprocess::Realization real;
    real.params.eps = 0.1;
    real.params.alpha = 2.0;
    real.points.push_back({{1.0, 1.0, 1.0}, 1.0});
    auto holes = build_holes(real);
    REQUIRE(holes.balls.size() == 1);
    CHECK(holes.balls[0].center.x == doctest::Approx(0.1));
    CHECK(holes.balls[0].radius == doctest::Approx(0.01));

    pointprocess::Realization empty;
    empty.params.eps = 0.1;
    empty.params.alpha = 2.0;
    CHECK(build_holes(empty).balls.empty());
}

TEST_CASE("spatial index equals brute force on box queries") {
    auto real = make_real(1.0, 0.08, 1.5, pointprocess::RadiiLaw::pareto(3.0), 5);
    auto holes = build_holes(real);
    Rng rng(17);
    std::vector<std::uint32_t> got;
    for (int trial = 0; trial < 40; ++trial) {
        Vec3 lo{rng.uniform(0, 0.9), rng.uniform(0, 0.9), rng.uniform(0, 0.9)};
        Box qbox{lo, lo + Vec3{holes.eps, holes.eps, holes.eps}};
        holes.index.query_box(qbox, got);
        // Candidates must be a superset of the true intersecting set.
        for (std::uint32_t i = 0; i < holes.balls.size(); ++i) {
            const Ball& b = holes.balls[i];
            Vec3 cl{std::clamp(b.center.x, qbox.lo.x, qbox.hi.x),
                    std::clamp(b.center.y, qbox.lo.y, qbox.hi.y),
                    std::clamp(b.center.z, qbox.lo.z, qbox.hi.z)};
            if (norm2(cl - b.center) <= b.radius * b.radius) {
                CHECK(std::find(got.begin(), got.end(), i) != got.end());
            }
        }
    }
}

TEST_CASE("neighbor separations: two-center cases and the cap") {
    pointprocess::Realization real;
    real.params.eps = 0.1;
    real.params.alpha = 1.5;
    SUBCASE("distance 1") {
        real.points.push_back({{0, 0, 0}, 1.0});
        real.points.push_back({{1, 0, 0}, 1.0});
        auto stats = neighbor_stats(build_holes(real));
        CHECK(stats.d[0] == doctest::Approx(0.5));
        CHECK(stats.R[0] == doctest::Approx(0.5));
        CHECK(stats.R_eps[0] == doctest::Approx(0.05));
    }
    SUBCASE("distance 3 is capped at 1/2") {
        real.points.push_back({{0, 0, 0}, 1.0});
        real.points.push_back({{3, 0, 0}, 1.0});
        auto stats = neighbor_stats(build_holes(real));
        CHECK(stats.d[0] == doctest::Approx(1.5));
        CHECK(stats.R[0] == doctest::Approx(0.5));
    }
    SUBCASE("singleton gets d = inf, R = 1/2") {
        real.points.push_back({{2, 2, 2}, 1.0});
        auto stats = neighbor_stats(build_holes(real));
        CHECK(std::isinf(stats.d[0]));
        CHECK(stats.R[0] == doctest::Approx(0.5));
    }
}

TEST_CASE("neighbor separations match the quadratic oracle") {
    auto real = make_real(1.0, 0.1, 1.5, pointprocess::RadiiLaw::constant(1.0), 11);
    auto holes = build_holes(real);
    auto stats = neighbor_stats(holes);
    auto brute = oracles::brute_force_half_nn(holes.centers_blownup);
    REQUIRE(stats.d.size() == brute.size());
    for (std::size_t i = 0; i < brute.size(); ++i)
        CHECK(stats.d[i] == doctest::Approx(brute[i]).epsilon(1e-12));
}

TEST_CASE("protection spheres are pairwise disjoint") {
    auto real = make_real(2.0, 0.08, 1.5, pointprocess::RadiiLaw::pareto(2.5), 23);
    auto holes = build_holes(real);
    auto stats = neighbor_stats(holes);
    for (std::size_t i = 0; i < holes.balls.size(); ++i)
        for (std::size_t j = i + 1; j < holes.balls.size(); ++j) {
            const double d = norm(holes.balls[i].center - holes.balls[j].center);
            CHECK(stats.R_eps[i] + stats.R_eps[j] <= d * (1.0 + 1e-12));
        }
}

TEST_CASE("volume fraction: degenerate cases and the union oracle") {
    pointprocess::Realization real;
    real.params.eps = 0.2;
    real.params.alpha = 1.5;
    SUBCASE("no holes") {
        auto vf = volume_fraction(build_holes(real), 2000, 3);
        CHECK(vf.estimate == 0.0);
    }
    SUBCASE("single huge ball covers everything") {
        real.params.domain = DomainSpec::ball({0, 0, 0}, 1.0);
        real.points.push_back({{0, 0, 0}, std::pow(0.2, -1.5)}); // radius eps^alpha*rho = 1
        auto holes = build_holes(real);
        auto vf = volume_fraction(holes, 2000, 3);
        CHECK(vf.estimate == 1.0);
        CHECK(is_covered(holes));
    }
    SUBCASE("union volume against the rasterization oracle") {
        auto r2 = make_real(1.0, 0.05, 1.5, pointprocess::RadiiLaw::constant(1.0), 31);
        r2.points.resize(std::min<std::size_t>(r2.points.size(), 200));
        auto holes = build_holes(r2);
        auto vf = volume_fraction(holes, 200000, 7);
        const double exact =
            oracles::rasterized_union_volume(holes.balls, holes.domain.bounding_box(), 220);
        CHECK(std::abs(vf.estimate - exact) < 3.0 * vf.stderr_ + 2e-4);
        // One-sided bound by the overlap-free sum.
        double bound = 0.0;
        for (const auto& b : holes.balls)
            bound += 4.0 / 3.0 * M_PI * std::pow(b.radius, 3.0);
        CHECK(vf.estimate <= bound + 3.0 * vf.stderr_);
        CHECK(!is_covered(holes));
        CHECK(vf.estimate < 1.0);
    }
}

TEST_CASE("volume fraction is monotone under adding balls") {
    auto real = make_real(0.5, 0.1, 1.5, pointprocess::RadiiLaw::constant(1.0), 13);
    auto fewer = real;
    fewer.points.resize(real.points.size() / 2);
    auto vf_all = volume_fraction(build_holes(real), 50000, 99);
    auto vf_half = volume_fraction(build_holes(fewer), 50000, 99);
    CHECK(vf_half.estimate <= vf_all.estimate);
}

TEST_CASE("coverage requires a single swallowing ball") {
    pointprocess::Realization real;
    real.params.eps = 0.5;
    real.params.alpha = 1.5;
    real.params.domain = DomainSpec::centered_cube(1.0);
    SUBCASE("radius 10 ball at the origin covers the unit cube") {
        real.points.push_back({{0, 0, 0}, 10.0 / std::pow(0.5, 1.5)});
        CHECK(is_covered(build_holes(real)));
    }
    SUBCASE("all radii below the diameter never cover") {
        for (int i = 0; i < 20; ++i)
            real.points.push_back({{i * 0.1, 0, 0}, 1.0});
        // eps^alpha * 1 = 0.35 < diam = sqrt(3)
        CHECK(!is_covered(build_holes(real)));
    }
}

TEST_CASE("coverage probability grows along the dyadic sweep (divergent law)") {
    // Pareto(3/alpha) has a divergent 3/alpha moment; the per-seed event
    // "covered by level j" is monotone in j by construction (nested windows).
    const double alpha = 2.8;
    const auto law = pointprocess::RadiiLaw::pareto(3.0 / alpha);
    const int n_seeds = 200;
    std::vector<int> covered_by(3, 0);
    for (int s = 0; s < n_seeds; ++s) {
        auto real = make_real(0.25, std::pow(2.0, -5), alpha, law, derive_seed(1000, 0, s),
                              DomainSpec::centered_cube(1.0));
        bool so_far = false;
        for (int l = 0; l < 3; ++l) {
            const int j = 3 + l;
            const double eps_j = std::pow(2.0, -j);
            pointprocess::Realization sub;
            sub.params = real.params;
            sub.params.eps = eps_j;
            auto blown = real.params.domain.scaled(1.0 / eps_j);
            for (const auto& mp : real.points)
                if (blown.contains(mp.z)) sub.points.push_back(mp);
            so_far = so_far || is_covered(build_holes(sub));
            covered_by[l] += so_far ? 1 : 0;
        }
    }
    CHECK(covered_by[0] <= covered_by[1]);
    CHECK(covered_by[1] <= covered_by[2]);
    CHECK(covered_by[2] > 0); // divergent moment: coverage does happen
}

TEST_CASE("voronoi proxy: lattice cell and two-center bisector") {
    SUBCASE("cubic lattice spacing 1 gives r_hat near sqrt(3)") {
        pointprocess::Realization real;
        real.params.eps = 0.05;
        real.params.alpha = 1.5;
        real.params.domain = DomainSpec::centered_cube(1.0);
        int center_idx = -1;
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j)
                for (int k = -4; k <= 4; ++k) {
                    if (i == 0 && j == 0 && k == 0)
                        center_idx = static_cast<int>(real.points.size());
                    real.points.push_back(
                        {{static_cast<double>(i), static_cast<double>(j),
                          static_cast<double>(k)}, 1.0});
                }
        auto holes = build_holes(real);
        auto stats = neighbor_stats(holes);
        auto r_hat = voronoi_diameter_proxy(holes, stats, 26);
        const double rt3 = std::sqrt(3.0);
        CHECK(r_hat[center_idx] >= rt3 * 0.95);
        CHECK(r_hat[center_idx] <= rt3 * (1.0 + 1e-9));
    }
    SUBCASE("two centers: the axis chord is bisector plus wall") {
        // Thin slab domain so the x-chord dominates: from (-1,0,0) the +x ray
        // stops at the bisector plane x=0 (distance 1), the -x ray at the
        // wall x=-4 (distance 3).
        pointprocess::Realization real;
        real.params.eps = 0.5;
        real.params.alpha = 1.5;
        real.params.domain.kind = DomainSpec::Kind::Box;
        real.params.domain.box = {{-2.0, -0.05, -0.05}, {2.0, 0.05, 0.05}};
        real.points.push_back({{-1.0, 0, 0}, 1.0});
        real.points.push_back({{1.0, 0, 0}, 1.0});
        auto holes = build_holes(real);
        auto stats = neighbor_stats(holes);
        auto r_hat = voronoi_diameter_proxy(holes, stats, 26);
        CHECK(r_hat[0] == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(r_hat[1] == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("voronoi proxy tail is at most exp(-c r^3) heavy") {
    auto real = make_real(1.0, 0.1, 1.5, pointprocess::RadiiLaw::constant(1.0), 77);
    auto holes = build_holes(real);
    auto stats = neighbor_stats(holes);
    auto r_hat = voronoi_diameter_proxy(holes, stats, 32);
    std::sort(r_hat.begin(), r_hat.end());
    REQUIRE(r_hat.size() > 100);
    // Fit -log P(r_hat > t) ~ c t^3 on the upper quantiles; c must be positive.
    std::vector<double> xs, ys;
    for (double q : {0.5, 0.7, 0.85, 0.95, 0.99}) {
        const std::size_t idx = static_cast<std::size_t>(q * (r_hat.size() - 1));
        const double t = r_hat[idx];
        const double tail = 1.0 - q;
        xs.push_back(t * t * t);
        ys.push_back(-std::log(tail));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    CHECK(sxy / sxx > 0.0);
}

TEST_CASE("poincare constants") {
    CHECK(poincare_constant(0.1, {1.0}, 1.0) == doctest::Approx(std::sqrt(1e-3)).epsilon(1e-12));
    CHECK(poincare_constant(0.1, {1.0, 2.0, 0.5}, 2.0) <= 1.0);
    CHECK_THROWS_AS((void)poincare_constant(0.1, {1.0}, 2.5), DegenerateExponent);

    // Sweep boundedness: C_eps(1.5) stays of order one along a dyadic sweep.
    std::vector<double> cs;
    for (double eps : {0.1, 0.05, 0.025}) {
        std::vector<double> all;
        for (int s = 0; s < 3; ++s) {
            auto real = make_real(1.0, eps, 1.5, pointprocess::RadiiLaw::constant(1.0),
                                  derive_seed(5, 0, s));
            auto holes = build_holes(real);
            auto stats = neighbor_stats(holes);
            auto r_hat = voronoi_diameter_proxy(holes, stats, 32);
            all.push_back(poincare_constant(eps, r_hat, 1.5));
        }
        cs.push_back(oracles::mean_std(all).mean);
    }
    const double cmax = *std::max_element(cs.begin(), cs.end());
    const double cmin = *std::min_element(cs.begin(), cs.end());
    CHECK(cmax / cmin < 3.0); // bounded, no monotone growth
}

TEST_SUITE_END();
