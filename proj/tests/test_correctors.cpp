#include <doctest.h>

#include <cmath>

#include "darcy/correctors.hpp"
#include "darcy/errors.hpp"
#include "darcy/rng.hpp"
#include "oracles.hpp"

using namespace darcy;
using namespace darcy::correctors;

TEST_SUITE_BEGIN("correctors");

TEST_CASE("scalar corrector: boundary data, interior value, harmonicity") {
    ScalarCorrector w{{0, 0, 0}, 0.25, 1.0};
    CHECK(w.eval_radial(0.25) == doctest::Approx(0.0));
    CHECK(w.eval_radial(1.0) == doctest::Approx(1.0));
    CHECK(w.eval_radial(1.7) == doctest::Approx(1.0));
    CHECK(w.eval_radial(0.1) == doctest::Approx(0.0));
    // (1/a - 1/r)/(1/a - 1/R) at r = 1/2: (4-2)/(4-1) = 2/3.
    CHECK(w.eval_radial(0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(w.eval({0.5, 0, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // Radial harmonicity: (r^2 w')' = 0 within 1e-6 by central differences.
    const double h = 1e-4;
    for (double r : {0.3, 0.5, 0.7, 0.9}) {
        const double rp = r + h / 2, rm = r - h / 2;
        const double lap = (rp * rp * (w.eval_radial(r + h) - w.eval_radial(r)) -
                            rm * rm * (w.eval_radial(r) - w.eval_radial(r - h))) /
                           (h * h);
        CHECK(std::abs(lap) < 1e-6);
    }
    // Range and monotonicity.
    double prev = -1.0;
    for (double r = 0.0; r <= 2.0; r += 0.01) {
        const double v = w.eval_radial(r);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
}

TEST_CASE("annulus capacity against the radial BVP oracle") {
    const double ref1 = oracles::radial_bvp_flux(0.25, 1.0, 10000);
    CHECK(std::abs(scalar_flux(0.25, 1.0) - ref1) / ref1 < 1e-6);
    CHECK(scalar_flux(0.25, 1.0) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));

    const double ref2 = oracles::radial_bvp_flux(0.01, 0.5, 10000);
    CHECK(std::abs(scalar_flux(0.01, 0.5) - ref2) / ref2 < 1e-6);
    CHECK(scalar_flux(0.01, 0.5) == doctest::Approx(0.1282282715750936).epsilon(1e-12));

    // a -> 0: single-ball capacity 4*pi*a dominates.
    const double a = 1e-6;
    CHECK(scalar_flux(a, 1.0) / (4.0 * M_PI * a) == doctest::Approx(1.0).epsilon(1e-5));

    CHECK_THROWS_AS((void)scalar_flux(0.5, 0.5), DegenerateAnnulus);
    CHECK_THROWS_AS((void)scalar_flux(0.5, 0.5 * (1.0 + 1e-14)), DegenerateAnnulus);
}

TEST_CASE("Y value and its flux identity") {
    // eps=0.1, alpha=1.5, rho=1, R_eps=0.05.
    const double y = Y_value(0.1, 1.5, 1.0, 0.05);
    CHECK(y == doctest::Approx(2.7207810713447118e-3).epsilon(1e-12));

    // Identity Y = eps^{3-alpha} * flux / (4 pi) over random parameter draws.
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const double eps = rng.uniform(0.02, 0.5);
        const double alpha = rng.uniform(1.1, 2.9);
        const double rho = 1.0 + rng.uniform(0.0, 9.0);
        const double a = std::pow(eps, alpha) * rho;
        const double R = a * (1.0 + rng.uniform(0.1, 50.0));
        const double via_flux =
            std::pow(eps, 3.0 - alpha) * scalar_flux(a, R) / (4.0 * M_PI);
        const double direct = Y_value(eps, alpha, rho, R);
        CHECK(std::abs(via_flux - direct) <= 1e-12 * std::abs(direct));
    }

    // R >> a: Y ~ eps^3 rho.
    CHECK(Y_value(0.1, 2.5, 2.0, 0.05) ==
          doctest::Approx(1e-3 * 2.0).epsilon(2e-2));
    // rho doubling at fixed small a/R is near-linear within 1%.
    const double y1 = Y_value(0.1, 2.5, 1.0, 0.05);
    const double y2 = Y_value(0.1, 2.5, 2.0, 0.05);
    CHECK(y2 / y1 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("unit capacities and the Darcy constants") {
    CHECK(ball_capacity(1.0) == doctest::Approx(4.0 * M_PI));
    CHECK(stokes_ball_capacity(1.0) == doctest::Approx(6.0 * M_PI));
    CHECK(1.0 / ball_capacity(1.0) == doctest::Approx(0.0795775).epsilon(1e-5));
    CHECK(1.0 / stokes_ball_capacity(1.0) == doctest::Approx(0.0530516).epsilon(1e-5));
}

TEST_CASE("Stokes cell solution satisfies the equations pointwise") {
    StokesCellSolution sol{0, 1.0};

    SUBCASE("boundary value e_i on the sphere") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            Vec3 u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            u = u / norm(u);
            Vec3 v = sol.velocity(u);
            CHECK(std::abs(v.x - 1.0) < 1e-12);
            CHECK(std::abs(v.y) < 1e-12);
            CHECK(std::abs(v.z) < 1e-12);
        }
    }
    SUBCASE("divergence-free by central differences") {
        const double h = 1e-5;
        Rng rng(6);
        for (int i = 0; i < 50; ++i) {
            Vec3 x{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
            if (norm(x) < 1.3) continue;
            double div = 0.0;
            for (int a = 0; a < 3; ++a) {
                Vec3 xp = x, xm = x;
                xp[a] += h;
                xm[a] -= h;
                div += (sol.velocity(xp)[a] - sol.velocity(xm)[a]) / (2 * h);
            }
            CHECK(std::abs(div) < 1e-6);
        }
    }
    SUBCASE("momentum residual lap(w) - grad(q) = 0") {
        const double h = 1e-4;
        Rng rng(7);
        for (int i = 0; i < 25; ++i) {
            Vec3 x{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
            if (norm(x) < 1.5) continue;
            for (int comp = 0; comp < 3; ++comp) {
                double lap = -6.0 * sol.velocity(x)[comp];
                for (int a = 0; a < 3; ++a) {
                    Vec3 xp = x, xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    lap += sol.velocity(xp)[comp] + sol.velocity(xm)[comp];
                }
                lap /= h * h;
                Vec3 xp = x, xm = x;
                xp[comp] += h;
                xm[comp] -= h;
                const double dq = (sol.pressure(xp) - sol.pressure(xm)) / (2 * h);
                CHECK(std::abs(lap - dq) < 1e-6);
            }
        }
    }
}

TEST_CASE("Stokes drag flux: 6 pi r0, r-independent, off components zero") {
    for (int dir = 0; dir < 3; ++dir) {
        StokesCellSolution sol{dir, 1.0};
        for (double r : {1.0, 1.5, 2.0}) {
            Vec3 f = stokes_flux(sol, r);
            for (int a = 0; a < 3; ++a) {
                const double expect = a == dir ? 6.0 * M_PI : 0.0;
                CHECK(std::abs(f[a] - expect) < 1e-6 * 6.0 * M_PI);
            }
        }
    }
    // Linear scaling in r0, cross-checked by an independent Simpson rule.
    StokesCellSolution half{0, 0.5};
    Vec3 f = stokes_flux(half, 0.75);
    CHECK(f.x == doctest::Approx(3.0 * M_PI).epsilon(1e-9));
    const double simpson = oracles::sphere_integral_simpson(
        {0, 0, 0}, 0.75, 64, [&](const Vec3& p) { return half.traction(p).x; });
    CHECK(f.x == doctest::Approx(simpson).epsilon(1e-7));
}

TEST_CASE("grid capacity: brackets, shells, monotonicity") {
    using geometry::Ball;
    SUBCASE("single ball in a box sits in the inscribed/circumscribed bracket") {
        auto est = numerical_capacity({Ball{{0, 0, 0}, 0.25, 1.0}}, {{-1, -1, -1}, {1, 1, 1}},
                                      1.0 / 32.0, 1e-8);
        const double lo = scalar_flux(0.25, std::sqrt(3.0)); // outer ball circumscribes the box
        const double hi = scalar_flux(0.25, 1.0);            // inscribed sphere
        CHECK(est.capacity >= lo * 0.95);
        CHECK(est.capacity <= hi * 1.05);
    }
    SUBCASE("concentric shells approach the closed form") {
        auto est = numerical_capacity({Ball{{0, 0, 0}, 0.25, 1.0}},
                                      {{-1.05, -1.05, -1.05}, {1.05, 1.05, 1.05}}, 1.0 / 64.0,
                                      1e-8, 1.0);
        CHECK(std::abs(est.capacity - 4.0 * M_PI / 3.0) / (4.0 * M_PI / 3.0) < 0.04);
    }
    SUBCASE("far-separated balls are subadditive up to slack") {
        std::vector<Ball> balls{{{-0.55, 0, 0}, 0.09, 1.0}, {{0.55, 0, 0}, 0.09, 1.0}};
        auto est = numerical_capacity(balls, {{-1, -1, -1}, {1, 1, 1}}, 1.0 / 40.0, 1e-8);
        const double sum = 4.0 * M_PI * (0.09 + 0.09);
        CHECK(est.capacity <= sum * 1.10);
    }
    SUBCASE("monotone in the conductor and antitone in the box") {
        auto one = numerical_capacity({Ball{{-0.3, 0, 0}, 0.1, 1.0}}, {{-1, -1, -1}, {1, 1, 1}},
                                      1.0 / 32.0, 1e-8);
        auto two = numerical_capacity(
            {Ball{{-0.3, 0, 0}, 0.1, 1.0}, Ball{{0.4, 0.1, 0}, 0.12, 1.0}},
            {{-1, -1, -1}, {1, 1, 1}}, 1.0 / 32.0, 1e-8);
        CHECK(two.capacity >= one.capacity);
        auto bigger_box = numerical_capacity({Ball{{-0.3, 0, 0}, 0.1, 1.0}},
                                             {{-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}}, 1.0 / 32.0,
                                             1e-8);
        CHECK(bigger_box.capacity <= one.capacity);
    }
    SUBCASE("resolution gate") {
        CHECK_THROWS_AS((void)numerical_capacity({Ball{{0, 0, 0}, 0.05, 1.0}},
                                                 {{-1, -1, -1}, {1, 1, 1}}, 0.05, 1e-8),
                        UnderResolvedBall);
    }
}

TEST_SUITE_END();
