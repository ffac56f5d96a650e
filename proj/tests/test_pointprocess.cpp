#include <doctest.h>

#include <cmath>
#include <sstream>

#include "darcy/errors.hpp"
#include "darcy/pointprocess.hpp"
#include "oracles.hpp"

using namespace darcy;
using namespace darcy::pointprocess;

TEST_SUITE_BEGIN("pointprocess");

TEST_CASE("moments in closed form") {
    // Pareto(3), q=1: s/(s-q) = 1.5, cross-checked by quadrature of the density.
    CHECK(moment(RadiiLaw::pareto(3.0), 1.0) == doctest::Approx(1.5).epsilon(1e-12));
    const double quad = oracles::integrate(
        [](double r) { return r * 3.0 * std::pow(r, -4.0); }, 1.0, 4000.0, 1e-10);
    CHECK(moment(RadiiLaw::pareto(3.0), 1.0) == doctest::Approx(quad).epsilon(1e-4));

    CHECK(moment(RadiiLaw::constant(2.0), 3.0) == doctest::Approx(8.0));
    CHECK(std::isinf(moment(RadiiLaw::pareto(2.0), 2.0)));
    CHECK(moment(RadiiLaw::bounded_uniform(1.0), 7.0) == doctest::Approx(1.0));
    // Uniform on [1,b]: E[rho^2] = (b^3-1)/(3(b-1)).
    CHECK(moment(RadiiLaw::bounded_uniform(3.0), 2.0) == doctest::Approx(26.0 / 6.0));
}

TEST_CASE("admissibility classification") {
    // 3/alpha = 2 for alpha = 1.5.
    auto a1 = check_admissibility(RadiiLaw::pareto(2.5), 1.5);
    CHECK(a1.kind == AdmissibilityKind::AdmissibleStokes);
    CHECK(a1.beta_sup == doctest::Approx(0.5));

    auto a2 = check_admissibility(RadiiLaw::pareto(2.0), 1.5);
    CHECK(a2.kind == AdmissibilityKind::Inadmissible);

    auto a3 = check_admissibility(RadiiLaw::constant(1.0), 2.2);
    CHECK(a3.kind == AdmissibilityKind::AdmissibleStokes);
    CHECK(std::isinf(a3.beta_sup));
}

TEST_CASE("sampling determinism and mean count") {
    ProcessParams params;
    params.lambda = 2.0;
    params.eps = 0.1;
    params.alpha = 1.5;
    params.seed = 42;
    auto r1 = sample_realization(params);
    auto r2 = sample_realization(params);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1.points[i].z.x == r2.points[i].z.x);
        CHECK(r1.points[i].rho == r2.points[i].rho);
    }
    // Poisson mean lambda |D| eps^-3 = 2000: a single draw stays within 6 sd.
    CHECK(std::abs(static_cast<double>(r1.size()) - 2000.0) < 6.0 * std::sqrt(2000.0));

    for (const auto& p : r1.points) {
        CHECK(params.domain.contains(params.eps * p.z));
        CHECK(p.rho >= 1.0);
    }
}

TEST_CASE("count statistics follow the Poisson law") {
    // lambda=1, eps=0.05: mean 8000; 100 seeds. CLT oracle: sample mean within
    // 3*sqrt(8000/100) and sample variance ~ mean within 3 se.
    ProcessParams params;
    params.lambda = 1.0;
    params.eps = 0.05;
    params.alpha = 1.5;
    std::vector<double> counts;
    for (int s = 0; s < 100; ++s) {
        params.seed = derive_seed(7, 0, s);
        counts.push_back(static_cast<double>(sample_realization(params).size()));
    }
    auto ms = oracles::mean_std(counts);
    CHECK(std::abs(ms.mean - 8000.0) < 3.0 * std::sqrt(8000.0 / 100.0));
    // Var(sample variance) ~ 2 mu^2/(n-1) for Poisson(mu) at large mu.
    const double var = ms.sd * ms.sd;
    const double var_se = std::sqrt(2.0 / 99.0) * 8000.0;
    CHECK(std::abs(var - 8000.0) < 3.0 * var_se);
}

TEST_CASE("empirical mark moments match the analytic ones") {
    Rng rng(1234);
    for (auto [law, q] : {std::pair{RadiiLaw::pareto(3.0), 1.0},
                          std::pair{RadiiLaw::bounded_uniform(2.0), 2.0},
                          std::pair{RadiiLaw::pareto(4.0), 1.5}}) {
        std::vector<double> vals;
        for (int i = 0; i < 20000; ++i) vals.push_back(std::pow(law.sample(rng), q));
        auto ms = oracles::mean_std(vals);
        CHECK(std::abs(ms.mean - moment(law, q)) < 3.0 * ms.stderr_);
    }
}

TEST_CASE("expected count cap") {
    ProcessParams params;
    params.eps = 1e-4;
    params.lambda = 1.0;
    CHECK_THROWS_AS((void)sample_realization(params), ExpectedCountOverflow);
}

TEST_CASE("dump/load round-trips bit-for-bit") {
    ProcessParams params;
    params.lambda = 0.3;
    params.eps = 0.17;
    params.alpha = 2.31;
    params.radii_law = RadiiLaw::pareto(2.7);
    params.seed = 99;
    auto real = sample_realization(params);
    std::stringstream ss;
    dump_realization(real, ss);
    auto back = load_realization(ss);
    REQUIRE(back.size() == real.size());
    for (std::size_t i = 0; i < real.size(); ++i) {
        CHECK(back.points[i].z.x == real.points[i].z.x);
        CHECK(back.points[i].z.y == real.points[i].z.y);
        CHECK(back.points[i].z.z == real.points[i].z.z);
        CHECK(back.points[i].rho == real.points[i].rho);
    }
    CHECK(back.params.eps == params.eps);
    CHECK(back.params.radii_law.param == params.radii_law.param);

    // And the reserialization is byte-identical.
    std::stringstream ss2;
    dump_realization(back, ss2);
    CHECK(ss2.str() == ss.str());
}

TEST_CASE("validation names the offending field") {
    ProcessParams params;
    params.alpha = 3.0;
    try {
        (void)sample_realization(params);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(e.field() == "alpha");
    }
}

TEST_SUITE_END();
