#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "darcy/domain.hpp"
#include "darcy/rng.hpp"
#include "darcy/vec3.hpp"

namespace darcy::pointprocess {

/// Law of the i.i.d. radius marks. All mass lives on [1, inf).
struct RadiiLaw {
    enum class Kind { Constant, ParetoShifted, BoundedUniform };

    Kind kind = Kind::Constant;
    double param = 1.0; // rho0 >= 1 | Pareto shape s > 0 | uniform upper b >= 1

    static RadiiLaw constant(double rho0) { return {Kind::Constant, rho0}; }
    static RadiiLaw pareto(double shape) { return {Kind::ParetoShifted, shape}; }
    static RadiiLaw bounded_uniform(double b) { return {Kind::BoundedUniform, b}; }

    bool valid() const {
        if (kind == Kind::ParetoShifted) return param > 0.0;
        return param >= 1.0;
    }

    double sample(Rng& rng) const;
    std::string name() const;
};

/// E[rho^q], computed in closed form; +inf when the moment diverges.
double moment(const RadiiLaw& law, double q);

enum class AdmissibilityKind { Admissible, AdmissibleStokes, Inadmissible };

struct Admissibility {
    AdmissibilityKind kind = AdmissibilityKind::Inadmissible;
    /// Supremum of beta with E[rho^{3/alpha+beta}] finite (open bound for
    /// Pareto, +inf for bounded laws). Only meaningful for AdmissibleStokes.
    double beta_sup = 0.0;
};

/// Classifies a law against the 3/alpha moment condition, optionally probing
/// for the extra Stokes exponent beta.
Admissibility check_admissibility(const RadiiLaw& law, double alpha, bool require_beta = true);

struct ProcessParams {
    double lambda = 1.0;      // intensity per unit volume at the blown-up scale
    double eps = 0.1;         // scale, in (0,1)
    double alpha = 1.5;       // radius exponent, in (1,3)
    DomainSpec domain;        // box or ball, star-shaped about its center
    RadiiLaw radii_law;
    std::uint64_t seed = 0;
    double expected_count_cap = 1e8;

    void validate() const; // throws ConfigInvalid naming the offending field
    double expected_count() const { return lambda * domain.volume() / (eps * eps * eps); }
};

struct MarkedPoint {
    Vec3 z;      // center at the blown-up scale: eps*z lies in the domain
    double rho;  // radius mark, >= 1
};

/// One sample of the marked point process restricted to (1/eps) * domain.
struct Realization {
    std::vector<MarkedPoint> points;
    ProcessParams params;

    std::size_t size() const { return points.size(); }
};

/// Draws N ~ Poisson(lambda |D| eps^-3) centers uniformly on the blown-up
/// domain with i.i.d. marks. Pure function of params (seeded sub-streams).
Realization sample_realization(const ProcessParams& params);

/// Text dump: one header line with the params, then one `z_x z_y z_z rho`
/// record per point with shortest round-trip decimals.
void dump_realization(const Realization& r, std::ostream& os);
Realization load_realization(std::istream& is);

} // namespace darcy::pointprocess
