#include "darcy/pointprocess.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "darcy/errors.hpp"
#include "darcy/fmt.hpp"

namespace darcy::pointprocess {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed tags for the per-realization sub-streams.
constexpr std::uint64_t kCountStream = 0xC0;
constexpr std::uint64_t kPointStream = 0x90;
} // namespace

double RadiiLaw::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Constant: return param;
        case Kind::ParetoShifted: return rng.pareto_shifted(param);
        case Kind::BoundedUniform: return param == 1.0 ? 1.0 : rng.uniform(1.0, param);
    }
    return 1.0;
}

std::string RadiiLaw::name() const {
    switch (kind) {
        case Kind::Constant: return "constant";
        case Kind::ParetoShifted: return "pareto";
        case Kind::BoundedUniform: return "uniform";
    }
    return "?";
}

double moment(const RadiiLaw& law, double q) {
    if (q < 0.0) throw DegenerateExponent("moment exponent must be >= 0");
    switch (law.kind) {
        case RadiiLaw::Kind::Constant:
            return std::pow(law.param, q);
        case RadiiLaw::Kind::ParetoShifted:
            // E[rho^q] = s/(s-q) for q < s, divergent at and past the shape.
            return q < law.param ? law.param / (law.param - q) : kInf;
        case RadiiLaw::Kind::BoundedUniform: {
            const double b = law.param;
            if (b == 1.0) return 1.0;
            return (std::pow(b, q + 1.0) - 1.0) / ((q + 1.0) * (b - 1.0));
        }
    }
    return kInf;
}

Admissibility check_admissibility(const RadiiLaw& law, double alpha, bool require_beta) {
    if (!(alpha > 1.0 && alpha < 3.0)) throw ConfigInvalid("alpha", "must lie in (1,3)");
    const double q0 = 3.0 / alpha;
    if (!std::isfinite(moment(law, q0))) return {AdmissibilityKind::Inadmissible, 0.0};

    double beta_sup;
    if (law.kind == RadiiLaw::Kind::ParetoShifted) {
        beta_sup = law.param - q0; // moments exist strictly below the shape
    } else {
        beta_sup = kInf; // bounded radii: every moment is finite
    }
    if (!require_beta) return {AdmissibilityKind::Admissible, beta_sup};
    if (beta_sup > 0.0) return {AdmissibilityKind::AdmissibleStokes, beta_sup};
    return {AdmissibilityKind::Admissible, 0.0};
}

void ProcessParams::validate() const {
    if (!(lambda > 0.0)) throw ConfigInvalid("lambda", "must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigInvalid("eps", "must lie in (0,1)");
    if (!(alpha > 1.0 && alpha < 3.0)) throw ConfigInvalid("alpha", "must lie strictly in (1,3)");
    if (!radii_law.valid()) throw ConfigInvalid("law_param", "law parameter out of range");
    if (!(domain.volume() > 0.0)) throw ConfigInvalid("domain", "empty domain");
}

Realization sample_realization(const ProcessParams& params) {
    params.validate();
    const double mean = params.expected_count();
    if (mean > params.expected_count_cap) {
        throw ExpectedCountOverflow("expected point count " + fmt_double(mean) +
                                    " exceeds cap " + fmt_double(params.expected_count_cap));
    }

    Rng count_rng = Rng::stream(params.seed, kCountStream);
    const std::uint64_t n = count_rng.poisson(mean);

    Rng point_rng = Rng::stream(params.seed, kPointStream);
    const DomainSpec blown = params.domain.scaled(1.0 / params.eps);

    Realization real;
    real.params = params;
    real.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        MarkedPoint p;
        p.z = blown.sample(point_rng);
        p.rho = params.radii_law.sample(point_rng);
        real.points.push_back(p);
    }
    return real;
}

void dump_realization(const Realization& r, std::ostream& os) {
    const ProcessParams& p = r.params;
    os << "# lambda=" << fmt_double(p.lambda) << " eps=" << fmt_double(p.eps)
       << " alpha=" << fmt_double(p.alpha) << " law=" << p.radii_law.name()
       << " law_param=" << fmt_double(p.radii_law.param) << " seed=" << fmt_u64(p.seed)
       << " domain=" << (p.domain.kind == DomainSpec::Kind::Box ? "box" : "ball");
    if (p.domain.kind == DomainSpec::Kind::Box) {
        const Box& b = p.domain.box;
        os << " lo=" << fmt_double(b.lo.x) << ',' << fmt_double(b.lo.y) << ','
           << fmt_double(b.lo.z) << " hi=" << fmt_double(b.hi.x) << ',' << fmt_double(b.hi.y)
           << ',' << fmt_double(b.hi.z);
    } else {
        os << " center=" << fmt_double(p.domain.ball_center.x) << ','
           << fmt_double(p.domain.ball_center.y) << ',' << fmt_double(p.domain.ball_center.z)
           << " radius=" << fmt_double(p.domain.ball_radius);
    }
    os << " n=" << fmt_u64(r.points.size()) << '\n';
    for (const MarkedPoint& mp : r.points) {
        os << fmt_double(mp.z.x) << ' ' << fmt_double(mp.z.y) << ' ' << fmt_double(mp.z.z) << ' '
           << fmt_double(mp.rho) << '\n';
    }
}

namespace {

std::string header_value(const std::string& header, const std::string& key) {
    const std::string pat = " " + key + "=";
    auto pos = header.find(pat);
    if (pos == std::string::npos) throw Error("realization header misses key '" + key + "'");
    pos += pat.size();
    auto end = header.find(' ', pos);
    if (end == std::string::npos) end = header.size();
    return header.substr(pos, end - pos);
}

Vec3 parse_vec3(const std::string& s) {
    Vec3 v;
    std::size_t a = s.find(','), b = s.rfind(',');
    if (a == std::string::npos || b == a) throw Error("bad vector literal: " + s);
    v.x = parse_double(std::string_view(s).substr(0, a));
    v.y = parse_double(std::string_view(s).substr(a + 1, b - a - 1));
    v.z = parse_double(std::string_view(s).substr(b + 1));
    return v;
}

} // namespace

Realization load_realization(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.empty() || header[0] != '#')
        throw Error("realization dump: missing header line");

    Realization r;
    ProcessParams& p = r.params;
    p.lambda = parse_double(header_value(header, "lambda"));
    p.eps = parse_double(header_value(header, "eps"));
    p.alpha = parse_double(header_value(header, "alpha"));
    const std::string law = header_value(header, "law");
    const double lp = parse_double(header_value(header, "law_param"));
    if (law == "constant") p.radii_law = RadiiLaw::constant(lp);
    else if (law == "pareto") p.radii_law = RadiiLaw::pareto(lp);
    else if (law == "uniform") p.radii_law = RadiiLaw::bounded_uniform(lp);
    else throw Error("unknown radii law '" + law + "'");
    p.seed = parse_u64(header_value(header, "seed"));
    if (header_value(header, "domain") == "box") {
        p.domain.kind = DomainSpec::Kind::Box;
        p.domain.box.lo = parse_vec3(header_value(header, "lo"));
        p.domain.box.hi = parse_vec3(header_value(header, "hi"));
    } else {
        p.domain.kind = DomainSpec::Kind::Ball;
        p.domain.ball_center = parse_vec3(header_value(header, "center"));
        p.domain.ball_radius = parse_double(header_value(header, "radius"));
    }
    const std::uint64_t n = parse_u64(header_value(header, "n"));

    r.points.reserve(n);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string sx, sy, sz, sr;
        ls >> sx >> sy >> sz >> sr;
        MarkedPoint mp;
        mp.z = {parse_double(sx), parse_double(sy), parse_double(sz)};
        mp.rho = parse_double(sr);
        r.points.push_back(mp);
    }
    if (r.points.size() != n)
        throw Error("realization dump: header count " + fmt_u64(n) + " != " +
                    fmt_u64(r.points.size()) + " records");
    return r;
}

} // namespace darcy::pointprocess
