#include "darcy/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "darcy/clusters.hpp"
#include "darcy/csv.hpp"
#include "darcy/errors.hpp"
#include "darcy/fdsolver.hpp"
#include "darcy/fmt.hpp"
#include "darcy/geometry.hpp"
#include "darcy/measures.hpp"

namespace darcy::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(parse_double(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
    return out;
}

bool parse_bool(const std::string& s) { return s == "1" || s == "true" || s == "yes"; }

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

} // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "experiment") experiment = value;
    else if (key == "lambda") lambda = parse_double(value);
    else if (key == "alpha") alpha = parse_double(value);
    else if (key == "eps") eps_list = parse_double_list(value);
    else if (key == "law") law = value;
    else if (key == "law_param") law_param = parse_double(value);
    else if (key == "domain") domain = value;
    else if (key == "side") side = parse_double(value);
    else if (key == "radius") radius = parse_double(value);
    else if (key == "master_seed") master_seed = parse_u64(value);
    else if (key == "n_seeds") n_seeds = static_cast<int>(parse_u64(value));
    else if (key == "kappa") kappa = parse_double(value);
    else if (key == "gamma") gamma = parse_double(value);
    else if (key == "k") k = static_cast<int>(parse_u64(value));
    else if (key == "M") M = static_cast<int>(parse_u64(value));
    else if (key == "theta") theta = parse_double(value);
    else if (key == "Lambda") Lambda = parse_double(value);
    else if (key == "h") h = parse_double(value);
    else if (key == "tol") tol = parse_double(value);
    else if (key == "p") p = parse_double(value);
    else if (key == "n_samples") n_samples = parse_u64(value);
    else if (key == "n_directions") n_directions = static_cast<int>(parse_u64(value));
    else if (key == "quad_order") quad_order = static_cast<int>(parse_u64(value));
    else if (key == "j_list") j_list = parse_int_list(value);
    else if (key == "strict_cells") strict_cells = parse_bool(value);
    else if (key == "stokes") stokes = parse_bool(value);
    else if (key == "hminus1") hminus1 = parse_bool(value);
    else if (key == "hminus1_h") hminus1_h = parse_double(value);
    else if (key == "dump_field") dump_field = parse_bool(value);
    else if (key == "control") control = parse_bool(value);
    else if (key == "phi_center") {
        auto v = parse_double_list(value);
        if (v.size() != 3) throw ConfigInvalid("phi_center", "needs three comma-separated values");
        phi_center = {v[0], v[1], v[2]};
    } else if (key == "phi_width") phi_width = parse_double(value);
    else if (key == "out") out_dir = value;
    else if (key == "threads") threads = static_cast<int>(parse_u64(value));
    else throw ConfigInvalid(key, "unknown key");
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigInvalid(line, "expected key=value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kExperiments{
        "sample", "coverage", "chains", "partition", "discrepancy", "solve", "sweep"};
    if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
        throw ConfigInvalid("experiment", "unknown experiment '" + experiment + "'");
    if (!(lambda > 0.0)) throw ConfigInvalid("lambda", "must be > 0");
    if (!(alpha > 1.0 && alpha < 3.0)) throw ConfigInvalid("alpha", "must lie strictly in (1,3)");
    if (eps_list.empty()) throw ConfigInvalid("eps", "need at least one value");
    for (double e : eps_list)
        if (!(e > 0.0 && e < 1.0)) throw ConfigInvalid("eps", "every value must lie in (0,1)");
    if (law != "constant" && law != "pareto" && law != "uniform")
        throw ConfigInvalid("law", "must be constant|pareto|uniform");
    if (law == "pareto" ? !(law_param > 0.0) : !(law_param >= 1.0))
        throw ConfigInvalid("law_param", "out of range for law '" + law + "'");
    if (domain != "unit_cube" && domain != "centered_cube" && domain != "ball")
        throw ConfigInvalid("domain", "must be unit_cube|centered_cube|ball");
    if (n_seeds < 1) throw ConfigInvalid("n_seeds", "must be >= 1");
    if (gamma != 0.0 && !(gamma > 0.0 && gamma < alpha - 1.0))
        throw ConfigInvalid("gamma", "must lie in (0, alpha-1)");
    if (kappa != 0.0 && !(kappa > 0.0 && kappa < 1.0))
        throw ConfigInvalid("kappa", "must lie in (0,1)");
    if (k != 0 && k < 2) throw ConfigInvalid("k", "cube multiplier must be >= 2");
    if (!(theta > 1.0)) throw ConfigInvalid("theta", "must be > 1");
    if (!(Lambda >= theta * theta)) throw ConfigInvalid("Lambda", "must be >= theta^2");
    if (!(h > 0.0)) throw ConfigInvalid("h", "must be > 0");
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigInvalid("tol", "must lie in (0,1)");
    if (!(p >= 1.0 && p < 2.0)) throw ConfigInvalid("p", "must lie in [1,2)");
    if (experiment == "coverage") {
        if (j_list.empty()) throw ConfigInvalid("j_list", "need at least one level");
        for (int j : j_list)
            if (j < 1 || j > 40) throw ConfigInvalid("j_list", "levels must lie in [1,40]");
    }
    if (n_samples < 1000) throw ConfigInvalid("n_samples", "must be >= 1000");
    if (quad_order < 2) throw ConfigInvalid("quad_order", "must be >= 2");
    if (!(phi_width > 0.0)) throw ConfigInvalid("phi_width", "must be > 0");
}

DomainSpec ExperimentConfig::domain_spec() const {
    if (domain == "unit_cube") return DomainSpec::unit_cube();
    if (domain == "centered_cube") return DomainSpec::centered_cube(side);
    return DomainSpec::ball({0, 0, 0}, radius);
}

pointprocess::ProcessParams ExperimentConfig::process_params(double eps,
                                                             std::uint64_t seed) const {
    pointprocess::ProcessParams p2;
    p2.lambda = lambda;
    p2.eps = eps;
    p2.alpha = alpha;
    p2.domain = domain_spec();
    if (law == "constant") p2.radii_law = pointprocess::RadiiLaw::constant(law_param);
    else if (law == "pareto") p2.radii_law = pointprocess::RadiiLaw::pareto(law_param);
    else p2.radii_law = pointprocess::RadiiLaw::bounded_uniform(law_param);
    p2.seed = seed;
    return p2;
}

double ExperimentConfig::gamma_or_default() const {
    return gamma > 0.0 ? gamma : measures::default_gamma(alpha);
}

int ExperimentConfig::k_or_default(double eps) const {
    return k >= 2 ? k : measures::default_cube_multiplier(eps, alpha);
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["lambda"] = lambda;
    j["alpha"] = alpha;
    j["eps"] = eps_list;
    j["law"] = law;
    j["law_param"] = law_param;
    j["domain"] = domain;
    j["side"] = side;
    j["radius"] = radius;
    j["master_seed"] = master_seed;
    j["n_seeds"] = n_seeds;
    j["kappa"] = kappa;
    j["gamma"] = gamma;
    j["k"] = k;
    j["M"] = M;
    j["theta"] = theta;
    j["Lambda"] = Lambda;
    j["h"] = h;
    j["tol"] = tol;
    j["p"] = p;
    j["n_samples"] = n_samples;
    j["n_directions"] = n_directions;
    j["quad_order"] = quad_order;
    j["j_list"] = j_list;
    j["strict_cells"] = strict_cells;
    j["stokes"] = stokes;
    j["hminus1"] = hminus1;
    j["dump_field"] = dump_field;
    j["control"] = control;
    j["phi_center"] = {phi_center.x, phi_center.y, phi_center.z};
    j["phi_width"] = phi_width;
    j["threads"] = threads;
    return j;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::key_docs() {
    return {
        {"experiment", "sample|coverage|chains|partition|discrepancy|solve|sweep"},
        {"lambda", "point process intensity (> 0)"},
        {"alpha", "hole radius exponent, strictly in (1,3)"},
        {"eps", "comma-separated scale list, each in (0,1)"},
        {"law", "radius mark law: constant|pareto|uniform"},
        {"law_param", "rho0 (constant), shape s (pareto), upper b (uniform)"},
        {"domain", "unit_cube|centered_cube|ball"},
        {"side", "side of the centered cube domain"},
        {"radius", "radius of the ball domain"},
        {"master_seed", "root seed; cell seeds are hash(master, eps_idx, seed_idx)"},
        {"n_seeds", "seeds per eps (>= 1)"},
        {"kappa", "size-class exponent; 0 derives it from the chain lemma"},
        {"gamma", "good/bad split exponent in (0,alpha-1); 0 -> (20/21)(alpha-1)"},
        {"k", "covering cube multiplier; 0 -> max(2,ceil(eps^{-9(alpha-1)/20}))"},
        {"M", "chain length budget; 0 derives it from the chain lemma"},
        {"theta", "hierarchy dilation (> 1)"},
        {"Lambda", "hierarchy lambda budget (>= theta^2)"},
        {"h", "grid spacing for solve/sweep"},
        {"tol", "CG relative residual"},
        {"p", "Lp exponent for the Darcy error, in [1,2)"},
        {"n_samples", "Monte Carlo samples for volume fractions (>= 1000)"},
        {"n_directions", "directions of the Voronoi diameter proxy"},
        {"quad_order", "sphere quadrature order (verified at twice the order)"},
        {"j_list", "coverage: dyadic levels j with eps_j = 2^-j"},
        {"strict_cells", "covering: raise CellOverlap instead of counting conflicts"},
        {"stokes", "discrepancy: use the Stokes (6 pi) normalization"},
        {"hminus1", "discrepancy: also compute the numeric H^-1 distance"},
        {"hminus1_h", "grid spacing for the H^-1 solve; 0 picks R_min/3"},
        {"dump_field", "solve: write the raw solution field (f64 + sidecar)"},
        {"control", "solve/sweep: drop all holes (control run, flagged)"},
        {"phi_center", "bump test function center (x,y,z)"},
        {"phi_width", "bump support radius"},
        {"out", "output directory"},
        {"threads", "worker threads over (eps,seed) cells"},
    };
}

// ---------------------------------------------------------------------------
// Cell scheduling
// ---------------------------------------------------------------------------

namespace {

struct CellOutcome {
    json cell;          // per-cell summary entry
    std::string error;  // nonempty on failure
    std::vector<std::vector<std::string>> rows; // CSV rows produced by the cell
};

/// Runs `fn` over n cells on `threads` workers; outcomes land in a fixed
/// slot per cell, so downstream output is order-deterministic.
std::vector<CellOutcome> run_cells(int n, int threads,
                                   const std::function<CellOutcome(int)>& fn) {
    std::vector<CellOutcome> out(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (static_cast<double>(v.size()) * (v.size() - 1.0)));
}

} // namespace

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace {

struct ExperimentResult {
    json cells = json::array();
    json aggregates = json::object();
    json verdicts = json::object();
    json failures = json::array();
};

void collect(const std::vector<CellOutcome>& outcomes, ExperimentResult& res, CsvWriter* csv) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const CellOutcome& oc = outcomes[i];
        if (!oc.error.empty()) {
            json f;
            f["cell"] = i;
            f["error"] = oc.error;
            res.failures.push_back(f);
            continue;
        }
        if (!oc.cell.is_null()) res.cells.push_back(oc.cell);
        if (csv)
            for (const auto& row : oc.rows) csv->write_row(row);
    }
}

ExperimentResult run_sample(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const int n_eps = static_cast<int>(cfg.eps_list.size());
    const int n_cells = n_eps * cfg.n_seeds;
    auto outcomes = run_cells(n_cells, cfg.threads, [&](int cell) {
        const int ei = cell / cfg.n_seeds, si = cell % cfg.n_seeds;
        auto params = cfg.process_params(cfg.eps_list[ei],
                                         derive_seed(cfg.master_seed, ei, si));
        auto real = pointprocess::sample_realization(params);
        const std::string path = cfg.out_dir + "/realization_e" + std::to_string(ei) + "_s" +
                                 std::to_string(si) + ".txt";
        {
            std::ofstream out(path);
            pointprocess::dump_realization(real, out);
        }
        // Round-trip gate: reload and compare bit-for-bit.
        std::ifstream in(path);
        auto back = pointprocess::load_realization(in);
        if (back.points.size() != real.points.size())
            throw PipelineFailed("realization round-trip lost points");
        for (std::size_t q = 0; q < real.points.size(); ++q) {
            if (back.points[q].z.x != real.points[q].z.x ||
                back.points[q].z.y != real.points[q].z.y ||
                back.points[q].z.z != real.points[q].z.z ||
                back.points[q].rho != real.points[q].rho)
                throw PipelineFailed("realization round-trip changed a record");
        }
        CellOutcome oc;
        oc.cell["eps"] = cfg.eps_list[ei];
        oc.cell["seed_index"] = si;
        oc.cell["n_points"] = real.points.size();
        oc.cell["file"] = path;
        return oc;
    });
    collect(outcomes, res, nullptr);
    res.verdicts["round_trip"] = res.failures.empty();
    return res;
}

ExperimentResult run_coverage(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const int n_levels = static_cast<int>(cfg.j_list.size());
    // One realization per seed at the finest level; coarser levels restrict
    // the same marked process, so "covered by level j" is monotone per seed.
    const int j_fine = *std::max_element(cfg.j_list.begin(), cfg.j_list.end());
    auto outcomes = run_cells(cfg.n_seeds, cfg.threads, [&](int si) {
        const double eps_fine = std::pow(2.0, -j_fine);
        auto params = cfg.process_params(eps_fine, derive_seed(cfg.master_seed, 0, si));
        auto real = pointprocess::sample_realization(params);
        CellOutcome oc;
        json covered = json::array();
        for (int j : cfg.j_list) {
            const double eps_j = std::pow(2.0, -j);
            pointprocess::Realization sub;
            sub.params = params;
            sub.params.eps = eps_j;
            const DomainSpec blown = params.domain.scaled(1.0 / eps_j);
            for (const auto& mp : real.points)
                if (blown.contains(mp.z)) sub.points.push_back(mp);
            auto holes = geometry::build_holes(sub);
            covered.push_back(geometry::is_covered(holes));
        }
        oc.cell["seed_index"] = si;
        oc.cell["covered"] = covered;
        return oc;
    });

    std::vector<int> marginal(n_levels, 0), cumulative(n_levels, 0);
    int valid_seeds = 0;
    for (const auto& oc : outcomes) {
        if (!oc.error.empty()) continue;
        ++valid_seeds;
        bool so_far = false;
        const auto& covered = oc.cell["covered"];
        for (int l = 0; l < n_levels; ++l) {
            const bool c = covered[l].get<bool>();
            marginal[l] += c ? 1 : 0;
            so_far = so_far || c;
            cumulative[l] += so_far ? 1 : 0;
        }
    }
    {
        CsvWriter csv(cfg.out_dir + "/coverage.csv", {"j", "eps_j", "n_seeds", "covered_count"});
        for (int l = 0; l < n_levels; ++l) {
            const int j = cfg.j_list[l];
            csv.write_row({std::to_string(j), fmt_double(std::pow(2.0, -j)),
                           std::to_string(valid_seeds), std::to_string(marginal[l])});
        }
    }
    collect(outcomes, res, nullptr);
    res.aggregates["marginal_covered"] = marginal;
    res.aggregates["cumulative_covered"] = cumulative;
    res.aggregates["n_seeds"] = valid_seeds;
    bool nondecreasing = true;
    for (int l = 0; l + 1 < n_levels; ++l)
        if (cumulative[l + 1] < cumulative[l]) nondecreasing = false;
    res.verdicts["cumulative_nondecreasing"] = nondecreasing;
    return res;
}

ExperimentResult run_chains(const ExperimentConfig& cfg) {
    ExperimentResult res;
    auto base = cfg.process_params(cfg.eps_list.front(), cfg.master_seed);
    auto adm = pointprocess::check_admissibility(base.radii_law, cfg.alpha);
    if (adm.kind != pointprocess::AdmissibilityKind::AdmissibleStokes)
        throw InadmissibleLaw("chains experiment needs a law with some finite 3/alpha+beta moment");
    const double beta = std::min(adm.beta_sup, 1e6);
    auto lemma = clusters::chain_lemma_params(cfg.alpha, beta, cfg.kappa);
    const double kappa = lemma.kappa;
    const int M = cfg.M > 0 ? cfg.M : lemma.M;

    base.seed = cfg.master_seed;
    auto sweep = clusters::chain_probability_sweep(base, kappa, M, cfg.eps_list, cfg.n_seeds);

    {
        CsvWriter csv(cfg.out_dir + "/chains.csv",
                      {"eps", "kappa", "class_k", "max_component", "greedy_clique",
                       "n_seeds_hit"});
        for (const auto& row : sweep.rows) {
            csv.write_row({fmt_double(row.eps), fmt_double(kappa), std::to_string(row.k),
                           std::to_string(row.max_component), std::to_string(row.greedy_clique),
                           std::to_string(row.hits_clique)});
        }
    }
    for (const auto& row : sweep.rows) {
        json c;
        c["eps"] = row.eps;
        c["class_k"] = row.k;
        c["hits"] = row.hits_clique;
        c["phat"] = row.phat;
        c["wilson"] = {row.wilson_lo, row.wilson_hi};
        res.cells.push_back(c);
    }
    res.aggregates["kappa"] = kappa;
    res.aggregates["k_max"] = lemma.k_max;
    res.aggregates["k0"] = lemma.k0;
    res.aggregates["M"] = M;
    res.aggregates["theory_exponent"] = sweep.exponent;

    // Frequency of "some top class pair nonempty" per eps, with Wilson CIs;
    // nonincreasing with 1-stderr slack is the advertised trend.
    std::vector<double> top_freq, top_se;
    for (int hits : sweep.top_nonempty_hits) {
        const double phat = cfg.n_seeds > 0 ? static_cast<double>(hits) / cfg.n_seeds : 0.0;
        top_freq.push_back(phat);
        top_se.push_back(std::sqrt(phat * (1.0 - phat) / std::max(1, cfg.n_seeds)));
    }
    res.aggregates["top_pair_freq"] = top_freq;
    res.aggregates["top_pair_stderr"] = top_se;
    bool nonincreasing = true;
    for (std::size_t i = 0; i + 1 < top_freq.size(); ++i) {
        const double slack = std::sqrt(top_se[i] * top_se[i] + top_se[i + 1] * top_se[i + 1]);
        if (top_freq[i + 1] > top_freq[i] + slack) nonincreasing = false;
    }
    res.verdicts["top_pair_nonincreasing"] = nonincreasing;
    return res;
}

ExperimentResult run_partition(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const int n_eps = static_cast<int>(cfg.eps_list.size());
    const int n_cells = n_eps * cfg.n_seeds;
    const double gamma = cfg.gamma_or_default();
    auto outcomes = run_cells(n_cells, cfg.threads, [&](int cell) {
        const int ei = cell / cfg.n_seeds, si = cell % cfg.n_seeds;
        const double eps = cfg.eps_list[ei];
        auto params = cfg.process_params(eps, derive_seed(cfg.master_seed, ei, si));
        auto real = pointprocess::sample_realization(params);
        auto holes = geometry::build_holes(real);
        auto stats = geometry::neighbor_stats(holes);
        auto part = clusters::good_bad_partition(holes, stats, gamma);
        auto vf = geometry::volume_fraction(holes, cfg.n_samples,
                                            derive_seed(cfg.master_seed, ei, si) ^ 0xF00D);
        CellOutcome oc;
        oc.cell["eps"] = eps;
        oc.cell["seed_index"] = si;
        oc.cell["n_good"] = part.good.size();
        oc.cell["n_bad"] = part.bad.size();
        oc.cell["vanish_stat"] = part.vanish_stat;
        oc.cell["volume_fraction"] = vf.estimate;
        oc.rows.push_back({fmt_double(eps), fmt_double(gamma), std::to_string(part.good.size()),
                           std::to_string(part.bad.size()), fmt_double(part.cap_bound),
                           fmt_double(part.vanish_stat),
                           std::to_string(part.violations_fixed)});
        oc.rows.push_back({fmt_double(eps), fmt_double(cfg.alpha), std::to_string(si),
                           fmt_double(vf.estimate), fmt_double(vf.stderr_)});
        return oc;
    });
    {
        CsvWriter partition_csv(cfg.out_dir + "/partition.csv",
                                {"eps", "gamma", "n_good", "n_bad", "cap_bound", "vanish_stat",
                                 "violations_fixed"});
        CsvWriter vf_csv(cfg.out_dir + "/volume_fraction.csv",
                         {"eps", "alpha", "seed", "estimate", "stderr"});
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const CellOutcome& oc = outcomes[i];
            if (!oc.error.empty()) {
                json f;
                f["cell"] = i;
                f["error"] = oc.error;
                res.failures.push_back(f);
                continue;
            }
            res.cells.push_back(oc.cell);
            partition_csv.write_row(oc.rows[0]);
            vf_csv.write_row(oc.rows[1]);
        }
    }
    // Trend of the vanishing statistic across eps.
    std::vector<double> groups, values;
    for (const auto& c : res.cells) {
        groups.push_back(c["eps"].get<double>());
        values.push_back(c["vanish_stat"].get<double>());
    }
    TrendResult trend = aggregate_values(groups, values, cfg.eps_list);
    res.aggregates["vanish_stat_mean"] = trend.mean;
    res.aggregates["vanish_stat_stderr"] = trend.stderr_;
    res.verdicts["vanish_stat_trend"] = trend.verdict;
    return res;
}

ExperimentResult run_discrepancy(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const int n_eps = static_cast<int>(cfg.eps_list.size());
    const int n_cells = n_eps * cfg.n_seeds;
    const double gamma = cfg.gamma_or_default();
    const measures::Mode mode = cfg.stokes ? measures::Mode::Stokes : measures::Mode::Scalar;

    measures::BumpFunction bump;
    bump.center = cfg.phi_center;
    bump.width = cfg.phi_width;
    const double phi_integral = bump.integral();

    auto outcomes = run_cells(n_cells, cfg.threads, [&](int cell) {
        const int ei = cell / cfg.n_seeds, si = cell % cfg.n_seeds;
        const double eps = cfg.eps_list[ei];
        const int kk = cfg.k_or_default(eps);
        auto params = cfg.process_params(eps, derive_seed(cfg.master_seed, ei, si));
        auto real = pointprocess::sample_realization(params);
        auto holes = geometry::build_holes(real);
        auto stats = geometry::neighbor_stats(holes);
        auto part = clusters::good_bad_partition(holes, stats, gamma);
        auto covering = measures::build_covering(holes, part, kk, cfg.strict_cells);
        auto measure = measures::build_flux_measure(holes, stats, part, mode);
        auto step = measures::step_function(covering, measure);

        const double factor = mode == measures::Mode::Stokes ? 6.0 : 4.0;
        const double target_density =
            factor * M_PI * cfg.lambda * pointprocess::moment(params.radii_law, 1.0);
        const double pair =
            measures::pairing(measure, [&](const Vec3& x) { return bump(x); }, cfg.quad_order);
        const double target = target_density * phi_integral;
        const double abs_err = std::abs(pair - target);
        auto kv = measures::kv_bound(measure, covering);
        const double l2 = measures::l2_step_discrepancy(covering, step, target_density);

        CellOutcome oc;
        std::string hm1 = "";
        if (cfg.hminus1) {
            double hh = cfg.hminus1_h;
            if (hh <= 0.0) {
                double rmin = std::numeric_limits<double>::infinity();
                for (const auto& a : measure.atoms) rmin = std::min(rmin, a.R);
                hh = rmin / 3.0;
            }
            auto hm = measures::h_minus_one_numeric(measure, covering, step,
                                                    params.domain.bounding_box(), hh, cfg.tol);
            hm1 = fmt_double(hm.value);
            oc.cell["hminus1"] = hm.value;
        }
        oc.cell["eps"] = eps;
        oc.cell["seed_index"] = si;
        oc.cell["pairing"] = pair;
        oc.cell["target"] = target;
        oc.cell["rel_err"] = target != 0.0 ? abs_err / std::abs(target) : abs_err;
        oc.cell["kv_bound"] = kv.bound;
        oc.cell["kv_violations"] = kv.containment_violations;
        oc.cell["l2_step"] = l2;
        oc.cell["overlap_conflicts"] = covering.overlap_conflicts;
        oc.rows.push_back({fmt_double(eps), fmt_double(cfg.alpha), fmt_double(gamma),
                           std::to_string(kk), std::to_string(si), fmt_double(pair),
                           fmt_double(target), fmt_double(abs_err), fmt_double(kv.bound),
                           fmt_double(l2), hm1});
        return oc;
    });
    {
        CsvWriter csv(cfg.out_dir + "/discrepancy.csv",
                      {"eps", "alpha", "gamma", "k", "seed", "pairing", "target", "abs_err",
                       "kv_bound", "l2_step", "hminus1_numeric_or_blank"});
        collect(outcomes, res, &csv);
    }
    std::vector<double> groups, rel, l2v;
    for (const auto& c : res.cells) {
        groups.push_back(c["eps"].get<double>());
        rel.push_back(c["rel_err"].get<double>());
        l2v.push_back(c["l2_step"].get<double>());
    }
    TrendResult rel_trend = aggregate_values(groups, rel, cfg.eps_list);
    TrendResult l2_trend = aggregate_values(groups, l2v, cfg.eps_list);
    res.aggregates["rel_err_mean"] = rel_trend.mean;
    res.aggregates["rel_err_stderr"] = rel_trend.stderr_;
    res.aggregates["l2_step_mean"] = l2_trend.mean;
    res.aggregates["l2_step_stderr"] = l2_trend.stderr_;
    res.aggregates["phi_integral"] = phi_integral;
    res.verdicts["rel_err_trend"] = rel_trend.verdict;
    res.verdicts["l2_step_trend"] = l2_trend.verdict;
    return res;
}

ExperimentResult run_solve(const ExperimentConfig& cfg, bool sweep_mode) {
    ExperimentResult res;
    fdsolver::SweepConfig sc;
    sc.base = cfg.process_params(cfg.eps_list.front(), cfg.master_seed);
    sc.base.seed = cfg.master_seed;
    sc.eps_list = cfg.eps_list;
    sc.n_seeds = cfg.n_seeds;
    sc.h = cfg.h;
    sc.p = cfg.p;
    sc.tol = cfg.tol;
    sc.control_no_holes = cfg.control;
    auto report = fdsolver::convergence_sweep(sc);

    {
        CsvWriter csv(cfg.out_dir + "/solve.csv",
                      {"eps", "alpha", "seed", "h", "iters", "residual", "lp_error", "p",
                       "energy_norm", "poincare_ratio"});
        for (std::size_t i = 0; i < report.cells.size(); ++i) {
            const auto& c = report.cells[i];
            if (!c.error.empty()) {
                json f;
                f["cell"] = i;
                f["error"] = c.error;
                res.failures.push_back(f);
                continue;
            }
            csv.write_row({fmt_double(c.eps), fmt_double(cfg.alpha), fmt_u64(c.seed),
                           fmt_double(c.h), std::to_string(c.iterations), fmt_double(c.residual),
                           fmt_double(c.lp_error), fmt_double(c.p), fmt_double(c.energy_norm),
                           fmt_double(c.poincare_ratio)});
            json cj;
            cj["eps"] = c.eps;
            cj["seed"] = c.seed;
            cj["lp_error"] = c.lp_error;
            cj["core_mean"] = c.core_mean;
            cj["energy_norm"] = c.energy_norm;
            cj["control"] = c.control_no_holes;
            res.cells.push_back(cj);
        }
    }
    res.aggregates["k_target"] = report.k_target;
    res.aggregates["energy_ratio"] = report.energy_ratio;
    if (sweep_mode) {
        res.verdicts["error_trend_decreasing"] = report.error_trend_decreasing;
        res.verdicts["energy_bounded"] = report.energy_bounded;
    }
    return res;
}

} // namespace

RunSummary run(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    ExperimentResult res;
    if (cfg.experiment == "sample") res = run_sample(cfg);
    else if (cfg.experiment == "coverage") res = run_coverage(cfg);
    else if (cfg.experiment == "chains") res = run_chains(cfg);
    else if (cfg.experiment == "partition") res = run_partition(cfg);
    else if (cfg.experiment == "discrepancy") res = run_discrepancy(cfg);
    else if (cfg.experiment == "solve") res = run_solve(cfg, false);
    else res = run_solve(cfg, true);

    RunSummary summary;
    summary.data["config"] = cfg.to_json();
    summary.data["cells"] = res.cells;
    summary.data["aggregates"] = res.aggregates;
    summary.data["verdicts"] = res.verdicts;
    summary.data["failures"] = res.failures;

    bool ok = res.failures.empty();
    for (auto& [key, value] : res.verdicts.items()) {
        if (value.is_boolean() && !value.get<bool>()) ok = false;
    }
    summary.ok = ok;
    summary.data["ok"] = ok;

    std::ofstream out(cfg.out_dir + "/summary.json");
    out << summary.data.dump(2) << '\n';
    return summary;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

TrendResult aggregate_values(const std::vector<double>& group, const std::vector<double>& values,
                             const std::vector<double>& group_keys) {
    TrendResult tr;
    for (double key : group_keys) {
        std::vector<double> bucket;
        for (std::size_t i = 0; i < group.size(); ++i)
            if (group[i] == key) bucket.push_back(values[i]);
        if (bucket.empty()) continue;
        tr.group.push_back(key);
        tr.mean.push_back(mean_of(bucket));
        tr.stderr_.push_back(stderr_of(bucket));
        tr.count.push_back(static_cast<int>(bucket.size()));
    }
    if (tr.group.size() < 2) {
        tr.verdict = "insufficient data";
        return tr;
    }
    bool dec_ok = true, inc_ok = true;
    for (std::size_t i = 0; i + 1 < tr.group.size(); ++i) {
        const double slack = std::sqrt(tr.stderr_[i] * tr.stderr_[i] +
                                       tr.stderr_[i + 1] * tr.stderr_[i + 1]);
        if (!(tr.mean[i + 1] <= tr.mean[i] + slack)) dec_ok = false;
        if (!(tr.mean[i + 1] >= tr.mean[i] - slack)) inc_ok = false;
    }
    if (dec_ok && inc_ok) tr.verdict = "flat";
    else if (dec_ok) tr.verdict = "decreasing";
    else if (inc_ok) tr.verdict = "increasing";
    else tr.verdict = "non-monotone";

    // log-log regression: value ~ eps^slope.
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < tr.group.size(); ++i) {
        if (tr.group[i] > 0.0 && tr.mean[i] > 0.0) {
            lx.push_back(std::log(tr.group[i]));
            ly.push_back(std::log(tr.mean[i]));
        }
    }
    if (lx.size() >= 2) {
        const double mx = mean_of(lx), my = mean_of(ly);
        double sxx = 0.0, sxy = 0.0, see = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        tr.slope = sxy / sxx;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double r = ly[i] - my - tr.slope * (lx[i] - mx);
            see += r * r;
        }
        if (lx.size() > 2) tr.slope_stderr = std::sqrt(see / ((lx.size() - 2.0) * sxx));
    }
    return tr;
}

TrendResult aggregate(const std::vector<std::string>& csv_paths, const std::string& value_column,
                      const std::string& group_column) {
    std::vector<double> group, values;
    std::vector<double> keys;
    std::vector<std::string> header;
    for (const std::string& path : csv_paths) {
        CsvTable table = read_csv(path);
        if (header.empty()) header = table.header;
        else if (header != table.header)
            throw SchemaMismatch("'" + path + "' has a different header");
        const int gc = table.column(group_column);
        const int vc = table.column(value_column);
        if (gc < 0) throw SchemaMismatch("missing column '" + group_column + "'");
        if (vc < 0) throw SchemaMismatch("missing column '" + value_column + "'");
        for (const auto& row : table.rows) {
            const double g = parse_double(row[gc]);
            group.push_back(g);
            values.push_back(parse_double(row[vc]));
            if (std::find(keys.begin(), keys.end(), g) == keys.end()) keys.push_back(g);
        }
    }
    return aggregate_values(group, values, keys);
}

} // namespace darcy::harness
