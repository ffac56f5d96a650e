#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "darcy/domain.hpp"
#include "darcy/pointprocess.hpp"

namespace darcy::harness {

using json = nlohmann::ordered_json;

/// Flat key=value experiment description. Every knob has a default; `0` on
/// kappa/gamma/k/M means "derive from alpha (and beta) by the standard rules".
struct ExperimentConfig {
    std::string experiment = "sample"; // sample|coverage|chains|partition|discrepancy|solve|sweep

    // process
    double lambda = 1.0;
    double alpha = 1.5;
    std::vector<double> eps_list{0.1};
    std::string law = "constant"; // constant|pareto|uniform
    double law_param = 1.0;
    std::string domain = "unit_cube"; // unit_cube|centered_cube|ball
    double side = 1.0;                // centered_cube
    double radius = 1.0;              // ball
    std::uint64_t master_seed = 1;
    int n_seeds = 1;

    // module knobs
    double kappa = 0.0;  // 0 -> from the chain lemma defaults
    double gamma = 0.0;  // 0 -> (20/21)(alpha-1)
    int k = 0;           // 0 -> max(2, ceil(eps^{-9(alpha-1)/20}))
    int M = 0;           // 0 -> from the chain lemma defaults
    double theta = 2.0;
    double Lambda = 64.0;
    double h = 1.0 / 64.0;
    double tol = 1e-8;
    double p = 1.0;
    std::uint64_t n_samples = 100000;
    int n_directions = 64;
    int quad_order = 16;
    std::vector<int> j_list{3, 4, 5}; // coverage levels eps_j = 2^-j
    bool strict_cells = false;
    bool stokes = false;
    bool hminus1 = false;
    double hminus1_h = 0.0; // 0 -> chosen from the smallest sphere
    bool dump_field = false;
    bool control = false; // no-hole control run for solve/sweep
    Vec3 phi_center{0.5, 0.5, 0.5};
    double phi_width = 0.3;

    std::string out_dir = ".";
    int threads = 1;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_text(const std::string& text);
    void set(const std::string& key, const std::string& value);
    void validate() const; // throws ConfigInvalid naming the field

    pointprocess::ProcessParams process_params(double eps, std::uint64_t seed) const;
    DomainSpec domain_spec() const;
    double gamma_or_default() const;
    int k_or_default(double eps) const;

    json to_json() const;

    /// All recognized keys with one-line docs (surfaced by --help).
    static std::vector<std::pair<std::string, std::string>> key_docs();
};

struct RunSummary {
    json data;      // {config, cells, aggregates, verdicts, failures}
    bool ok = false;
};

/// Executes the configured experiment over the (eps, seed) grid, writes the
/// per-module CSVs plus summary.json into out_dir. One failing cell never
/// aborts the sweep; failures are enumerated in the summary.
RunSummary run(const ExperimentConfig& cfg);

struct TrendResult {
    std::vector<double> group;  // the eps values, ascending input order
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<int> count;
    std::string verdict;  // insufficient data|decreasing|increasing|flat|non-monotone
    double slope = 0.0;   // exponent c in value ~ eps^c (log-log regression)
    double slope_stderr = 0.0;
};

/// Per-eps means with stderr from one or more CSVs sharing a schema, plus the
/// monotonicity verdict (1-stderr slack) and the log-log slope.
TrendResult aggregate(const std::vector<std::string>& csv_paths, const std::string& value_column,
                      const std::string& group_column = "eps");

TrendResult aggregate_values(const std::vector<double>& group, const std::vector<double>& values,
                             const std::vector<double>& group_keys);

} // namespace darcy::harness
