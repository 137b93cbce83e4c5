#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rnls/classify.hpp"
#include "rnls/groundstate.hpp"

namespace rnls {

enum class ExperimentKind { ground_state, verify_identities, evolve, classify, sweep, gn_sweep };

const char* experiment_name(ExperimentKind k);
ExperimentKind experiment_from_name(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::verify_identities;
    Backend backend = Backend::radial;
    int grid_n = 4096;
    double r_max = 50.0;
    int cart_n = 16;
    double cart_L = 10.0;
    std::vector<double> omegas = {1.0};
    std::vector<double> amplitudes;     // a-values for scaled ground-state data
    double t_end = 1.0;
    double dt = 1e-3;
    int stride = 10;
    double loc_virial_R = 0.0;
    std::uint64_t seed = 1234;
    int random_pairs = 200;
    SolveMethod method = SolveMethod::gradient_flow;
    std::string out_dir = "out";
    std::string cache_dir;              // empty: RNLS_CACHE or ./rnls_cache

    void validate() const;
    static ExperimentConfig from_toml_file(const std::filesystem::path& path);
    nlohmann::json echo_json() const;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0;
    double threshold = 0;
    std::string note;
};

struct ReportBundle {
    nlohmann::json report;                        // deterministic, no timestamps
    std::map<std::string, std::string> csvs;      // name -> content (data of record)
    std::map<std::string, std::string> svgs;      // name -> content (views of the CSVs)
    nlohmann::json provenance;                    // config echo, version, grid, cache keys, time
    std::vector<CheckResult> checks;
    bool all_passed = true;
};

ReportBundle run_experiment(const ExperimentConfig& config);

// Deterministic layout: report.json, data/*.csv, plots/*.svg (only when
// plots exist), provenance.json. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::filesystem::path& dir);

// Structural schema check: every report carries the experiment name, a full
// config echo and a checks array of {name, pass, value, threshold} entries.
void validate_report_schema(const nlohmann::json& report);

} // namespace rnls
