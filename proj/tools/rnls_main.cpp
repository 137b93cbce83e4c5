// rnls: numerical laboratory for the 5-D mass-resonant quadratic
// Schroedinger system. Subcommands map to the experiment kinds; a TOML
// config may set any option, command-line flags win.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rnls/harness.hpp"

using namespace rnls;

namespace {

struct CliOverrides {
    std::string config_path;
    std::vector<double> omegas, amplitudes;
    int grid_n = -1;
    double r_max = -1, t_end = -1, dt = -1;
    std::string backend, out_dir, cache_dir, method;
    long long seed = -1;
    int stride = -1, random_pairs = -1;
    double loc_virial_R = -1;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "TOML config file (flags override it)");
    cmd->add_option("--omega", o.omegas, "frequency list");
    cmd->add_option("--a", o.amplitudes, "amplitude ladder (data = a * ground state)");
    cmd->add_option("--grid-n", o.grid_n, "radial grid points");
    cmd->add_option("--rmax", o.r_max, "radial truncation radius");
    cmd->add_option("--backend", o.backend, "radial | cartesian");
    cmd->add_option("--t-end", o.t_end, "evolution horizon");
    cmd->add_option("--dt", o.dt, "time step");
    cmd->add_option("--stride", o.stride, "diagnostic stride (steps)");
    cmd->add_option("--loc-virial-R", o.loc_virial_R, "localized-virial cutoff radius");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "seed for randomized suites");
    cmd->add_option("--cache", o.cache_dir, "ground-state cache directory");
    cmd->add_option("--pairs", o.random_pairs, "random pair count");
    cmd->add_option("--method", o.method, "gradient_flow | petviashvili | shooting");
}

ExperimentConfig build_config(ExperimentKind kind, const CliOverrides& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = ExperimentConfig::from_toml_file(o.config_path);
    cfg.kind = kind;
    if (!o.omegas.empty()) cfg.omegas = o.omegas;
    if (!o.amplitudes.empty()) cfg.amplitudes = o.amplitudes;
    if (o.grid_n > 0) cfg.grid_n = o.grid_n;
    if (o.r_max > 0) cfg.r_max = o.r_max;
    if (o.t_end > 0) cfg.t_end = o.t_end;
    if (o.dt > 0) cfg.dt = o.dt;
    if (o.stride > 0) cfg.stride = o.stride;
    if (o.loc_virial_R >= 0) cfg.loc_virial_R = o.loc_virial_R;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.random_pairs > 0) cfg.random_pairs = o.random_pairs;
    if (!o.backend.empty()) {
        if (o.backend == "radial") cfg.backend = Backend::radial;
        else if (o.backend == "cartesian") cfg.backend = Backend::cartesian;
        else throw ConfigError("unknown backend: " + o.backend);
    }
    if (!o.method.empty()) {
        if (o.method == "gradient_flow") cfg.method = SolveMethod::gradient_flow;
        else if (o.method == "petviashvili") cfg.method = SolveMethod::petviashvili;
        else if (o.method == "shooting") cfg.method = SolveMethod::shooting;
        else throw ConfigError("unknown method: " + o.method);
    }
    // Default ladders for the sweep-style experiments.
    if (kind == ExperimentKind::sweep && cfg.amplitudes.empty())
        cfg.amplitudes = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
    if (kind == ExperimentKind::classify && cfg.amplitudes.empty())
        cfg.amplitudes = {0.8, 1.0, 1.2};
    return cfg;
}

int run(ExperimentKind kind, const CliOverrides& o) {
    ExperimentConfig cfg = build_config(kind, o);
    ReportBundle bundle = run_experiment(cfg);
    auto paths = emit_report(bundle, cfg.out_dir);
    for (const CheckResult& c : bundle.checks)
        std::printf("[%s] %-48s value=%.3e threshold=%.3e %s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.threshold, c.note.c_str());
    std::printf("%s: %zu checks, %s; report at %s\n", experiment_name(cfg.kind),
                bundle.checks.size(), bundle.all_passed ? "all passed" : "FAILURES",
                (cfg.out_dir + "/report.json").c_str());
    return bundle.all_passed ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rnls: ground states, functionals and dichotomy experiments for the "
                 "5-D quadratic Schroedinger system"};
    app.require_subcommand(1);

    struct Sub {
        const char* cli;
        ExperimentKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"ground-state", ExperimentKind::ground_state, "solve and verify ground states"},
        {"verify", ExperimentKind::verify_identities, "identity and property verification suite"},
        {"evolve", ExperimentKind::evolve, "time evolution with conservation diagnostics"},
        {"classify", ExperimentKind::classify, "dichotomy verdicts for scaled ground states"},
        {"sweep", ExperimentKind::sweep, "amplitude sweep over the threshold plane"},
        {"gn-check", ExperimentKind::gn_sweep, "randomized sharp Gagliardo-Nirenberg sweep"},
    };
    std::map<std::string, std::pair<ExperimentKind, CliOverrides>> registry;
    for (const Sub& s : subs) {
        auto* cmd = app.add_subcommand(s.cli, s.help);
        auto& slot = registry[s.cli];
        slot.first = s.kind;
        add_common_flags(cmd, slot.second);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& [name, slot] : registry)
            if (app.get_subcommand(name)->parsed()) return run(slot.first, slot.second);
        std::fprintf(stderr, "no subcommand\n");
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
