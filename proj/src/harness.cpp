#include "rnls/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rnls/random_fields.hpp"
#include "rnls/svg.hpp"
#include "rnls/toml_lite.hpp"

#ifndef RNLS_VERSION
#define RNLS_VERSION "0.1.0"
#endif

namespace rnls {

using nlohmann::json;

const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ground_state: return "ground_state";
        case ExperimentKind::verify_identities: return "verify_identities";
        case ExperimentKind::evolve: return "evolve";
        case ExperimentKind::classify: return "classify";
        case ExperimentKind::sweep: return "sweep";
        case ExperimentKind::gn_sweep: return "gn_sweep";
    }
    return "?";
}

ExperimentKind experiment_from_name(const std::string& name) {
    if (name == "ground_state") return ExperimentKind::ground_state;
    if (name == "verify_identities") return ExperimentKind::verify_identities;
    if (name == "evolve") return ExperimentKind::evolve;
    if (name == "classify") return ExperimentKind::classify;
    if (name == "sweep") return ExperimentKind::sweep;
    if (name == "gn_sweep") return ExperimentKind::gn_sweep;
    throw ConfigError("unknown experiment kind: " + name);
}

void ExperimentConfig::validate() const {
    if (grid_n < 16) throw ConfigError("config: grid_n must be >= 16");
    if (!(r_max > 0)) throw ConfigError("config: rmax must be positive");
    if (omegas.empty()) throw ConfigError("config: omega list must not be empty");
    for (double w : omegas)
        if (!(w > 0)) throw ConfigError("config: omegas must be positive");
    for (double a : amplitudes)
        if (!(a > 0)) throw ConfigError("config: a-values must be positive");
    if ((kind == ExperimentKind::sweep || kind == ExperimentKind::classify) && amplitudes.empty())
        throw ConfigError("config: this experiment needs a nonempty a-value list");
    if (!(dt > 0) || !(t_end > 0)) throw ConfigError("config: dt and t_end must be positive");
    if (random_pairs < 1) throw ConfigError("config: random_pairs must be >= 1");
}

json ExperimentConfig::echo_json() const {
    json j;
    j["experiment"] = experiment_name(kind);
    j["backend"] = backend == Backend::radial ? "radial" : "cartesian";
    j["grid_n"] = grid_n;
    j["r_max"] = r_max;
    j["cart_n"] = cart_n;
    j["cart_L"] = cart_L;
    j["omegas"] = omegas;
    j["amplitudes"] = amplitudes;
    j["t_end"] = t_end;
    j["dt"] = dt;
    j["stride"] = stride;
    j["loc_virial_R"] = loc_virial_R;
    j["seed"] = seed;
    j["random_pairs"] = random_pairs;
    j["method"] = method_name(method);
    j["out_dir"] = out_dir;
    j["cache_dir"] = cache_dir;
    return j;
}

ExperimentConfig ExperimentConfig::from_toml_file(const std::filesystem::path& path) {
    ExperimentConfig c;
    auto table = toml_lite::parse_file(path);
    auto get_str = [&](const char* key, std::string& dst) {
        auto it = table.find(key);
        if (it != table.end()) dst = std::get<std::string>(it->second);
    };
    auto get_num = [&](const char* key, auto& dst) {
        auto it = table.find(key);
        if (it != table.end()) dst = static_cast<std::decay_t<decltype(dst)>>(
                                    std::get<double>(it->second));
    };
    auto get_vec = [&](const char* key, std::vector<double>& dst) {
        auto it = table.find(key);
        if (it != table.end()) dst = std::get<std::vector<double>>(it->second);
    };
    std::string kind_s, backend_s, method_s;
    get_str("experiment.kind", kind_s);
    if (!kind_s.empty()) c.kind = experiment_from_name(kind_s);
    get_str("experiment.backend", backend_s);
    if (backend_s == "cartesian") c.backend = Backend::cartesian;
    else if (backend_s == "radial" || backend_s.empty()) c.backend = Backend::radial;
    else throw ConfigError("config: unknown backend " + backend_s);
    get_str("experiment.method", method_s);
    if (method_s == "petviashvili") c.method = SolveMethod::petviashvili;
    else if (method_s == "shooting") c.method = SolveMethod::shooting;
    get_num("grid.n", c.grid_n);
    get_num("grid.rmax", c.r_max);
    get_num("grid.cart_n", c.cart_n);
    get_num("grid.cart_L", c.cart_L);
    get_vec("experiment.omegas", c.omegas);
    get_vec("experiment.amplitudes", c.amplitudes);
    get_num("evolution.t_end", c.t_end);
    get_num("evolution.dt", c.dt);
    get_num("evolution.stride", c.stride);
    get_num("evolution.loc_virial_R", c.loc_virial_R);
    get_num("experiment.seed", c.seed);
    get_num("experiment.random_pairs", c.random_pairs);
    get_str("experiment.out", c.out_dir);
    get_str("experiment.cache", c.cache_dir);
    return c;
}

// ---------------------------------------------------------------------------
// Experiment helpers
// ---------------------------------------------------------------------------

namespace {

void add_check(ReportBundle& b, const std::string& name, bool pass, double value,
               double threshold, const std::string& note = "") {
    b.checks.push_back({name, pass, value, threshold, note});
    if (!pass) b.all_passed = false;
}

json checks_json(const ReportBundle& b) {
    json arr = json::array();
    for (const CheckResult& c : b.checks)
        arr.push_back(json{{"name", c.name},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"threshold", c.threshold},
                           {"note", c.note}});
    return arr;
}

FieldPair scaled_ground_state(const GroundState& gs, double a) {
    FieldPair p = gs.pair;
    for (auto& z : p.u) z *= a;
    for (auto& z : p.v) z *= a;
    return p;
}

std::string gs_csv(const GroundState& gs) {
    std::ostringstream os;
    os.precision(17);
    os << "r,phi,psi\n";
    const auto& r = gs.pair.rgrid->nodes();
    for (size_t i = 0; i < r.size(); ++i)
        os << r[i] << ',' << gs.pair.u[i].real() << ',' << gs.pair.v[i].real() << '\n';
    return os.str();
}

void run_ground_state_experiment(const ExperimentConfig& cfg, ReportBundle& b,
                                 GroundStateCache& cache,
                                 std::shared_ptr<const RadialGrid> grid) {
    json states = json::array();
    for (double w : cfg.omegas) {
        GroundState gs = cache.get_or_solve(w, grid, cfg.method);
        const auto& rep = gs.report;
        add_check(b, "pohozaev_2K_5P@omega=" + std::to_string(w),
                  std::abs(2 * rep.kinetic - 5 * rep.interaction) <= 1e-6 * rep.kinetic,
                  std::abs(2 * rep.kinetic - 5 * rep.interaction) / rep.kinetic, 1e-6);
        add_check(b, "pohozaev_2wM_P@omega=" + std::to_string(w),
                  std::abs(2 * w * rep.mass - rep.interaction) <= 1e-6 * rep.interaction,
                  std::abs(2 * w * rep.mass - rep.interaction) / rep.interaction, 1e-6);
        add_check(b, "action_I_wM@omega=" + std::to_string(w),
                  std::abs(rep.i_omega - w * rep.mass) <= 1e-6 * w * rep.mass,
                  std::abs(rep.i_omega - w * rep.mass) / (w * rep.mass), 1e-6);
        add_check(b, "residual@omega=" + std::to_string(w), gs.residual <= 1e-7, gs.residual,
                  1e-7);
        states.push_back(gs.meta_json());
        b.csvs["ground_state_omega_" + std::to_string(w)] = gs_csv(gs);
    }
    b.report["ground_states"] = states;
}

void run_verify_experiment(const ExperimentConfig& cfg, ReportBundle& b,
                           GroundStateCache& cache, std::shared_ptr<const RadialGrid> grid) {
    GroundState gs1 = cache.get_or_solve(1.0, grid, cfg.method);
    ThresholdSet thr = thresholds_from_ground_state(gs1);
    const auto& rep = gs1.report;
    double M1 = rep.mass;

    add_check(b, "pohozaev_2K_5P",
              std::abs(2 * rep.kinetic - 5 * rep.interaction) <= 1e-6 * rep.kinetic,
              std::abs(2 * rep.kinetic - 5 * rep.interaction) / rep.kinetic, 1e-6);
    add_check(b, "pohozaev_2M_P",
              std::abs(2 * rep.mass - rep.interaction) <= 1e-6 * rep.interaction,
              std::abs(2 * rep.mass - rep.interaction) / rep.interaction, 1e-6);
    add_check(b, "me_threshold_is_M1_sq", std::abs(thr.me_threshold / (M1 * M1) - 1) <= 1e-6,
              std::abs(thr.me_threshold / (M1 * M1) - 1), 1e-6);
    add_check(b, "mk_over_me_is_5", std::abs(thr.mk_threshold / thr.me_threshold - 5) <= 5e-6,
              std::abs(thr.mk_threshold / thr.me_threshold - 5), 5e-6);
    double cgn_closed = 2.0 / (std::pow(5.0, 1.25) * std::sqrt(M1));
    add_check(b, "c_gn_closed_form", std::abs(thr.c_gn / cgn_closed - 1) <= 1e-6,
              std::abs(thr.c_gn / cgn_closed - 1), 1e-6);
    add_check(b, "gn_equality_at_ground_state",
              std::abs(gn_inequality_gap(gs1.pair, thr)) <=
                  1e-6 * thr.c_gn * std::pow(M1, 0.25) * std::pow(rep.kinetic, 1.25),
              std::abs(gn_inequality_gap(gs1.pair, thr)) /
                  (thr.c_gn * std::pow(M1, 0.25) * std::pow(rep.kinetic, 1.25)),
              1e-6);

    // Scaling law across additional omegas.
    for (double w : cfg.omegas) {
        if (std::abs(w - 1.0) < 1e-12) continue;
        GroundState gsw = cache.get_or_solve(w, grid, cfg.method);
        double m_ratio = gsw.report.mass / (std::pow(w, -0.5) * M1);
        double k_ratio = gsw.report.kinetic / (std::pow(w, 0.5) * rep.kinetic);
        add_check(b, "scaling_M@omega=" + std::to_string(w), std::abs(m_ratio - 1) <= 1e-5,
                  std::abs(m_ratio - 1), 1e-5);
        add_check(b, "scaling_K@omega=" + std::to_string(w), std::abs(k_ratio - 1) <= 1e-5,
                  std::abs(k_ratio - 1), 1e-5);
        double cgn_w = gsw.report.interaction /
                       (std::pow(gsw.report.mass, 0.25) * std::pow(gsw.report.kinetic, 1.25));
        add_check(b, "c_gn_omega_independent@omega=" + std::to_string(w),
                  std::abs(cgn_w / thr.c_gn - 1) <= 1e-6, std::abs(cgn_w / thr.c_gn - 1), 1e-6);
    }

    // Randomized properties.
    std::mt19937_64 rng(cfg.seed);
    double worst_gap = 0, worst_minimality = 0, worst_proj = 0, worst_kab = 0;
    std::ostringstream pair_csv;
    pair_csv.precision(17);
    pair_csv << "index,M,K,P,gn_gap,I_projected\n";
    int n_pairs = std::min(cfg.random_pairs, 50);
    for (int i = 0; i < n_pairs; ++i) {
        FieldPair p = random_projectable_pair(grid, rng);
        double gap = gn_inequality_gap(p, thr);
        double rhs = thr.c_gn * std::pow(mass_of(p), 0.25) * std::pow(kinetic_of(p), 1.25);
        worst_gap = std::min(worst_gap, gap / rhs);
        double i_proj = std::numeric_limits<double>::quiet_NaN();
        if (interaction_of(p) > 1e-8) {
            try {
                NehariProjection proj = project_to_nehari(p);
                double K = kinetic_of(proj.pair);
                double k208 = 8 * K - 20 * interaction_of(proj.pair);
                worst_proj = std::max(worst_proj, std::abs(k208) / K);
                i_proj = evaluate(proj.pair, 1.0).i_omega;
                worst_minimality =
                    std::max(worst_minimality, (gs1.report.i_omega - i_proj) / gs1.report.i_omega);
            } catch (const ResolutionError&) {
                // off-grid projection for this draw; skipped
            }
        }
        // Central-difference check of the scaling derivative.
        std::uniform_real_distribution<double> uab(-2.0, 2.0);
        double alpha = 20.0 * uab(rng) / 2.0, beta = 8.0 * uab(rng) / 2.0;
        double hh = 1e-4;
        double ip = evaluate(scale_transform(p, alpha, beta, hh), 1.0).i_omega;
        double im = evaluate(scale_transform(p, alpha, beta, -hh), 1.0).i_omega;
        double fd = (ip - im) / (2 * hh);
        double kab = k_alpha_beta(p, 1.0, alpha, beta);
        if (std::abs(kab) > 1e-8)
            worst_kab = std::max(worst_kab, std::abs(fd - kab) / std::abs(kab));
        pair_csv << i << ',' << mass_of(p) << ',' << kinetic_of(p) << ',' << interaction_of(p)
                 << ',' << gap << ',' << i_proj << '\n';
    }
    add_check(b, "gn_gap_nonnegative_random", worst_gap >= -1e-8, worst_gap, -1e-8);
    add_check(b, "nehari_projection_quality", worst_proj <= 1e-9, worst_proj, 1e-9);
    add_check(b, "minimality_of_ground_state", worst_minimality <= 1e-6, worst_minimality, 1e-6);
    add_check(b, "k_alpha_beta_fd_agreement", worst_kab <= 1e-5, worst_kab, 1e-5);
    b.csvs["random_pairs"] = pair_csv.str();
    b.report["thresholds"] = thr.to_json();
    b.report["ground_state"] = gs1.meta_json();
}

void run_evolve_experiment(const ExperimentConfig& cfg, ReportBundle& b,
                           GroundStateCache& cache, std::shared_ptr<const RadialGrid> grid) {
    FieldPair data = FieldPair::zero(grid);
    double omega = cfg.omegas.front();
    if (!cfg.amplitudes.empty()) {
        GroundState gs = cache.get_or_solve(omega, grid, cfg.method);
        data = scaled_ground_state(gs, cfg.amplitudes.front());
        b.report["data"] = "scaled_ground_state";
    } else {
        for (int i = 0; i < grid->n(); ++i) {
            double r = grid->nodes()[i];
            data.u[i] = 0.5 * std::exp(-r * r);
            data.v[i] = 0.5 * std::exp(-r * r);
        }
        b.report["data"] = "gaussian";
    }
    EvolutionConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.stride = cfg.stride;
    ec.loc_virial_R = cfg.loc_virial_R;
    RunRecord rec = evolve(data, ec, omega);
    b.csvs["run"] = rec.csv();
    b.report["run_footer"] = rec.footer_json();
    ScatterEvidence ev = runtime_verdict(rec);
    b.report["runtime_verdict"] = scatter_label_name(ev.label);
    add_check(b, "mass_drift", rec.mass_drift_max <= 1e-6, rec.mass_drift_max, 1e-6);
    add_check(b, "energy_drift", rec.energy_drift_max <= 1e-4, rec.energy_drift_max, 1e-4);

    std::vector<double> ts, ms, es, vs;
    for (const RunSample& s : rec.samples) {
        ts.push_back(s.t);
        ms.push_back(std::abs(s.rep.mass - rec.samples.front().rep.mass));
        es.push_back(std::abs(s.rep.energy - rec.samples.front().rep.energy));
        vs.push_back(s.variance);
    }
    SvgPlot drift("conservation drift", "t", "|Q(t) - Q(0)|");
    drift.add_line(ts, ms, "steelblue");
    drift.add_line(ts, es, "firebrick");
    b.svgs["conservation_drift"] = drift.render();
    SvgPlot vplot("variance V(t)", "t", "V");
    vplot.add_line(ts, vs, "seagreen");
    b.svgs["variance"] = vplot.render();
}

void run_classify_experiment(const ExperimentConfig& cfg, ReportBundle& b,
                             GroundStateCache& cache, std::shared_ptr<const RadialGrid> grid,
                             bool sweep) {
    GroundState gs1 = cache.get_or_solve(1.0, grid, cfg.method);
    ThresholdSet thr = thresholds_from_ground_state(gs1);
    double M1 = thr.ground_mass;
    json verdicts = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "a,me_product,mk_product,prediction,runtime_verdict\n";
    std::vector<double> mes, mks;
    for (double a : cfg.amplitudes) {
        FieldPair p = scaled_ground_state(gs1, a);
        DichotomyVerdict v = classify_pair(p, thr);
        auto shortcut = negative_energy_shortcut(p, thr);
        if (shortcut) {
            add_check(b, "shortcut_consistency@a=" + std::to_string(a),
                      v.prediction == Prediction::blow_up_or_grow_up ||
                          v.prediction == Prediction::above_threshold_unknown,
                      0, 0, "E <= 0 must land on the blow-up side");
        }
        // Exact scaling-algebra expectation: me = (5a^4 - 4a^5) M1^2,
        // mk = 5 a^4 M1^2.
        double me_exp = (5 * std::pow(a, 4) - 4 * std::pow(a, 5)) * M1 * M1;
        double mk_exp = 5 * std::pow(a, 4) * M1 * M1;
        add_check(b, "me_scaling_algebra@a=" + std::to_string(a),
                  std::abs(v.me_product - me_exp) <= 1e-6 * std::abs(me_exp) + 1e-12,
                  std::abs(v.me_product - me_exp), 1e-6 * std::abs(me_exp));
        add_check(b, "mk_scaling_algebra@a=" + std::to_string(a),
                  std::abs(v.mk_product - mk_exp) <= 1e-6 * mk_exp,
                  std::abs(v.mk_product - mk_exp), 1e-6 * mk_exp);
        Prediction expected = Prediction::above_threshold_unknown;
        if (me_exp < thr.me_threshold * (1 - kBoundaryBand))
            expected = mk_exp < thr.mk_threshold ? Prediction::scatter
                                                 : Prediction::blow_up_or_grow_up;
        add_check(b, "prediction_matches_algebra@a=" + std::to_string(a),
                  v.prediction == expected, 0, 0, prediction_name(v.prediction));
        verdicts.push_back(v.to_json());
        csv << a << ',' << v.me_product << ',' << v.mk_product << ','
            << prediction_name(v.prediction) << ",not-run\n";
        mes.push_back(v.me_product);
        mks.push_back(v.mk_product);
    }
    b.report["verdicts"] = verdicts;
    b.report["thresholds"] = thr.to_json();
    b.csvs["sweep"] = csv.str();
    if (sweep) {
        SvgPlot plane("threshold plane", "M*E", "M*K");
        plane.add_points(mes, mks, "steelblue");
        plane.add_vline(thr.me_threshold, "firebrick");
        plane.add_hline(thr.mk_threshold, "firebrick");
        b.svgs["threshold_plane"] = plane.render();
    }
}

void run_gn_sweep_experiment(const ExperimentConfig& cfg, ReportBundle& b,
                             GroundStateCache& cache, std::shared_ptr<const RadialGrid> grid) {
    GroundState gs1 = cache.get_or_solve(1.0, grid, cfg.method);
    ThresholdSet thr = thresholds_from_ground_state(gs1);
    std::mt19937_64 rng(cfg.seed);
    std::ostringstream csv;
    csv.precision(17);
    csv << "index,M,K,P,rhs,gap\n";
    double worst = 0;
    std::vector<double> ps, rhss;
    for (int i = 0; i < cfg.random_pairs; ++i) {
        FieldPair p = (i % 2 == 0) ? random_radial_pair(grid, rng)
                                   : random_projectable_pair(grid, rng);
        double M = mass_of(p), K = kinetic_of(p), P = interaction_of(p);
        double rhs = thr.c_gn * std::pow(M, 0.25) * std::pow(K, 1.25);
        double gap = rhs - P;
        worst = std::min(worst, gap / rhs);
        csv << i << ',' << M << ',' << K << ',' << P << ',' << rhs << ',' << gap << '\n';
        ps.push_back(P);
        rhss.push_back(rhs);
    }
    add_check(b, "gn_gap_nonnegative", worst >= -1e-8, worst, -1e-8,
              std::to_string(cfg.random_pairs) + " seeded pairs");
    double rhs_gs = thr.c_gn * std::pow(gs1.report.mass, 0.25) *
                    std::pow(gs1.report.kinetic, 1.25);
    add_check(b, "gn_equality_at_ground_state",
              std::abs(rhs_gs - gs1.report.interaction) <= 1e-6 * rhs_gs,
              std::abs(rhs_gs - gs1.report.interaction) / rhs_gs, 1e-6);
    b.csvs["gn_sweep"] = csv.str();
    SvgPlot plot("sharp GN bound", "P", "C_GN M^{1/4} K^{5/4}");
    plot.add_points(ps, rhss, "steelblue");
    b.svgs["gn_sweep"] = plot.render();
    b.report["thresholds"] = thr.to_json();
}

} // namespace

// ---------------------------------------------------------------------------
// run_experiment / emit_report
// ---------------------------------------------------------------------------

ReportBundle run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ReportBundle b;
    b.report["experiment"] = experiment_name(cfg.kind);
    b.report["config_echo"] = cfg.echo_json();

    auto grid = std::make_shared<RadialGrid>(cfg.grid_n, cfg.r_max);
    GroundStateCache cache(cfg.cache_dir.empty() ? std::filesystem::path{}
                                                 : std::filesystem::path(cfg.cache_dir));
    switch (cfg.kind) {
        case ExperimentKind::ground_state:
            run_ground_state_experiment(cfg, b, cache, grid);
            break;
        case ExperimentKind::verify_identities:
            run_verify_experiment(cfg, b, cache, grid);
            break;
        case ExperimentKind::evolve:
            run_evolve_experiment(cfg, b, cache, grid);
            break;
        case ExperimentKind::classify:
            run_classify_experiment(cfg, b, cache, grid, false);
            break;
        case ExperimentKind::sweep:
            run_classify_experiment(cfg, b, cache, grid, true);
            break;
        case ExperimentKind::gn_sweep:
            run_gn_sweep_experiment(cfg, b, cache, grid);
            break;
    }
    b.report["checks"] = checks_json(b);
    b.report["all_passed"] = b.all_passed;

    b.provenance["version"] = RNLS_VERSION;
    b.provenance["config_echo"] = cfg.echo_json();
    b.provenance["grid"] = {{"n", cfg.grid_n}, {"r_max", cfg.r_max}};
    b.provenance["cache_root"] = cache.root().string();
    auto now = std::chrono::system_clock::now().time_since_epoch();
    b.provenance["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    validate_report_schema(b.report);
    return b;
}

void validate_report_schema(const json& report) {
    for (const char* key : {"experiment", "config_echo", "checks", "all_passed"})
        if (!report.contains(key))
            throw SolverError(std::string("report schema: missing key ") + key);
    for (const auto& c : report.at("checks"))
        for (const char* key : {"name", "pass", "value", "threshold"})
            if (!c.contains(key))
                throw SolverError(std::string("report schema: check missing ") + key);
}

std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    auto write_file = [&](const fs::path& p, const std::string& content) {
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p.string());
        out << content;
        written.push_back(p);
    };
    write_file(dir / "report.json", bundle.report.dump(2) + "\n");
    if (!bundle.csvs.empty()) {
        fs::create_directories(dir / "data", ec);
        for (const auto& [name, content] : bundle.csvs)
            write_file(dir / "data" / (name + ".csv"), content);
    }
    if (!bundle.svgs.empty()) {
        fs::create_directories(dir / "plots", ec);
        for (const auto& [name, content] : bundle.svgs)
            write_file(dir / "plots" / (name + ".svg"), content);
    }
    write_file(dir / "provenance.json", bundle.provenance.dump(2) + "\n");
    return written;
}

} // namespace rnls
