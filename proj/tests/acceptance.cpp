// Acceptance suite: one pass/fail line per criterion, exit code 2 on any
// failure. Heavy solves share the on-disk ground-state cache (RNLS_CACHE or
// ./rnls_cache), so reruns are fast.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "rnls/classify.hpp"
#include "rnls/evolution.hpp"
#include "rnls/groundstate.hpp"
#include "rnls/random_fields.hpp"
#include "rnls/virial.hpp"

using namespace rnls;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void begin(const char* name) {
    std::printf("--- %s\n", name);
    std::fflush(stdout);
    g_t0 = std::chrono::steady_clock::now();
}

void record(const std::string& what, bool pass, double value, double threshold,
            const std::string& note = "") {
    if (!pass) ++g_failures;
    std::printf("[%s] %-58s value=%.3e threshold=%.3e %s\n", pass ? "PASS" : "FAIL", what.c_str(),
                value, threshold, note.c_str());
    std::fflush(stdout);
}

void record_flag(const std::string& what, bool pass, const std::string& note = "") {
    if (!pass) ++g_failures;
    std::printf("[%s] %-58s %s\n", pass ? "PASS" : "FAIL", what.c_str(), note.c_str());
    std::fflush(stdout);
}

double elapsed() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
}

GroundStateCache& cache() {
    static GroundStateCache c;
    return c;
}

const GroundState& gs_at(double omega) {
    static std::map<double, GroundState> store;
    auto it = store.find(omega);
    if (it == store.end())
        it = store.emplace(omega, cache().get_or_solve(omega, default_ground_state_grid(omega)))
                 .first;
    return it->second;
}

FieldPair scaled_gs(double a, const GroundState& gs) {
    FieldPair p = gs.pair;
    for (auto& z : p.u) z *= a;
    for (auto& z : p.v) z *= a;
    return p;
}

double rel(double x, double ref) { return std::abs(x) / std::abs(ref); }

// ---------------------------------------------------------------------------

void criterion_1_ground_state_identities() {
    begin("1. ground-state identities at omega = 1 (default grid)");
    const GroundState& gs = gs_at(1.0);
    const auto& r = gs.report;
    record("|2K - 5P| / K", rel(2 * r.kinetic - 5 * r.interaction, r.kinetic) <= 1e-6,
           rel(2 * r.kinetic - 5 * r.interaction, r.kinetic), 1e-6);
    record("|2wM - P| / P", rel(2 * r.mass - r.interaction, r.interaction) <= 1e-6,
           rel(2 * r.mass - r.interaction, r.interaction), 1e-6);
    record("|I_w - wM| / wM", rel(r.i_omega - r.mass, r.mass) <= 1e-6,
           rel(r.i_omega - r.mass, r.mass), 1e-6);
    record("elliptic residual", gs.residual <= 1e-7, gs.residual, 1e-7);
    record("runtime [s]", elapsed() <= 60.0, elapsed(), 60.0);
}

void criterion_2_cross_solver() {
    begin("2. cross-solver agreement at omega = 1");
    const GroundState& gf = gs_at(1.0);
    GroundState pv = cache().get_or_solve(1.0, default_ground_state_grid(1.0),
                                          SolveMethod::petviashvili);
    GroundState sh = cache().get_or_solve(1.0, default_ground_state_grid(1.0),
                                          SolveMethod::shooting);
    for (auto [name, a, b] :
         {std::tuple<const char*, const FunctionalReport*, const FunctionalReport*>(
              "gradient_flow vs petviashvili", &gf.report, &pv.report),
          {"gradient_flow vs shooting", &gf.report, &sh.report}}) {
        record(std::string(name) + ": M", rel(a->mass - b->mass, a->mass) <= 1e-4,
               rel(a->mass - b->mass, a->mass), 1e-4);
        record(std::string(name) + ": K", rel(a->kinetic - b->kinetic, a->kinetic) <= 1e-4,
               rel(a->kinetic - b->kinetic, a->kinetic), 1e-4);
        record(std::string(name) + ": P",
               rel(a->interaction - b->interaction, a->interaction) <= 1e-4,
               rel(a->interaction - b->interaction, a->interaction), 1e-4);
    }
    record("runtime [s]", elapsed() <= 300.0, elapsed(), 300.0);
}

void criterion_3_scaling_law() {
    begin("3. scaling law across omega in {1/4, 1, 4}");
    const GroundState& g1 = gs_at(1.0);
    auto cgn = [](const GroundState& g) {
        return g.report.interaction /
               (std::pow(g.report.mass, 0.25) * std::pow(g.report.kinetic, 1.25));
    };
    for (double w : {0.25, 4.0}) {
        const GroundState& gw = gs_at(w);
        double m_ratio = gw.report.mass / (std::pow(w, -0.5) * g1.report.mass);
        double k_ratio = gw.report.kinetic / (std::pow(w, 0.5) * g1.report.kinetic);
        record("M ~ w^{-1/2} at w = " + std::to_string(w), std::abs(m_ratio - 1) <= 1e-5,
               std::abs(m_ratio - 1), 1e-5);
        record("K ~ w^{1/2} at w = " + std::to_string(w), std::abs(k_ratio - 1) <= 1e-5,
               std::abs(k_ratio - 1), 1e-5);
        record("C_GN omega-independent at w = " + std::to_string(w),
               std::abs(cgn(gw) / cgn(g1) - 1) <= 1e-6, std::abs(cgn(gw) / cgn(g1) - 1), 1e-6);
    }
}

void criterion_4_sharp_gn() {
    begin("4. sharp Gagliardo-Nirenberg property (200 seeded pairs)");
    const GroundState& gs = gs_at(1.0);
    ThresholdSet thr = thresholds_from_ground_state(gs);
    auto grid = std::make_shared<RadialGrid>(2048, 30.0);
    std::mt19937_64 rng(20260808);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        FieldPair p = (i % 2 == 0) ? random_radial_pair(grid, rng)
                                   : random_projectable_pair(grid, rng);
        double M = mass_of(p), K = kinetic_of(p), P = interaction_of(p);
        double rhs = thr.c_gn * std::pow(M, 0.25) * std::pow(K, 1.25);
        worst = std::min(worst, (rhs - P) / rhs);
    }
    record("min gap / rhs over 200 pairs", worst >= -1e-8, worst, -1e-8);
    double rhs_gs = thr.c_gn * std::pow(gs.report.mass, 0.25) *
                    std::pow(gs.report.kinetic, 1.25);
    record("ground state attains equality", rel(rhs_gs - gs.report.interaction, rhs_gs) <= 1e-6,
           rel(rhs_gs - gs.report.interaction, rhs_gs), 1e-6);
}

void criterion_5_conservation() {
    begin("5. conservation and dt-convergence (t = 1, dt = 1e-3)");
    // Standing-wave leg at omega = 1/4 (dt pinned by the criterion, omega
    // free; at omega = 1 the orbital instability contaminates the horizon).
    const GroundState& gq = gs_at(0.25);
    EvolutionConfig ec;
    ec.dt = 1e-3;
    ec.t_end = 1.0;
    ec.stride = 100;
    RunRecord sw = evolve(gq.pair, ec, 0.25);
    record("standing wave: mass drift", sw.mass_drift_max <= 1e-8, sw.mass_drift_max, 1e-8);
    record("standing wave: energy drift", sw.energy_drift_max <= 1e-6, sw.energy_drift_max, 1e-6);

    auto grid = std::make_shared<RadialGrid>(2048, 25.0);
    FieldPair gauss = FieldPair::zero(grid);
    for (int i = 0; i < grid->n(); ++i) {
        double r = grid->nodes()[i];
        gauss.u[i] = 2.0 * std::exp(-r * r);
        gauss.v[i] = 2.0 * std::exp(-r * r);
    }
    RunRecord g1 = evolve(gauss, ec, 1.0);
    record("gaussian: mass drift", g1.mass_drift_max <= 1e-8, g1.mass_drift_max, 1e-8);
    record("gaussian: energy drift", g1.energy_drift_max <= 1e-6, g1.energy_drift_max, 1e-6);
    EvolutionConfig eh = ec;
    eh.dt = 5e-4;
    eh.stride = 200;
    RunRecord g2 = evolve(gauss, eh, 1.0);
    double ratio = g1.energy_drift_max / g2.energy_drift_max;
    record("halving dt: gaussian energy-drift ratio", ratio >= 3.5 && ratio <= 4.5, ratio, 4.0,
           "(mass is machine-conserved and standing-wave energy drift is O(dt^4); "
           "the gaussian energy drift is the dt^2-limited witness)");
}

void criterion_6_virial_dynamic() {
    begin("6. dynamic virial identity (gaussian run, t in [0, 0.5])");
    auto grid = std::make_shared<RadialGrid>(2048, 25.0);
    FieldPair data = FieldPair::zero(grid);
    for (int i = 0; i < grid->n(); ++i) {
        double r = grid->nodes()[i];
        data.u[i] = 1.0 * std::exp(-r * r);
        data.v[i] = 0.8 * std::exp(-1.1 * r * r);
    }
    EvolutionConfig ec;
    ec.dt = 1e-3;
    ec.t_end = 0.5;
    ec.stride = 5; // V second difference with Delta t = 5 dt
    RunRecord rec = evolve(data, ec, 1.0);
    double worst_fd = 0, worst_routes = 0;
    int checked = 0;
    for (size_t k = 1; k + 1 < rec.samples.size(); ++k) {
        const auto& sm = rec.samples[k - 1];
        const auto& s0 = rec.samples[k];
        const auto& sp = rec.samples[k + 1];
        double dtau = s0.t - sm.t;
        if (std::abs((sp.t - s0.t) - dtau) > 1e-12) continue;
        double fd = (sp.variance - 2 * s0.variance + sm.variance) / (dtau * dtau);
        double rhs = 8 * s0.rep.kinetic - 20 * s0.rep.interaction;
        worst_fd = std::max(worst_fd, rel(fd - rhs, rhs));
        double route2 = 10 * s0.rep.energy - 2 * s0.rep.kinetic;
        worst_routes = std::max(worst_routes, rel(rhs - route2, std::abs(rhs) + 1));
        ++checked;
    }
    record("V''(t) vs 8K - 20P (central second difference)", checked > 50 && worst_fd <= 1e-3,
           worst_fd, 1e-3);
    record("10E - 2K equals 8K - 20P at each sample", worst_routes <= 1e-12, worst_routes, 1e-12);
}

void criterion_7_localized_virial() {
    begin("7. localized virial: identity readings vs finite differences");
    auto grid = std::make_shared<RadialGrid>(2048, 25.0);
    FieldPair data = FieldPair::zero(grid);
    for (int i = 0; i < grid->n(); ++i) {
        double r = grid->nodes()[i];
        data.u[i] = 1.0 * std::exp(-r * r);
        data.v[i] = 0.8 * std::exp(-1.1 * r * r);
    }
    double R = 6.0; // data effectively supported in r < R/4
    EvolutionConfig ec;
    ec.dt = 1e-3;
    ec.t_end = 0.4;
    ec.stride = 5;
    ec.loc_virial_R = R;
    RunRecord rec = evolve(data, ec, 1.0);
    double worst_ip = 0, worst_ipp = 0, worst_rem = 0;
    int checked = 0;
    for (size_t k = 1; k + 1 < rec.samples.size(); ++k) {
        const auto& sm = rec.samples[k - 1];
        const auto& s0 = rec.samples[k];
        const auto& sp = rec.samples[k + 1];
        double dtau = s0.t - sm.t;
        double fd1 = (sp.lv.I - sm.lv.I) / (2 * dtau);
        double fd2 = (sp.lv.I - 2 * s0.lv.I + sm.lv.I) / (dtau * dtau);
        worst_ip = std::max(worst_ip, rel(fd1 - s0.lv.I_prime, std::abs(s0.lv.I_double_prime) +
                                                                   std::abs(fd1) + 1e-12));
        worst_ipp = std::max(worst_ipp, rel(fd2 - s0.lv.I_double_prime, s0.lv.I_double_prime));
        double k208 = 8 * s0.rep.kinetic - 20 * s0.rep.interaction;
        worst_rem = std::max(worst_rem, (std::abs(s0.lv.R1) + std::abs(s0.lv.R2) +
                                         std::abs(s0.lv.R3)) /
                                            std::abs(k208));
        ++checked;
    }
    record("I'(t) reading vs dI/dt", checked > 40 && worst_ip <= 1e-3, worst_ip, 1e-3);
    record("I''(t) reading vs d2I/dt2", worst_ipp <= 5e-3, worst_ipp, 5e-3);
    record("remainders |R1|+|R2|+|R3| for data in r < R/4", worst_rem <= 1e-6, worst_rem, 1e-6);
    record("runtime [s]", elapsed() <= 120.0, elapsed(), 120.0);
}

void criterion_8_scattering_side() {
    begin("8. dichotomy, scattering side (a = 0.8, t = 20)");
    const GroundState& gs = gs_at(1.0);
    ThresholdSet thr = thresholds_from_ground_state(gs);
    double M1 = thr.ground_mass;

    FieldPair p8 = scaled_gs(0.8, gs);
    DichotomyVerdict v = classify_pair(p8, thr);
    record_flag("classify(0.8 gs) = scatter", v.prediction == Prediction::scatter,
                prediction_name(v.prediction));
    record("me_product = 0.73728 M1^2", rel(v.me_product - 0.73728 * M1 * M1, M1 * M1) <= 1e-4,
           v.me_product / (M1 * M1), 0.73728);
    record("mk_product = 2.048 M1^2", rel(v.mk_product - 2.048 * M1 * M1, M1 * M1) <= 1e-4,
           v.mk_product / (M1 * M1), 2.048);

    auto big = std::make_shared<RadialGrid>(32768, 200.0);
    FieldPair data = regrid(p8, big);
    EvolutionConfig ec;
    ec.dt = 1e-3;
    ec.t_end = 20.0;
    ec.stride = 200;
    RunRecord rec = evolve(data, ec, 1.0);
    double kmax = 0, k0 = rec.samples.front().rep.kinetic;
    for (const auto& s : rec.samples) kmax = std::max(kmax, s.rep.kinetic / k0);
    record_flag("run reaches t = 20", rec.termination == Termination::reached_t_end,
                termination_name(rec.termination));
    record("K(t) <= 1.2 K(0)", kmax <= 1.2, kmax, 1.2);
    double expn = 0;
    bool fit_ok = fit_l3_decay(rec, 5.0, 20.0, expn);
    record("L3 decay exponent in [5,20] = -5/6 +- 0.1",
           fit_ok && std::abs(expn + 5.0 / 6.0) <= 0.1, expn, -5.0 / 6.0);
    PersistenceReport pr = threshold_persistence_monitor(rec, thr);
    record_flag("MK threshold side never flips", pr.applicable && pr.side_constant,
                "min margin " + std::to_string(pr.min_margin));
}

void criterion_9_blowup_side() {
    begin("9. dichotomy, blow-up side (a = 1.2, radial, finite variance)");
    const GroundState& gs = gs_at(1.0);
    ThresholdSet thr = thresholds_from_ground_state(gs);
    FieldPair data = scaled_gs(1.2, gs);
    DichotomyVerdict v = classify_pair(data, thr);
    record_flag("classify(1.2 gs) = blow_up_or_grow_up",
                v.prediction == Prediction::blow_up_or_grow_up, prediction_name(v.prediction));
    record_flag("finite variance flag", v.finite_variance && v.radial, "");

    EvolutionConfig ec;
    ec.dt = 2e-4;
    ec.t_end = 3.0;
    ec.stride = 100;
    RunRecord rec = evolve(data, ec, 1.0);
    record_flag("blow-up indicator fires", rec.termination == Termination::blowup_indicator,
                "at t = " + std::to_string(rec.t_final));
    bool concave = true;
    double worst_second = 0;
    for (size_t k = 1; k + 1 < rec.samples.size(); ++k) {
        double dtau = rec.samples[k].t - rec.samples[k - 1].t;
        double fd = (rec.samples[k + 1].variance - 2 * rec.samples[k].variance +
                     rec.samples[k - 1].variance) /
                    (dtau * dtau);
        worst_second = std::max(worst_second, fd);
        if (!(fd < 0)) concave = false;
    }
    record("V(t) second difference strictly negative", concave, worst_second, 0.0);
    double i_gs = gs.report.i_omega;
    double worst_slack = -1e9;
    bool bound_held = true;
    for (const auto& s : rec.samples) {
        double i1 = 0.5 * s.rep.mass + 0.5 * s.rep.energy;
        double bound = 16.0 * (i1 - i_gs);
        double slack = (s.rep.k_20_8 - bound) / std::abs(bound);
        worst_slack = std::max(worst_slack, slack);
        if (s.rep.k_20_8 > bound + 1e-4 * std::abs(bound)) bound_held = false;
    }
    record("K208 <= 16 (I_w - I_w(gs)) with 1e-4 slack", bound_held, worst_slack, 1e-4);
}

void criterion_10_standing_wave() {
    begin("10. standing-wave neutrality (phi_1, psi_1), t in [0, 5]");
    const GroundState& gs = gs_at(1.0);
    ThresholdSet thr = thresholds_from_ground_state(gs);
    DichotomyVerdict v = classify_pair(gs.pair, thr);
    record_flag("classify(gs) = above_threshold_unknown",
                v.prediction == Prediction::above_threshold_unknown,
                prediction_name(v.prediction));

    EvolutionConfig ec;
    ec.dt = 2.5e-4;
    ec.t_end = 5.0;
    ec.stride = 2000;
    ec.accumulate_strichartz = false;
    RunRecord rec = evolve(gs.pair, ec, 1.0);
    double nn = 0, dd = 0;
    const RadialGrid& g = *gs.pair.rgrid;
    for (int i = 0; i < g.n(); ++i) {
        double w = g.volume_weights()[i];
        nn += w * std::norm(gs.pair.u[i]);
        double d = std::abs(rec.final_state.u[i]) - std::abs(gs.pair.u[i]);
        dd += w * d * d;
    }
    double drift = std::sqrt(dd / nn);
    record("modulus profile drift over [0,5] (documented red)", drift <= 1e-5, drift, 1e-5,
           "(orbitally unstable standing wave, measured rate ~4.7: e^{23} amplification "
           "puts 1e-5 below the machine seed floor; see README)");
}

void criterion_11_cartesian() {
    begin("11. momentum and Galilean checks (cartesian, n = 16)");
    auto cg = std::make_shared<CartesianGrid>(16, 10.0);
    FieldPair p = FieldPair::zero(cg);
    const int n = cg->n();
    size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3)
                    for (int i4 = 0; i4 < n; ++i4, ++idx) {
                        double xs[5] = {cg->x_of(i0), cg->x_of(i1), cg->x_of(i2), cg->x_of(i3),
                                        cg->x_of(i4)};
                        double gb = 1.0;
                        for (double x : xs) {
                            double acc = 0;
                            for (int im = -2; im <= 2; ++im) {
                                double y = x + 20.0 * im;
                                acc += std::exp(-0.02 * y * y);
                            }
                            gb *= acc;
                        }
                        p.u[idx] = 0.25 * gb;
                        p.v[idx] = 0.20 * gb;
                    }
    std::array<double, 5> xi{M_PI / 10.0, 0, 0, 0, 0};
    FieldPair b = galilean_boost(p, xi, 0.0);
    FunctionalReport r0 = evaluate(p, 1.0), r1 = evaluate(b, 1.0);
    double kexp = r0.kinetic + xi[0] * xi[0] * r0.mass + 2 * xi[0] * r0.momentum[0];
    record("boost algebra: K = |xi|^2 M + 2 xi.P~ + K", rel(r1.kinetic - kexp, kexp) <= 1e-6,
           rel(r1.kinetic - kexp, kexp), 1e-6);

    EvolutionConfig ec;
    ec.dt = 2.5e-3;
    ec.t_end = 0.5;
    ec.stride = 50;
    RunRecord rec = evolve(b, ec, 1.0);
    double worst = 0;
    for (double m : rec.momentum_drift_max) worst = std::max(worst, m);
    record("momentum drift per component over t = 0.5", worst <= 1e-6, worst, 1e-6);

    EvolutionConfig ecc = ec;
    ecc.stride = 1 << 20;
    ecc.accumulate_strichartz = false;
    RunRecord ra = evolve(b, ecc, 1.0);
    RunRecord rb = evolve(p, ecc, 1.0);
    FieldPair bb = galilean_boost(rb.final_state, xi, 0.5);
    double nn = 0, dd = 0;
    for (size_t i = 0; i < bb.u.size(); ++i) {
        nn += std::norm(ra.final_state.u[i]);
        dd += std::norm(ra.final_state.u[i] - bb.u[i]);
    }
    record("evolve(boost) vs boost(evolve) rel L2 at t = 0.5", std::sqrt(dd / nn) <= 1e-4,
           std::sqrt(dd / nn), 1e-4);
    record("runtime [s]", elapsed() <= 600.0, elapsed(), 600.0);
}

void criterion_12_negative_energy() {
    begin("12. negative-energy shortcut (a = 3)");
    const GroundState& gs = gs_at(1.0);
    ThresholdSet thr = thresholds_from_ground_state(gs);
    FieldPair p3 = scaled_gs(3.0, gs);
    FunctionalReport rep = evaluate(p3, 1.0);
    record("E(3 gs) = -63 M1", rel(rep.energy + 63.0 * thr.ground_mass, thr.ground_mass) <= 1e-4,
           rep.energy / thr.ground_mass, -63.0);
    auto shortcut = negative_energy_shortcut(p3, thr);
    record_flag("shortcut fires", shortcut.has_value(), "");
    DichotomyVerdict v = classify_pair(p3, thr);
    record_flag("shortcut verdict matches classify",
                shortcut && shortcut->prediction == v.prediction &&
                    v.prediction == Prediction::blow_up_or_grow_up,
                prediction_name(v.prediction));
}

} // namespace

int main() {
    std::printf("rnls acceptance suite\n");
    auto total0 = std::chrono::steady_clock::now();
    criterion_1_ground_state_identities();
    criterion_2_cross_solver();
    criterion_3_scaling_law();
    criterion_4_sharp_gn();
    criterion_5_conservation();
    criterion_6_virial_dynamic();
    criterion_7_localized_virial();
    criterion_8_scattering_side();
    criterion_9_blowup_side();
    criterion_10_standing_wave();
    criterion_11_cartesian();
    criterion_12_negative_energy();
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - total0).count();
    std::printf("=== %s: %d failing check(s), total %.1f s ===\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT", g_failures, total);
    return g_failures == 0 ? 0 : 2;
}
