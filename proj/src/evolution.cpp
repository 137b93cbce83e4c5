#include "rnls/evolution.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rnls {

using nlohmann::json;

void EvolutionConfig::validate() const {
    if (!(dt > 0) || dt > 0.05) throw ConfigError("evolution: dt must be in (0, 0.05]");
    if (!(t_end > 0)) throw ConfigError("evolution: t_end must be positive");
    if (stride < 1) throw ConfigError("evolution: stride must be >= 1");
    if (blowup_kinetic_factor <= 1) throw ConfigError("evolution: kinetic guard must exceed 1");
    if (!(blowup_tail_fraction > 0 && blowup_tail_fraction < 1))
        throw ConfigError("evolution: tail fraction must be in (0,1)");
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::reached_t_end: return "reached_t_end";
        case Termination::blowup_indicator: return "blowup_indicator";
        case Termination::diverged: return "diverged";
    }
    return "?";
}

const char* scatter_label_name(ScatterLabel l) {
    switch (l) {
        case ScatterLabel::consistent_with_scattering: return "consistent_with_scattering";
        case ScatterLabel::blowup_indicator: return "blowup_indicator";
        case ScatterLabel::inconclusive: return "inconclusive";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Pointwise quadratic substep: u' = 2 i v conj(u), v' = i u^2.
// ---------------------------------------------------------------------------

namespace {

inline void nl_deriv(const cplx& u, const cplx& v, cplx& du, cplx& dv) {
    du = cplx(0, 2.0) * v * std::conj(u);
    dv = cplx(0, 1.0) * u * u;
}

inline void nl_rk4_step(cplx& u, cplx& v, double h) {
    cplx k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    nl_deriv(u, v, k1u, k1v);
    nl_deriv(u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
    nl_deriv(u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
    nl_deriv(u + h * k3u, v + h * k3v, k4u, k4v);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

inline void nl_substep(cplx& u, cplx& v, double dt) {
    nl_rk4_step(u, v, 0.5 * dt);
    nl_rk4_step(u, v, 0.5 * dt);
}

} // namespace

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------

Stepper::Stepper(const FieldPair& prototype, double dt, int order)
    : dt_(dt), order_(order), backend_(prototype.backend) {
    if (order != 2 && order != 4) throw ConfigError("stepper: order must be 2 or 4");
    std::vector<double> stage_dts;
    if (order == 2) {
        stage_dts = {dt};
    } else {
        double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        double w0 = 1.0 - 2.0 * w1;
        stage_dts = {w1 * dt, w0 * dt, w1 * dt};
    }
    if (backend_ == Backend::cartesian) {
        cgrid_ = prototype.cgrid;
        mask_.resize(cgrid_->npts());
        const int n = cgrid_->n();
        size_t idx = 0;
        std::array<int, 5> m{};
        for (m[0] = 0; m[0] < n; ++m[0])
            for (m[1] = 0; m[1] < n; ++m[1])
                for (m[2] = 0; m[2] < n; ++m[2])
                    for (m[3] = 0; m[3] < n; ++m[3])
                        for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                            bool keep = true;
                            for (int a = 0; a < 5; ++a)
                                if (!cgrid_->keep_mode(m[a])) keep = false;
                            mask_[idx] = keep ? 1 : 0;
                        }
    }
    for (double sdt : stage_dts) {
        Stage st;
        st.dt = sdt;
        if (backend_ == Backend::radial) {
            st.plan_u = std::make_shared<RadialPropagatorPlan>(prototype.rgrid, 1.0, 0.5 * sdt);
            st.plan_v = std::make_shared<RadialPropagatorPlan>(prototype.rgrid, 0.5, 0.5 * sdt);
        } else {
            const int n = cgrid_->n();
            st.phase_u.resize(cgrid_->npts());
            st.phase_v.resize(cgrid_->npts());
            std::vector<double> k2(n);
            for (int j = 0; j < n; ++j) k2[j] = cgrid_->k_of(j) * cgrid_->k_of(j);
            size_t idx = 0;
            std::array<int, 5> m{};
            for (m[0] = 0; m[0] < n; ++m[0])
                for (m[1] = 0; m[1] < n; ++m[1])
                    for (m[2] = 0; m[2] < n; ++m[2])
                        for (m[3] = 0; m[3] < n; ++m[3])
                            for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                                double ks = k2[m[0]] + k2[m[1]] + k2[m[2]] + k2[m[3]] + k2[m[4]];
                                double ph = -0.5 * sdt * ks;
                                st.phase_u[idx] = cplx(std::cos(ph), std::sin(ph));
                                double phv = 0.5 * ph;
                                st.phase_v[idx] = cplx(std::cos(phv), std::sin(phv));
                            }
        }
        stages_.push_back(std::move(st));
    }
}

void Stepper::kick(FieldPair& pair, const Stage& st, bool full) const {
    if (backend_ == Backend::radial) {
        const RadialGrid& g = *pair.rgrid;
        std::vector<cplx> gu = g.to_conjugate(pair.u);
        std::vector<cplx> gv = g.to_conjugate(pair.v);
        // A fused full kick is two half CN substeps so the composition is
        // bit-identical to the unfused Strang chain.
        st.plan_u->substep(gu);
        st.plan_v->substep(gv);
        if (full) {
            st.plan_u->substep(gu);
            st.plan_v->substep(gv);
        }
        pair.u = g.from_conjugate(gu);
        pair.v = g.from_conjugate(gv);
    } else {
        const CartesianGrid& g = *cgrid_;
        g.fft5(pair.u, false);
        g.fft5(pair.v, false);
        // The dealias mask rides along with every kick; the kick after a
        // nonlinear substep is the one the 2/3 rule requires.
        for (size_t i = 0; i < pair.u.size(); ++i) {
            if (!mask_[i]) {
                pair.u[i] = 0;
                pair.v[i] = 0;
            } else {
                cplx pu = st.phase_u[i], pv = st.phase_v[i];
                if (full) {
                    pu *= pu;
                    pv *= pv;
                }
                pair.u[i] *= pu;
                pair.v[i] *= pv;
            }
        }
        g.fft5(pair.u, true);
        g.fft5(pair.v, true);
    }
}

void Stepper::nonlinear(FieldPair& pair, const Stage& st) const {
    for (size_t i = 0; i < pair.u.size(); ++i) nl_substep(pair.u[i], pair.v[i], st.dt);
}

void Stepper::strang_inplace(FieldPair& pair, const Stage& st) const {
    kick(pair, st, false);
    nonlinear(pair, st);
    kick(pair, st, false);
}

void Stepper::step_inplace(FieldPair& pair) const {
    if (pair.backend != backend_) throw ConfigError("stepper: backend mismatch");
    for (const Stage& st : stages_) strang_inplace(pair, st);
}

FieldPair Stepper::step(const FieldPair& pair) const {
    pair.require_finite("step");
    FieldPair out = pair;
    step_inplace(out);
    if (!out.finite()) throw DivergedStateError("step: non-finite output", 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

namespace {

double l3_norm(const FieldPair& pair, const std::vector<cplx>& f) {
    if (pair.is_radial()) {
        const RadialGrid& g = *pair.rgrid;
        const auto& wv = g.volume_weights();
        double acc = 0;
        for (int i = 0; i < g.n(); ++i) {
            double a = std::abs(f[i]);
            acc += wv[i] * a * a * a;
        }
        return std::cbrt(kS4Area * acc);
    }
    double acc = 0;
    for (const cplx& z : f) {
        double a = std::abs(z);
        acc += a * a * a;
    }
    return std::cbrt(acc * pair.cgrid->cell_volume());
}

// Share of the (discrete) kinetic energy carried by the top band of modes.
double spectral_tail_fraction(const FieldPair& pair, double band) {
    if (pair.is_radial()) {
        const RadialGrid& g = *pair.rgrid;
        const int n = g.n();
        // DST-I of the conjugated fields; k_m = pi (m+1) / r_max.
        std::vector<cplx> gu = g.to_conjugate(pair.u);
        std::vector<cplx> gv = g.to_conjugate(pair.v);
        double total = 0, tail = 0;
        const int m_cut = static_cast<int>((1.0 - band) * n);
        const double c = M_PI / (n + 1);
        for (int m = 0; m < n; ++m) {
            cplx su = 0, sv = 0;
            for (int j = 0; j < n; ++j) {
                double s = std::sin(c * (j + 1) * (m + 1));
                su += s * gu[j];
                sv += s * gv[j];
            }
            double k = M_PI * (m + 1) / g.r_max();
            double e = k * k * (std::norm(su) + 0.5 * std::norm(sv));
            total += e;
            if (m >= m_cut) tail += e;
        }
        return total > 0 ? tail / total : 0.0;
    }
    const CartesianGrid& g = *pair.cgrid;
    std::vector<cplx> uh = pair.u, vh = pair.v;
    g.fft5(uh, false);
    g.fft5(vh, false);
    const int n = g.n();
    const double kmax = M_PI / g.spacing();
    const double cut = (1.0 - band) * kmax;
    std::vector<double> k2(n);
    for (int j = 0; j < n; ++j) k2[j] = g.k_of(j) * g.k_of(j);
    double total = 0, tail = 0;
    size_t idx = 0;
    std::array<int, 5> m{};
    for (m[0] = 0; m[0] < n; ++m[0])
        for (m[1] = 0; m[1] < n; ++m[1])
            for (m[2] = 0; m[2] < n; ++m[2])
                for (m[3] = 0; m[3] < n; ++m[3])
                    for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                        double ks = k2[m[0]] + k2[m[1]] + k2[m[2]] + k2[m[3]] + k2[m[4]];
                        double e = ks * (std::norm(uh[idx]) + 0.5 * std::norm(vh[idx]));
                        total += e;
                        if (ks >= cut * cut) tail += e;
                    }
    return total > 0 ? tail / total : 0.0;
}

} // namespace

RunRecord evolve(const FieldPair& initial, const EvolutionConfig& config, double omega) {
    config.validate();
    initial.require_finite("evolve");
    RunRecord rec;
    rec.omega = omega;
    rec.config = config;
    rec.backend = initial.backend;

    Stepper stepper(initial, config.dt, config.order);
    FieldPair state = initial;
    std::optional<CutoffFamily> lv_family;
    if (config.loc_virial_R > 0 && initial.is_radial())
        lv_family = CutoffFamily::blowup(*initial.rgrid, config.loc_virial_R);

    FunctionalReport rep0 = evaluate(state, omega);
    const double M0 = rep0.mass;
    const double E0 = rep0.energy;
    const double K0 = rep0.kinetic;
    std::array<double, 5> P0 = rep0.momentum;

    double s6_u = 0, s6_v = 0; // running \int ||.||_{L3}^6 dt
    double l3u_prev = l3_norm(state, state.u);
    double l3v_prev = l3_norm(state, state.v);

    auto push_sample = [&](double t, bool blowup_flag) {
        RunSample s;
        s.t = t;
        s.rep = evaluate(state, omega);
        auto var = detail::variance_raw(state);
        if (var.reliable) s.variance = var.value;
        if (lv_family) s.lv = localized_virial(state, *lv_family);
        s.l3_u = l3u_prev;
        s.l3_v = l3v_prev;
        s.s_norm_u = std::pow(s6_u, 1.0 / 6.0);
        s.s_norm_v = std::pow(s6_v, 1.0 / 6.0);
        s.blowup_flag = blowup_flag;
        if (M0 > 0)
            rec.mass_drift_max = std::max(rec.mass_drift_max, std::abs(s.rep.mass - M0) / M0);
        rec.energy_drift_max = std::max(rec.energy_drift_max,
                                        std::abs(s.rep.energy - E0) / (std::abs(E0) + K0 + 1e-300));
        for (int a = 0; a < 5; ++a)
            rec.momentum_drift_max[a] =
                std::max(rec.momentum_drift_max[a], std::abs(s.rep.momentum[a] - P0[a]));
        rec.samples.push_back(std::move(s));
    };

    push_sample(0.0, false);

    const long nsteps = static_cast<long>(std::llround(config.t_end / config.dt));
    double t = 0;
    Termination term = Termination::reached_t_end;
    // Fused stepping for the plain Strang path: adjacent half kicks merge
    // into full kicks between nonlinear substeps, with the boundary half
    // kicks at sample points. Order 4 keeps the explicit composition.
    bool fused = config.order == 2;
    bool open_half = true; // next step must start with a half kick
    for (long k = 0; k < nsteps; ++k) {
        bool at_sample = ((k + 1) % config.stride == 0) || (k + 1 == nsteps);
        try {
            if (fused) {
                const auto& st0 = stepper.stages_.front();
                if (open_half) stepper.kick(state, st0, false);
                stepper.nonlinear(state, st0);
                stepper.kick(state, st0, !at_sample);
                open_half = at_sample;
            } else {
                stepper.step_inplace(state);
            }
        } catch (const DivergedStateError&) {
            term = Termination::diverged;
            break;
        }
        if (!state.finite()) {
            term = Termination::diverged;
            break;
        }
        t = (k + 1) * config.dt;
        if (config.accumulate_strichartz) {
            double l3u = l3_norm(state, state.u);
            double l3v = l3_norm(state, state.v);
            s6_u += 0.5 * config.dt * (std::pow(l3u_prev, 6) + std::pow(l3u, 6));
            s6_v += 0.5 * config.dt * (std::pow(l3v_prev, 6) + std::pow(l3v, 6));
            l3u_prev = l3u;
            l3v_prev = l3v;
        }
        if (!at_sample) continue;
        if (!config.accumulate_strichartz) {
            l3u_prev = l3_norm(state, state.u);
            l3v_prev = l3_norm(state, state.v);
        }
        double K = kinetic_of(state);
        bool indicator = false;
        if (K >= config.blowup_kinetic_factor * K0 && K0 > 0) {
            double tail = spectral_tail_fraction(state, config.blowup_tail_band);
            indicator = tail >= config.blowup_tail_fraction;
        }
        push_sample(t, indicator);
        if (indicator) {
            term = Termination::blowup_indicator;
            break;
        }
    }
    rec.termination = term;
    rec.t_final = t;
    rec.final_state = std::move(state);
    if (term == Termination::diverged && !rec.samples.empty())
        rec.samples.back().blowup_flag = true;
    return rec;
}

// ---------------------------------------------------------------------------
// RunRecord output
// ---------------------------------------------------------------------------

std::string RunRecord::csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "t,M,E,K,P,K_20_8,I_omega,variance,loc_virial_I,loc_virial_Ip,loc_virial_Ipp,"
          "rem_R1,rem_R2,rem_R3,s_norm_u,s_norm_v,flags\n";
    for (const RunSample& s : samples) {
        os << s.t << ',' << s.rep.mass << ',' << s.rep.energy << ',' << s.rep.kinetic << ','
           << s.rep.interaction << ',' << s.rep.k_20_8 << ',' << s.rep.i_omega << ','
           << s.variance << ',' << s.lv.I << ',' << s.lv.I_prime << ',' << s.lv.I_double_prime
           << ',' << s.lv.R1 << ',' << s.lv.R2 << ',' << s.lv.R3 << ',' << s.s_norm_u << ','
           << s.s_norm_v << ',' << (s.blowup_flag ? "blowup_indicator" : "ok") << '\n';
    }
    return os.str();
}

json RunRecord::footer_json() const {
    json j;
    j["termination"] = termination_name(termination);
    j["t_final"] = t_final;
    j["omega"] = omega;
    j["backend"] = backend == Backend::radial ? "radial" : "cartesian";
    j["mass_drift_max"] = mass_drift_max;
    j["energy_drift_max"] = energy_drift_max;
    j["momentum_drift_max"] = momentum_drift_max;
    j["config"] = {{"dt", config.dt},
                   {"t_end", config.t_end},
                   {"stride", config.stride},
                   {"blowup_kinetic_factor", config.blowup_kinetic_factor},
                   {"blowup_tail_fraction", config.blowup_tail_fraction},
                   {"blowup_tail_band", config.blowup_tail_band},
                   {"accumulate_strichartz", config.accumulate_strichartz},
                   {"loc_virial_R", config.loc_virial_R}};
    return j;
}

void RunRecord::write(const std::filesystem::path& csv_path) const {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << csv();
    std::filesystem::path footer = csv_path;
    footer += ".footer.json";
    std::ofstream fo(footer);
    if (!fo) throw IoError("cannot write " + footer.string());
    fo << footer_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

NonlinearCheckReport nonlinear_substep_exactness_check(
    const std::vector<std::pair<cplx, cplx>>& samples, double dt) {
    NonlinearCheckReport rep;
    for (const auto& [u0, v0] : samples) {
        cplx u = u0, v = v0;
        nl_substep(u, v, dt);
        // Reference: the same flow with 4000 micro RK4 steps.
        cplx ur = u0, vr = v0;
        const int micro = 4000;
        for (int i = 0; i < micro; ++i) nl_rk4_step(ur, vr, dt / micro);
        double scale = std::abs(u0) + std::abs(v0);
        if (scale > 0) {
            double dev = (std::abs(u - ur) + std::abs(v - vr)) / scale;
            rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev);
        }
        double inv0 = std::norm(u0) + 2.0 * std::norm(v0);
        double inv1 = std::norm(u) + 2.0 * std::norm(v);
        if (inv0 > 0)
            rep.max_invariant_drift =
                std::max(rep.max_invariant_drift, std::abs(inv1 - inv0) / inv0);
    }
    return rep;
}

bool fit_l3_decay(const RunRecord& record, double t_lo, double t_hi, double& exponent) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const RunSample& s : record.samples) {
        if (s.t < t_lo || s.t > t_hi) continue;
        double l3 = s.l3_u + s.l3_v;
        if (!(l3 > 0) || !(s.t > 0)) continue;
        double x = std::log(s.t), y = std::log(l3);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 4) return false;
    double denom = n * sxx - sx * sx;
    if (denom <= 0) return false;
    exponent = (n * sxy - sx * sy) / denom;
    return true;
}

ScatterEvidence scattering_diagnostic(const RunRecord& record) {
    ScatterEvidence ev;
    if (record.samples.empty()) return ev;
    double K0 = record.samples.front().rep.kinetic;
    for (const RunSample& s : record.samples)
        ev.kinetic_max_ratio = std::max(ev.kinetic_max_ratio,
                                        K0 > 0 ? s.rep.kinetic / K0 : 0.0);
    ev.fit_t_lo = std::max(5.0, 0.25 * record.t_final);
    ev.fit_t_hi = record.t_final;
    ev.fit_valid = fit_l3_decay(record, ev.fit_t_lo, ev.fit_t_hi, ev.fitted_exponent);
    // Saturation of the accumulated L^6_t L^3_x norm: share of S^6 gathered
    // in the last quarter of the run.
    const RunSample& last = record.samples.back();
    double s6u_end = std::pow(last.s_norm_u, 6), s6v_end = std::pow(last.s_norm_v, 6);
    double t_q = 0.75 * record.t_final;
    double s6u_q = 0, s6v_q = 0;
    for (const RunSample& s : record.samples) {
        if (s.t <= t_q) {
            s6u_q = std::pow(s.s_norm_u, 6);
            s6v_q = std::pow(s.s_norm_v, 6);
        }
    }
    ev.snorm_tail_fraction_u = s6u_end > 0 ? (s6u_end - s6u_q) / s6u_end : 0.0;
    ev.snorm_tail_fraction_v = s6v_end > 0 ? (s6v_end - s6v_q) / s6v_end : 0.0;

    if (record.termination == Termination::blowup_indicator) {
        ev.label = ScatterLabel::blowup_indicator;
    } else if (record.termination == Termination::reached_t_end && ev.fit_valid &&
               ev.kinetic_max_ratio <= 1.5 && ev.fitted_exponent <= -0.4) {
        ev.label = ScatterLabel::consistent_with_scattering;
    } else {
        ev.label = ScatterLabel::inconclusive;
    }
    return ev;
}

} // namespace rnls
