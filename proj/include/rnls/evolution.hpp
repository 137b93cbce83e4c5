#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rnls/functionals.hpp"
#include "rnls/grid.hpp"
#include "rnls/virial.hpp"

namespace rnls {

struct EvolutionConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    int stride = 10;                    // steps between diagnostic samples
    int order = 2;                      // 2: Strang; 4: Yoshida triple jump of Strang steps
    double blowup_kinetic_factor = 50;  // K(t) >= factor * K(0) arms the indicator
    double blowup_tail_fraction = 0.20; // spectral-tail share that fires it
    double blowup_tail_band = 0.10;     // top band of modes inspected
    bool accumulate_strichartz = true;
    double loc_virial_R = 0;            // > 0: sample the blowup-family localized virial

    void validate() const;
};

enum class Termination { reached_t_end, blowup_indicator, diverged };

const char* termination_name(Termination t);

struct RunSample {
    double t = 0;
    FunctionalReport rep;
    double variance = std::numeric_limits<double>::quiet_NaN();
    VirialReading lv;
    double l3_u = 0, l3_v = 0;         // ||.||_{L^3} at this time
    double s_norm_u = 0, s_norm_v = 0; // accumulated L^6_t L^3_x norm up to t
    bool blowup_flag = false;
};

struct RunRecord {
    double omega = 1.0;
    EvolutionConfig config;
    Backend backend = Backend::radial;
    std::vector<RunSample> samples;
    Termination termination = Termination::reached_t_end;
    double t_final = 0;
    double mass_drift_max = 0;   // |M - M0| / M0
    double energy_drift_max = 0; // |E - E0| / (|E0| + K0)
    std::array<double, 5> momentum_drift_max{};
    FieldPair final_state;

    // CSV rows per sample plus a JSON footer (termination + config echo) as
    // a sidecar <base>.footer.json.
    void write(const std::filesystem::path& csv_path) const;
    std::string csv() const;
    nlohmann::json footer_json() const;
};

// One Strang step: half linear flow (mass coefficients 1 and 1/2), the full
// pointwise quadratic substep, half linear flow. The nonlinear substep uses
// two classical RK4 steps and preserves |u|^2 + 2|v|^2 pointwise to near
// machine precision; the Cartesian path applies the 2/3 dealias mask in the
// Fourier stage that follows the quadratic products.
class Stepper {
public:
    // order 2 is the plain Strang step; order 4 composes three Strang steps
    // with the Yoshida coefficients (w1, 1 - 2 w1, w1), w1 = 1/(2 - 2^{1/3}).
    Stepper(const FieldPair& prototype, double dt, int order = 2);
    FieldPair step(const FieldPair& pair) const;
    void step_inplace(FieldPair& pair) const;
    double dt() const { return dt_; }

private:
    struct Stage {
        double dt;
        std::shared_ptr<const RadialPropagatorPlan> plan_u, plan_v;
        std::vector<cplx> phase_u, phase_v; // half-step multipliers
    };
    void strang_inplace(FieldPair& pair, const Stage& st) const;
    void kick(FieldPair& pair, const Stage& st, bool full) const;
    void nonlinear(FieldPair& pair, const Stage& st) const;

    double dt_;
    int order_;
    Backend backend_;
    std::shared_ptr<const CartesianGrid> cgrid_;
    std::vector<Stage> stages_;
    std::vector<uint8_t> mask_;

    friend RunRecord evolve(const FieldPair&, const EvolutionConfig&, double);
};

RunRecord evolve(const FieldPair& initial, const EvolutionConfig& config, double omega);

struct NonlinearCheckReport {
    double max_rel_deviation = 0;   // substep vs high-accuracy integration
    double max_invariant_drift = 0; // pointwise |u|^2 + 2|v|^2 drift
};

NonlinearCheckReport nonlinear_substep_exactness_check(
    const std::vector<std::pair<cplx, cplx>>& samples, double dt);

enum class ScatterLabel { consistent_with_scattering, blowup_indicator, inconclusive };

const char* scatter_label_name(ScatterLabel l);

struct ScatterEvidence {
    ScatterLabel label = ScatterLabel::inconclusive;
    double fitted_exponent = 0; // of ||u||_{L^3} + ||v||_{L^3} ~ t^p
    double fit_t_lo = 0, fit_t_hi = 0;
    bool fit_valid = false;
    double snorm_tail_fraction_u = 0; // S^6 accumulated in the last quarter
    double snorm_tail_fraction_v = 0;
    double kinetic_max_ratio = 0;     // max K(t) / K(0)
};

// Finite-horizon scattering evidence; never claims more than consistency.
ScatterEvidence scattering_diagnostic(const RunRecord& record);

// Least-squares decay exponent of log(l3_u + l3_v) against log t over
// [t_lo, t_hi]; false when fewer than four usable samples.
bool fit_l3_decay(const RunRecord& record, double t_lo, double t_hi, double& exponent);

} // namespace rnls
