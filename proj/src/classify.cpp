#include "rnls/classify.hpp"

#include <cmath>

namespace rnls {

using nlohmann::json;

const char* prediction_name(Prediction p) {
    switch (p) {
        case Prediction::scatter: return "scatter";
        case Prediction::blow_up_or_grow_up: return "blow_up_or_grow_up";
        case Prediction::above_threshold_unknown: return "above_threshold_unknown";
    }
    return "?";
}

json DichotomyVerdict::to_json() const {
    json j;
    j["prediction"] = prediction_name(prediction);
    j["me_product"] = me_product;
    j["mk_product"] = mk_product;
    j["thresholds"] = thresholds.to_json();
    j["sign_of_k208"] = sign_of_k208;
    j["k_20_8"] = k208;
    j["omega0"] = omega0;
    j["energy_nonpositive"] = energy_nonpositive;
    j["finite_variance"] = finite_variance;
    j["radial"] = radial;
    return j;
}

DichotomyVerdict classify_pair(const FieldPair& pair, const ThresholdSet& thresholds) {
    double M = mass_of(pair);
    if (!(M > 0)) throw ConfigError("classify: undefined for the zero pair");
    FunctionalReport rep = evaluate(pair, 1.0);
    DichotomyVerdict v;
    v.thresholds = thresholds;
    v.me_product = rep.mass * rep.energy;
    v.mk_product = rep.mass * rep.kinetic;
    v.k208 = rep.k_20_8;
    v.omega0 = std::pow(thresholds.ground_mass / rep.mass, 2); // I_1(gs) = M1
    double eq_tol = 1e-9 * std::max(rep.kinetic, rep.mass);
    v.sign_of_k208 = std::abs(rep.k_20_8) <= eq_tol ? 0 : (rep.k_20_8 > 0 ? 1 : -1);
    v.energy_nonpositive = rep.energy <= 0;
    v.finite_variance = rep.variance.has_value();
    v.radial = pair.is_radial();

    if (v.me_product >= thresholds.me_threshold * (1.0 - kBoundaryBand)) {
        v.prediction = Prediction::above_threshold_unknown;
    } else if (v.mk_product < thresholds.mk_threshold) {
        v.prediction = Prediction::scatter;
    } else if (v.mk_product > thresholds.mk_threshold) {
        v.prediction = Prediction::blow_up_or_grow_up;
    } else {
        v.prediction = Prediction::above_threshold_unknown;
    }
    return v;
}

std::optional<DichotomyVerdict> negative_energy_shortcut(const FieldPair& pair,
                                                         const ThresholdSet& thresholds) {
    double M = mass_of(pair);
    if (!(M > 0)) throw ConfigError("negative_energy_shortcut: zero pair");
    FunctionalReport rep = evaluate(pair, 1.0);
    if (rep.energy > 0) return std::nullopt;
    DichotomyVerdict v;
    v.thresholds = thresholds;
    v.me_product = rep.mass * rep.energy;
    v.mk_product = rep.mass * rep.kinetic;
    v.k208 = rep.k_20_8;
    v.omega0 = std::pow(thresholds.ground_mass / rep.mass, 2);
    v.sign_of_k208 = -1; // forced by E <= 0 on a nonzero pair
    v.energy_nonpositive = true;
    v.finite_variance = rep.variance.has_value();
    v.radial = pair.is_radial();
    v.prediction = Prediction::blow_up_or_grow_up;
    return v;
}

PersistenceReport threshold_persistence_monitor(const RunRecord& record,
                                                const ThresholdSet& thresholds,
                                                double rel_slack) {
    PersistenceReport out;
    if (record.samples.empty()) return out;
    const RunSample& s0 = record.samples.front();
    double me0 = s0.rep.mass * s0.rep.energy;
    if (me0 >= thresholds.me_threshold * (1.0 - kBoundaryBand)) return out; // not applicable
    out.applicable = true;
    double mk0 = s0.rep.mass * s0.rep.kinetic;
    out.initial_side = mk0 < thresholds.mk_threshold ? -1 : 1;
    out.min_margin = std::numeric_limits<double>::infinity();
    double gs_action = thresholds.ground_mass; // I_1(phi_1, psi_1) = M1
    for (size_t i = 0; i < record.samples.size(); ++i) {
        const RunSample& s = record.samples[i];
        double mk = s.rep.mass * s.rep.kinetic;
        int side = mk < thresholds.mk_threshold ? -1 : 1;
        out.min_margin = std::min(out.min_margin,
                                  std::abs(mk - thresholds.mk_threshold) / thresholds.mk_threshold);
        if (side != out.initial_side && out.flip_sample < 0) {
            out.side_constant = false;
            out.flip_sample = static_cast<int>(i);
        }
        // Quantitative bounds of the sign-persistence lemma at omega = 1;
        // I_1 is rebuilt from (M, E) so the record's omega does not matter.
        double K = s.rep.kinetic, k208 = s.rep.k_20_8;
        double I = 0.5 * s.rep.mass + 0.5 * s.rep.energy;
        if (out.initial_side < 0) {
            double bound = std::min(gs_action - I, K);
            double viol = (bound - k208) / std::max(std::abs(bound), 1e-300);
            if (k208 < bound * (1.0 - rel_slack)) {
                out.lemma_bound_held = false;
                out.worst_bound_violation = std::max(out.worst_bound_violation, viol);
            }
        } else {
            double bound = 16.0 * (I - gs_action);
            double viol = (k208 - bound) / std::max(std::abs(bound), 1e-300);
            if (k208 > bound + rel_slack * std::abs(bound)) {
                out.lemma_bound_held = false;
                out.worst_bound_violation = std::max(out.worst_bound_violation, viol);
            }
        }
    }
    return out;
}

ScatterEvidence runtime_verdict(const RunRecord& record) { return scattering_diagnostic(record); }

} // namespace rnls
