#pragma once

#include <optional>

#include "rnls/evolution.hpp"
#include "rnls/functionals.hpp"

namespace rnls {

// Sharp-dichotomy prediction in the computable (M*E, M*K) coordinates:
// below both thresholds -> scatter; below ME, above MK -> blow up or grow
// up; at or above the ME threshold (including a relative boundary band of
// 1e-4) -> unknown. Grow-up is representable but never emitted by the
// runtime detector.
enum class Prediction { scatter, blow_up_or_grow_up, above_threshold_unknown };

const char* prediction_name(Prediction p);

struct DichotomyVerdict {
    Prediction prediction = Prediction::above_threshold_unknown;
    double me_product = 0;
    double mk_product = 0;
    ThresholdSet thresholds;
    int sign_of_k208 = 0; // 0 inside the measured-equality band
    double k208 = 0;
    double omega0 = 0;    // witnessing frequency (I_1(gs)/M)^2
    bool energy_nonpositive = false;
    bool finite_variance = false;
    bool radial = false;

    nlohmann::json to_json() const;
};

inline constexpr double kBoundaryBand = 1e-4; // relative width of the unknown band

DichotomyVerdict classify_pair(const FieldPair& pair, const ThresholdSet& thresholds);

// Fires only when E <= 0: the verdict is then blow_up_or_grow_up without
// consulting the thresholds (strengthened to blow-up under finite variance
// or radial symmetry, visible through the flags).
std::optional<DichotomyVerdict> negative_energy_shortcut(const FieldPair& pair,
                                                         const ThresholdSet& thresholds);

struct PersistenceReport {
    bool applicable = false;   // requires me(0) below the threshold
    bool side_constant = true; // MK never crosses its threshold
    int initial_side = 0;      // -1 below, +1 above
    double min_margin = 0;     // min |mk - mk_threshold| / mk_threshold
    bool lemma_bound_held = true; // quantitative sign bound at every sample
    double worst_bound_violation = 0;
    int flip_sample = -1;
};

// Checks the threshold-side invariance along a sampled trajectory plus the
// applicable quantitative bound (with `rel_slack` slack) at every sample.
// A flip flags the record; it signals numerical drift, not a refutation.
PersistenceReport threshold_persistence_monitor(const RunRecord& record,
                                                const ThresholdSet& thresholds,
                                                double rel_slack = 1e-4);

// Maps a finished record onto finite-horizon evidence.
ScatterEvidence runtime_verdict(const RunRecord& record);

} // namespace rnls
