#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rnls/functionals.hpp"
#include "rnls/grid.hpp"

namespace rnls {

enum class SolveMethod { gradient_flow, petviashvili, shooting };

const char* method_name(SolveMethod m);

struct SolverConfig {
    double tol_action = 1e-10;  // relative action decrease considered stalled
    int action_patience = 20;   // consecutive stalled steps before stopping
    double tol_res = 1e-7;      // relative sup-norm residual target
    int max_iters = 20000;
    double step0 = 1e-2;        // initial descent step (grows on success)
    double relax = 0.7;         // Petviashvili relaxation
    double seed_amplitude = 0;  // 0 -> 2*omega
};

struct OdeConfig {
    double r_step = 1e-3;
    double r_end = 0;           // 0 -> 20 / sqrt(omega)
    double bracket_lo = 2.0;    // initial (phi(0), psi(0)) search box, in units of omega
    double bracket_hi = 45.0;
    int scan_points = 40;
    int max_sweeps = 60;
};

// A solved ground state. `residual` is the solver's own convergence measure:
// for the grid solvers the relative sup norm of the discrete (gNLS)
// collocation residual, for shooting the endpoint decay defect
// max(phi(r_end), psi(r_end)) / phi(0).
struct GroundState {
    double omega = 1.0;
    FieldPair pair;             // radial, real-valued, nonnegative
    FunctionalReport report;
    SolveMethod method = SolveMethod::gradient_flow;
    double residual = 0;
    int iterations = 0;

    // Checks nonnegativity, radial monotonicity, the Pohozaev relations
    // 2K = 5P and 2wM = P, the action identity I_w = wM and the residual
    // bound; throws VerificationError with the failing quantity.
    void verify() const;

    nlohmann::json meta_json() const;
};

// Constrained minimization of I_w on K_w^{20,8} = 0: preconditioned descent
// with a Nehari re-projection after every step.
GroundState solve_ground_state(double omega, std::shared_ptr<const RadialGrid> grid,
                               const SolverConfig& config = {});

// Fixed-point iteration with a stabilizing power (independent grid solver).
GroundState solve_petviashvili(double omega, std::shared_ptr<const RadialGrid> grid,
                               const SolverConfig& config = {});

// Two-parameter shooting on the radial ODE system (independent of the grid
// discretization; functionals integrated on the fine ODE grid). The returned
// pair is resampled onto `grid` for profile comparisons.
GroundState solve_shooting(double omega, const OdeConfig& config,
                           std::shared_ptr<const RadialGrid> grid);

// me = M1*E1, mk = M1*K1, c_gn = P1/(M1^{1/4} K1^{5/4}); requires a verified
// ground state at omega = 1.
ThresholdSet thresholds_from_ground_state(const GroundState& gs1);

// Single-writer cache keyed by (omega, n, r_max, method, tolerances); entries
// re-verify on load. Directory layout: <root>/gs/omega=<w>/n=<n>/rmax=<r>/<method>/.
class GroundStateCache {
public:
    explicit GroundStateCache(std::filesystem::path root = {});
    GroundState get_or_solve(double omega, std::shared_ptr<const RadialGrid> grid,
                             SolveMethod method = SolveMethod::gradient_flow,
                             const SolverConfig& config = {});
    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path entry_dir(double omega, const RadialGrid& grid,
                                    SolveMethod method, const SolverConfig& config) const;

private:
    std::filesystem::path root_;
};

// RNLS_CACHE env var, else ./rnls_cache.
std::filesystem::path default_cache_root();

// Ground-state working grid: n = 8192, r_max = 50/sqrt(omega). Scaling the
// box with the omega^{-1/2} length scale keeps the resolved-wavenumber
// product k*h omega-independent, so the discrete identity defects stay at
// the few-1e-8 level for every frequency.
std::shared_ptr<RadialGrid> default_ground_state_grid(double omega);

} // namespace rnls
