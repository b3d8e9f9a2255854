#pragma once

#include <string>
#include <vector>

#include "cgl/dynamics.hpp"
#include "cgl/saturation.hpp"
#include "cgl/spectral_field.hpp"

namespace cgl {

/// a + ib with (1 + i nu)(a + ib)^2 = r1 + i r2 (principal branch).
struct ConjugationCoeffs {
    double a = 0.0;
    double b = 0.0;
    Complex value() const { return {a, b}; }
};

ConjugationCoeffs conjugation_coeffs(double r1, double r2, double nu);

struct SynthesisConfig {
    double delta0 = 0.05;       // initial small-time, seconds
    double delta_shrink = 0.5;  // geometric refinement factor in (0,1)
    int max_refinements = 20;
    double error_budget = 0.05;  // target relative H^s error
    double exponent_cap = 30.0;  // bound on |delta^{-1/2} theta|_inf per branch

    void validate() const;
};

struct LimitRow {
    double delta = 0.0;
    double error = 0.0;  // H^s distance to the limiting multiplier state
    bool blowup = false;
};

/// For each delta: conjugates psi0 by e^{-(a+ib) delta^{-1/2} phi}, runs the
/// flow for time delta under the constant control delta^{-1} u, conjugates
/// back, and reports the H^s distance to e^{(r1+ir2)(B(phi) + <u,Q>)} psi0.
/// Blow-up is recorded per row, not fatal. `threads` caps row parallelism.
std::vector<LimitRow> limit_probe(const SpectralField& psi0, const TrigPolynomial& phi,
                                  const std::vector<double>& u, const CGLParams& params,
                                  const SolverConfig& config, const std::vector<double>& deltas,
                                  int threads = 1);

/// Least-squares slope of log(error) against log(delta) over non-blowup rows.
double loglog_slope(const std::vector<LimitRow>& rows);

struct NullControlTrial {
    double delta = 0.0;
    double final_hs = 0.0;
};

struct NullControlResult {
    ControlSchedule schedule;
    std::vector<NullControlTrial> trials;
    double final_hs = 0.0;
    double c = 0.0;  // chosen constant multiplier exponent
};

/// Builds the two-segment schedule [(delta, delta^{-1} u_c), (T - delta, 0)]
/// with e^{c r1}|psi0|_s comfortably below epsilon, refining delta until the
/// simulated final norm is below epsilon. Requires the constant direction in
/// span(Q) and r1 != 0 (throws UnsupportedError otherwise).
NullControlResult null_control_search(const SpectralField& psi0, double epsilon, double T,
                                      double r1, double r2, const CGLParams& params,
                                      const SolverConfig& config, const SynthesisConfig& synth);

ControlSchedule null_control_schedule(const SpectralField& psi0, double epsilon, double T,
                                      double r1, double r2, const CGLParams& params,
                                      const SolverConfig& config, const SynthesisConfig& synth);

/// Plan tree node. A segment realizes the multiplier e^{(r1+ir2) target} with
/// one constant-control burst of duration delta; a conjugation branch realizes
/// e^{(r1+ir2) B(part)} by recursive plans around a free segment.
struct PlanNode {
    enum class Type { segment, free_flow, conjugation };
    Type type = Type::segment;
    int level = 0;
    double delta = 0.0;
    std::vector<double> u;  // segment: control amplitudes (already / delta)
    TrigPolynomial target{1};
    TrigPolynomial part{1};  // conjugation: theta_j before the shift
    double shift = 0.0;      // c_j with part + shift >= 0 on the grid
    std::vector<PlanNode> children;
};

struct PhasePlan {
    TrigPolynomial theta{1};  // requested target: final multiplier e^{(1-i nu) theta}
    double nu = 0.0;
    double r1 = 1.0;  // 1/(1+nu^2)
    double r2 = 0.0;  // -nu/(1+nu^2)
    int level = 0;
    std::vector<double> level_deltas;  // delta per recursion level, [0] deepest
    std::vector<PlanNode> root;
    ControlSchedule flattened;
    double total_time = 0.0;

    std::string to_json() const;
};

/// Builds the recursive plan steering psi0 toward e^{(1-i nu) theta} psi0.
/// The internal recursion targets (1+nu^2) theta with the coupling fixed to
/// (1/(1+nu^2), -nu/(1+nu^2)). Throws DecompositionError if theta is not
/// representable within the chain.
PhasePlan phase_plan(const TrigPolynomial& theta, const SpectralField& psi0,
                     const SaturationChain& chain, double nu, const CGLParams& params,
                     const SynthesisConfig& synth, double time_cap);

/// Re-expands the node tree and flattened schedule for the plan's current
/// level_deltas, raising deltas at conjugation levels when the exponent cap
/// would be violated.
void flatten_plan(PhasePlan& plan, const CGLParams& params, const SaturationChain& chain,
                  const SynthesisConfig& synth);

struct RefinementRow {
    int refinement = 0;
    double delta_deepest = 0.0;
    double rel_error = 0.0;
    double total_time = 0.0;
    bool blowup = false;
    bool over_time_cap = false;
};

struct ExecutionReport {
    SpectralField final;
    double rel_error = 0.0;
    std::vector<double> level_deltas;
    double total_time = 0.0;
    bool converged = false;
    std::vector<RefinementRow> rows;
};

/// Runs the flattened schedule; on miss, shrinks the deepest level's delta by
/// delta_shrink and rebuilds, up to max_refinements. Returns the best result,
/// flagged not-converged when the budget runs out.
ExecutionReport execute_and_refine(PhasePlan& plan, const SpectralField& psi0,
                                   const CGLParams& params, const SolverConfig& config,
                                   const SaturationChain& chain, const SynthesisConfig& synth,
                                   double time_cap);

struct MollifierSpec {
    double eta = 0.3;         // zero-set margin (torus distance)
    double zero_floor = 1e-9; // relative modulus below which a point counts as a zero
};

/// rho_eta on the grid: 0 within eta of the common zero set, 1 beyond 2 eta,
/// quintic smoothstep between.
std::vector<double> mollifier_on_grid(const SpectralField& psi0, const SpectralField& psi1,
                                      const MollifierSpec& spec);

/// phi_eta = rho_eta ln(|psi1| / |psi0|) projected to degree <= degree_cap.
/// Requires Arg(psi0) = Arg(psi1) away from zeros (tolerance 1e-6).
TrigPolynomial same_argument_target(const SpectralField& psi0, const SpectralField& psi1,
                                    const MollifierSpec& spec, int degree_cap);

}  // namespace cgl
