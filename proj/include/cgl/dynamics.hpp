#pragma once

#include <utility>
#include <vector>

#include "cgl/spectral_field.hpp"
#include "cgl/trig_poly.hpp"

namespace cgl {

/// Physical parameters of the controlled Ginzburg-Landau equation
///   dt psi = V psi + (1+i nu) Lap psi - (1+i mu)|psi|^{2 sigma} psi
///            + (r1 + i r2) <u(t), Q(x)> psi.
struct CGLParams {
    double V = 0.0;   // linear driving rate, >= 0
    double nu = 0.0;  // linear dispersion
    double mu = 0.0;  // nonlinear dispersion
    int sigma = 1;    // nonlinearity degree, >= 1
    double r1 = 1.0;  // bilinear coupling
    double r2 = 0.0;
    std::vector<TrigPolynomial> Q;  // control directions, real-valued

    void validate() const;
    int q() const { return static_cast<int>(Q.size()); }
    TrigPolynomial control_poly(const std::vector<double>& u) const;  // <u, Q>
};

enum class SubstepPolicy { fixed, control_scaled };

struct SolverConfig {
    GridSpec grid;
    int s = 1;                      // Sobolev index; must be >= smallest integer > d/2
    double dt_max = 1e-2;           // seconds
    double blowup_threshold = 0.0;  // <= 0: resolved to 1e6 * max(1, |psi0|_s) at solve start
    SubstepPolicy policy = SubstepPolicy::control_scaled;
    bool nonlinearity_enabled = true;  // explicit test hook, never inferred from parameters

    void validate() const;
};

int sobolev_floor(int d);  // smallest integer strictly greater than d/2

struct ControlSegment {
    double duration = 0.0;  // seconds, > 0
    std::vector<double> u;  // constant control amplitudes over the segment
};

struct ControlSchedule {
    std::vector<ControlSegment> segments;
    double r1 = 1.0;
    double r2 = 0.0;

    double total_duration() const;
    static ControlSchedule free_run(const CGLParams& p) { return {{}, p.r1, p.r2}; }
};

/// Exact flow of dt psi = V psi + (1+i nu) Lap psi over time t.
SpectralField linear_propagator(const SpectralField& psi, double t, const CGLParams& p);

/// Exact pointwise flow of dt psi = -(1+i mu)|psi|^{2 sigma} psi over time t,
/// re-analyzed with dealiasing.
SpectralField nonlinear_flow(const SpectralField& psi, double t, const CGLParams& p);

/// Exact multiplier e^{(r1+i r2) <u,Q> t}.
SpectralField control_flow(const SpectralField& psi, const std::vector<double>& u, double t,
                           const CGLParams& p);

/// One symmetric splitting substep of exact sub-flows,
///   linear(dt/2) o control(dt/2) o nonlinear(dt) o control(dt/2) o linear(dt/2),
/// second-order accurate in dt. Throws BlowupError when the result's H^s norm
/// exceeds the threshold (config.blowup_threshold if positive, else
/// 1e6 * max(1, |psi|_s) of the input).
SpectralField step(const SpectralField& psi, const std::vector<double>& u, double dt,
                   const CGLParams& p, const SolverConfig& config);

struct TrajectoryRow {
    double t = 0.0;
    double hs_norm = 0.0;
    double l2_norm = 0.0;
    double max_modulus = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;
    std::vector<std::pair<double, SpectralField>> snapshots;
    SpectralField final;
};

struct ResolveOptions {
    double sample_dt = 0.0;  // <= 0: record only the endpoints
    std::vector<double> snapshot_times;
};

/// The resolving operator: integrates psi0 under the schedule's piecewise
/// constant control (zero control after the last segment) up to time T.
/// The coupling pair (r1, r2) is taken from the schedule.
Trajectory resolve(const SpectralField& psi0, const ControlSchedule& schedule, double T,
                   const CGLParams& p, const SolverConfig& config, const ResolveOptions& opts = {});

/// Picard iteration of the mild formulation with the exact linear semigroup
/// and midpoint quadrature; independent short-horizon oracle for resolve.
SpectralField picard_reference(const SpectralField& psi0, const ControlSchedule& schedule, double T,
                               const CGLParams& p, const SolverConfig& config,
                               int max_iterations = 50);

/// sup_t |R(psi0+dpsi0, u+du) - R(psi0, u)|_s / (|dpsi0|_s + |du| sqrt(T)),
/// with u and du constant over [0, T]. Returns 0 for a zero perturbation.
double stability_probe(const SpectralField& psi0, const SpectralField& dpsi0,
                       const std::vector<double>& u, const std::vector<double>& du, double T,
                       const CGLParams& p, const SolverConfig& config);

}  // namespace cgl
