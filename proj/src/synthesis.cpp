#include "cgl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "cgl/errors.hpp"

namespace cgl {

namespace {

constexpr double kReprTol = 1e-10;

// Internal signal: a conjugation level needs a larger delta to respect the
// exponent cap.
struct CapViolation {
    int level;
    double min_delta;
};

nlohmann::json poly_to_json(const TrigPolynomial& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, t] : p.terms()) {
        nlohmann::json row = nlohmann::json::array();
        for (int c : k) row.push_back(c);
        row.push_back(t.cos_coeff);
        row.push_back(t.sin_coeff);
        terms.push_back(std::move(row));
    }
    return terms;
}

nlohmann::json node_to_json(const PlanNode& n) {
    nlohmann::json j;
    switch (n.type) {
        case PlanNode::Type::segment:
            j["type"] = "segment";
            j["u"] = n.u;
            j["target"] = poly_to_json(n.target);
            break;
        case PlanNode::Type::free_flow:
            j["type"] = "free";
            break;
        case PlanNode::Type::conjugation:
            j["type"] = "conjugation";
            j["part"] = poly_to_json(n.part);
            j["shift"] = n.shift;
            break;
    }
    j["level"] = n.level;
    j["delta_seconds"] = n.delta;
    if (!n.children.empty()) {
        nlohmann::json kids = nlohmann::json::array();
        for (const auto& c : n.children) kids.push_back(node_to_json(c));
        j["children"] = std::move(kids);
    }
    return j;
}

}  // namespace

ConjugationCoeffs conjugation_coeffs(double r1, double r2, double nu) {
    if (r1 == 0.0 && r2 == 0.0) return {0.0, 0.0};
    const Complex w = Complex(r1, r2) / Complex(1.0, nu);
    const Complex ab = std::sqrt(w);
    return {ab.real(), ab.imag()};
}

void SynthesisConfig::validate() const {
    if (!(delta0 > 0.0)) throw InputError("delta0 must be positive");
    if (!(delta_shrink > 0.0) || !(delta_shrink < 1.0))
        throw InputError("delta_shrink must lie in (0,1)");
    if (max_refinements < 0) throw InputError("max_refinements must be >= 0");
    if (!(error_budget > 0.0)) throw InputError("error_budget must be positive");
    if (!(exponent_cap > 0.0)) throw InputError("exponent_cap must be positive");
}

std::vector<LimitRow> limit_probe(const SpectralField& psi0, const TrigPolynomial& phi,
                                  const std::vector<double>& u, const CGLParams& params,
                                  const SolverConfig& config, const std::vector<double>& deltas,
                                  int threads) {
    config.validate();
    params.validate();
    if (deltas.empty()) throw InputError("limit_probe: empty delta list");
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
        if (!(deltas[i] > deltas[i + 1])) throw InputError("limit_probe: deltas must decrease");
    if (!(deltas.back() > 0.0)) throw InputError("limit_probe: deltas must be positive");
    if (phi.min_on_grid(config.grid) < -1e-12)
        throw InputError("limit_probe: phi must be nonnegative on the grid");

    const ConjugationCoeffs ab = conjugation_coeffs(params.r1, params.r2, params.nu);
    TrigPolynomial exponent = squared_gradient(phi);
    exponent += params.control_poly(u);
    const SpectralField target = exp_multiplier(exponent, Complex(params.r1, params.r2), psi0);

    std::vector<LimitRow> rows(deltas.size());
    auto run_row = [&](std::size_t i) {
        const double delta = deltas[i];
        rows[i].delta = delta;
        try {
            const Complex scale = ab.value() / std::sqrt(delta);
            const SpectralField inward = exp_multiplier(phi, -scale, psi0);
            std::vector<double> boosted(u.size());
            for (std::size_t j = 0; j < u.size(); ++j) boosted[j] = u[j] / delta;
            ControlSchedule sched{{{delta, boosted}}, params.r1, params.r2};
            const SpectralField evolved = resolve(inward, sched, delta, params, config).final;
            const SpectralField outward = exp_multiplier(phi, scale, evolved);
            rows[i].error = distance_hs(outward, target, config.s);
        } catch (const BlowupError&) {
            rows[i].blowup = true;
            rows[i].error = std::numeric_limits<double>::quiet_NaN();
        } catch (const RangeError&) {
            rows[i].blowup = true;
            rows[i].error = std::numeric_limits<double>::quiet_NaN();
        }
    };

    if (threads <= 1 || deltas.size() == 1) {
        for (std::size_t i = 0; i < deltas.size(); ++i) run_row(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex mu;
        const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), deltas.size());
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t mine;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (next >= deltas.size()) return;
                        mine = next++;
                    }
                    run_row(mine);
                }
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

double loglog_slope(const std::vector<LimitRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.blowup || !(r.error > 0.0)) continue;
        const double x = std::log(r.delta);
        const double y = std::log(r.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

NullControlResult null_control_search(const SpectralField& psi0, double epsilon, double T,
                                      double r1, double r2, const CGLParams& params,
                                      const SolverConfig& config, const SynthesisConfig& synth) {
    config.validate();
    synth.validate();
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (!(T > 0.0)) throw InputError("T must be positive");

    NullControlResult result;
    result.schedule.r1 = r1;
    result.schedule.r2 = r2;

    const double norm0 = psi0.sobolev_norm(config.s);
    if (norm0 == 0.0) {
        result.final_hs = 0.0;
        return result;  // already at the target; empty schedule
    }
    if (epsilon > 2.0 * norm0) {
        // c = 0: free evolution alone stays within the proof's margin.
        result.schedule.segments.push_back({T, std::vector<double>(params.Q.size(), 0.0)});
        CGLParams p = params;
        p.r1 = r1;
        p.r2 = r2;
        result.final_hs = resolve(psi0, result.schedule, T, p, config).final.sobolev_norm(config.s);
        return result;
    }
    if (r1 == 0.0)
        throw UnsupportedError(
            "null control with r1 = 0: the amplitude factor e^{c r1} cannot be shrunk");

    // e^{c r1} = 0.4 epsilon / |psi0|_s, i.e. 80% of the epsilon/2 margin.
    result.c = std::log(0.4 * epsilon / norm0) / r1;
    const std::vector<double> u_c =
        solve_span_coefficients(params.Q, constant_poly(params.Q.front().dim(), result.c), 1e-9);

    CGLParams p = params;
    p.r1 = r1;
    p.r2 = r2;
    double best_hs = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= synth.max_refinements; ++j) {
        const double delta = std::min(0.5 * T, synth.delta0) * std::pow(synth.delta_shrink, j);
        std::vector<double> boosted(u_c.size());
        for (std::size_t i = 0; i < u_c.size(); ++i) boosted[i] = u_c[i] / delta;
        ControlSchedule sched{{{delta, boosted}, {T - delta, std::vector<double>(u_c.size(), 0.0)}},
                              r1, r2};
        double hs;
        try {
            hs = resolve(psi0, sched, T, p, config).final.sobolev_norm(config.s);
        } catch (const BlowupError&) {
            result.trials.push_back({delta, std::numeric_limits<double>::quiet_NaN()});
            continue;
        }
        result.trials.push_back({delta, hs});
        if (hs < best_hs) {
            best_hs = hs;
            result.schedule.segments = sched.segments;
            result.final_hs = hs;
        }
        if (hs < epsilon) return result;
    }
    throw NotConvergedError("null control refinement exhausted; best |psi(T)|_s = " +
                            std::to_string(best_hs) + " vs epsilon = " + std::to_string(epsilon));
}

ControlSchedule null_control_schedule(const SpectralField& psi0, double epsilon, double T,
                                      double r1, double r2, const CGLParams& params,
                                      const SolverConfig& config, const SynthesisConfig& synth) {
    return null_control_search(psi0, epsilon, T, r1, r2, params, config, synth).schedule;
}

namespace {

struct PlanBuilder {
    const CGLParams& params;
    const SaturationChain& chain;
    const SynthesisConfig& synth;
    const std::vector<double>& deltas;
    const GridSpec& grid;

    // Emits the node sequence realizing e^{(r1+ir2) target} on the current state.
    void emit(const TrigPolynomial& target, int level, std::vector<PlanNode>& out) const {
        if (target.empty(1e-14)) return;
        const double tnorm = std::max(1.0, target.l2_norm());
        // Drop to the lowest level that already represents the target.
        int lv = level;
        while (lv > 0 &&
               projection_residual(target, chain.levels[static_cast<std::size_t>(lv - 1)]) <
                   kReprTol * tnorm)
            --lv;
        if (lv == 0) {
            PlanNode node;
            node.type = PlanNode::Type::segment;
            node.level = 0;
            node.delta = deltas[0];
            node.target = target;
            const auto coeff = solve_span_coefficients(params.Q, target, 1e-8);
            node.u.resize(coeff.size());
            for (std::size_t i = 0; i < coeff.size(); ++i) node.u[i] = coeff[i] / node.delta;
            out.push_back(std::move(node));
            return;
        }

        const double delta = deltas[static_cast<std::size_t>(lv)];
        DecomposeOptions opts;
        opts.seed = 0xC61ULL + static_cast<std::uint64_t>(lv);
        const Decomposition dec =
            decompose(target, chain.levels[static_cast<std::size_t>(lv - 1)], opts);
        for (const auto& part : dec.parts) {
            const double shift = -part.min_on_grid(grid) + 1e-6;
            TrigPolynomial lifted = part + constant_poly(part.dim(), shift);
            const double mx = lifted.max_on_grid(grid);
            if (mx / std::sqrt(delta) > synth.exponent_cap)
                throw CapViolation{lv, (mx / synth.exponent_cap) * (mx / synth.exponent_cap)};

            PlanNode branch;
            branch.type = PlanNode::Type::conjugation;
            branch.level = lv;
            branch.delta = delta;
            branch.part = part;
            branch.shift = shift;

            TrigPolynomial scaled = (1.0 / std::sqrt(delta)) * lifted;
            emit(-1.0 * scaled, lv - 1, branch.children);
            PlanNode free_node;
            free_node.type = PlanNode::Type::free_flow;
            free_node.level = lv;
            free_node.delta = delta;
            branch.children.push_back(std::move(free_node));
            emit(scaled, lv - 1, branch.children);
            out.push_back(std::move(branch));
        }
        emit(dec.theta0, lv - 1, out);
    }

    void collect(const std::vector<PlanNode>& nodes, ControlSchedule& sched) const {
        for (const auto& n : nodes) {
            switch (n.type) {
                case PlanNode::Type::segment:
                    sched.segments.push_back({n.delta, n.u});
                    break;
                case PlanNode::Type::free_flow:
                    sched.segments.push_back({n.delta, std::vector<double>(params.Q.size(), 0.0)});
                    break;
                case PlanNode::Type::conjugation:
                    collect(n.children, sched);
                    break;
            }
        }
    }
};

}  // namespace

void flatten_plan(PhasePlan& plan, const CGLParams& params, const SaturationChain& chain,
                  const SynthesisConfig& synth) {
    if (chain.levels.empty() || chain.levels[0].basis.empty())
        throw InputError("flatten_plan: empty chain");
    CGLParams p = params;
    p.r1 = plan.r1;
    p.r2 = plan.r2;
    const int d = chain.levels[0].poly_dim();
    const GridSpec grid(d, d == 1 ? 64 : 32);

    TrigPolynomial scaled_theta = (1.0 + plan.nu * plan.nu) * plan.theta;
    for (int attempt = 0; attempt < 40; ++attempt) {
        try {
            PlanBuilder builder{p, chain, synth, plan.level_deltas, grid};
            plan.root.clear();
            builder.emit(scaled_theta, plan.level, plan.root);
            plan.flattened = ControlSchedule{{}, plan.r1, plan.r2};
            builder.collect(plan.root, plan.flattened);
            plan.total_time = plan.flattened.total_duration();
            return;
        } catch (const CapViolation& cv) {
            plan.level_deltas[static_cast<std::size_t>(cv.level)] =
                std::max(plan.level_deltas[static_cast<std::size_t>(cv.level)], cv.min_delta * 1.02);
        }
    }
    throw NotConvergedError("flatten_plan: exponent cap could not be satisfied");
}

PhasePlan phase_plan(const TrigPolynomial& theta, const SpectralField& psi0,
                     const SaturationChain& chain, double nu, const CGLParams& params,
                     const SynthesisConfig& synth, double time_cap) {
    synth.validate();
    if (chain.levels.empty()) throw InputError("phase_plan: empty chain");
    if (psi0.grid().d != theta.dim()) throw InputError("phase_plan: dimension mismatch");

    PhasePlan plan;
    plan.theta = theta;
    plan.nu = nu;
    plan.r1 = 1.0 / (1.0 + nu * nu);
    plan.r2 = -nu / (1.0 + nu * nu);

    if (theta.empty(0.0)) {
        plan.level = 0;
        plan.level_deltas = {synth.delta0};
        plan.total_time = 0.0;
        return plan;
    }

    TrigPolynomial scaled = (1.0 + nu * nu) * theta;
    const double tnorm = std::max(1.0, scaled.l2_norm());
    int level = -1;
    for (std::size_t lv = 0; lv < chain.levels.size(); ++lv) {
        if (projection_residual(scaled, chain.levels[lv]) < kReprTol * tnorm) {
            level = static_cast<int>(lv);
            break;
        }
    }
    if (level < 0) throw DecompositionError(projection_residual(scaled, chain.levels.back()));

    plan.level = level;
    plan.level_deltas.assign(static_cast<std::size_t>(level) + 1, synth.delta0);
    flatten_plan(plan, params, chain, synth);
    if (time_cap > 0.0) {
        // Pre-shrink the deepest delta so the initial plan respects the cap.
        for (int j = 0; j < synth.max_refinements && plan.total_time >= time_cap; ++j) {
            plan.level_deltas[0] *= synth.delta_shrink;
            flatten_plan(plan, params, chain, synth);
        }
    }
    return plan;
}

ExecutionReport execute_and_refine(PhasePlan& plan, const SpectralField& psi0,
                                   const CGLParams& params, const SolverConfig& config,
                                   const SaturationChain& chain, const SynthesisConfig& synth,
                                   double time_cap) {
    config.validate();
    synth.validate();
    CGLParams p = params;
    p.r1 = plan.r1;
    p.r2 = plan.r2;

    const SpectralField target = exp_multiplier(plan.theta, Complex(1.0, -plan.nu), psi0);
    const double tnorm = target.sobolev_norm(config.s);
    const double denom = tnorm > 0.0 ? tnorm : 1.0;

    SolverConfig run_cfg = config;
    if (run_cfg.blowup_threshold <= 0.0) {
        // Executed plans legitimately traverse states amplified by up to
        // e^{exponent_cap}; scale the proxy threshold accordingly.
        run_cfg.blowup_threshold = 1e6 * std::max(1.0, psi0.sobolev_norm(config.s)) *
                                   std::exp(std::min(600.0, 2.0 * synth.exponent_cap));
    }

    ExecutionReport report;
    report.final = psi0;
    report.rel_error = std::numeric_limits<double>::infinity();

    if (plan.theta.empty(0.0)) {
        report.rel_error = distance_hs(psi0, target, config.s) / denom;
        report.converged = report.rel_error <= synth.error_budget;
        report.total_time = 0.0;
        report.level_deltas = plan.level_deltas;
        return report;
    }

    const std::vector<double> base = plan.level_deltas;
    for (int r = 0; r <= synth.max_refinements; ++r) {
        plan.level_deltas = base;
        plan.level_deltas[0] = base[0] * std::pow(synth.delta_shrink, r);
        flatten_plan(plan, params, chain, synth);

        RefinementRow row;
        row.refinement = r;
        row.delta_deepest = plan.level_deltas[0];
        row.total_time = plan.total_time;
        if (time_cap > 0.0 && plan.total_time >= time_cap) {
            row.over_time_cap = true;
            row.rel_error = std::numeric_limits<double>::quiet_NaN();
            report.rows.push_back(row);
            continue;
        }
        try {
            const SpectralField got =
                resolve(psi0, plan.flattened, plan.total_time, p, run_cfg).final;
            row.rel_error = distance_hs(got, target, config.s) / denom;
            report.rows.push_back(row);
            if (row.rel_error < report.rel_error) {
                report.rel_error = row.rel_error;
                report.final = got;
                report.level_deltas = plan.level_deltas;
                report.total_time = plan.total_time;
            }
            if (row.rel_error <= synth.error_budget) {
                report.converged = true;
                return report;
            }
        } catch (const BlowupError&) {
            row.blowup = true;
            row.rel_error = std::numeric_limits<double>::quiet_NaN();
            report.rows.push_back(row);
        }
    }
    return report;  // flagged not-converged; best effort retained
}

std::string PhasePlan::to_json() const {
    nlohmann::json j;
    j["nu"] = nu;
    j["r1"] = r1;
    j["r2"] = r2;
    j["level"] = level;
    j["level_deltas_seconds"] = level_deltas;
    j["total_time_seconds"] = total_time;
    j["theta"] = poly_to_json(theta);
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : root) nodes.push_back(node_to_json(n));
    j["nodes"] = std::move(nodes);
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : flattened.segments) {
        nlohmann::json seg;
        seg["duration_seconds"] = s.duration;
        seg["u"] = s.u;
        segs.push_back(std::move(seg));
    }
    j["flattened_segments"] = std::move(segs);
    return j.dump(2);
}

std::vector<double> mollifier_on_grid(const SpectralField& psi0, const SpectralField& psi1,
                                      const MollifierSpec& spec) {
    if (!psi0.matches(psi1)) throw InputError("mollifier_on_grid: grid mismatch");
    const GridSpec& g = psi0.grid();
    const auto s0 = psi0.synthesize();
    const auto s1 = psi1.synthesize();
    double scale = 0.0;
    for (std::size_t i = 0; i < s0.size(); ++i)
        scale = std::max({scale, std::abs(s0[i]), std::abs(s1[i])});
    const double floor = spec.zero_floor * std::max(scale, 1e-300);

    std::vector<std::size_t> zero_set;
    for (std::size_t i = 0; i < s0.size(); ++i)
        if (std::min(std::abs(s0[i]), std::abs(s1[i])) <= floor) zero_set.push_back(i);

    std::vector<double> rho(s0.size(), 1.0);
    if (zero_set.empty()) return rho;

    std::vector<std::vector<double>> zpts;
    zpts.reserve(zero_set.size());
    for (std::size_t idx : zero_set) zpts.push_back(grid_point(g, idx));

    const double twopi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < s0.size(); ++i) {
        const auto x = grid_point(g, i);
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& z : zpts) {
            double acc = 0.0;
            for (int a = 0; a < g.d; ++a) {
                double dx = std::abs(x[static_cast<std::size_t>(a)] - z[static_cast<std::size_t>(a)]);
                dx = std::min(dx, twopi - dx);
                acc += dx * dx;
            }
            dmin = std::min(dmin, std::sqrt(acc));
        }
        const double t = std::clamp((dmin - spec.eta) / spec.eta, 0.0, 1.0);
        rho[i] = t * t * t * (t * (6.0 * t - 15.0) + 10.0);  // quintic smoothstep
    }
    return rho;
}

TrigPolynomial same_argument_target(const SpectralField& psi0, const SpectralField& psi1,
                                    const MollifierSpec& spec, int degree_cap) {
    if (!psi0.matches(psi1)) throw InputError("same_argument_target: grid mismatch");
    const GridSpec& g = psi0.grid();
    const auto s0 = psi0.synthesize();
    const auto s1 = psi1.synthesize();
    double scale = 0.0;
    for (std::size_t i = 0; i < s0.size(); ++i)
        scale = std::max({scale, std::abs(s0[i]), std::abs(s1[i])});
    if (scale == 0.0) return TrigPolynomial(g.d);

    // Argument agreement away from zeros.
    const double arg_floor = 1e-3 * scale;
    for (std::size_t i = 0; i < s0.size(); ++i) {
        if (std::min(std::abs(s0[i]), std::abs(s1[i])) <= arg_floor) continue;
        const double darg = std::arg(s1[i] * std::conj(s0[i]));
        if (std::abs(darg) > 1e-6)
            throw InputError("same_argument_target: arguments differ by " + std::to_string(darg) +
                             " at a grid point away from zeros");
    }

    const auto rho = mollifier_on_grid(psi0, psi1, spec);
    const double floor = spec.zero_floor * scale;
    std::vector<Complex> phi(s0.size(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < s0.size(); ++i) {
        if (rho[i] == 0.0) continue;
        if (std::min(std::abs(s0[i]), std::abs(s1[i])) <= floor)
            throw InputError(
                "same_argument_target: modulus below floor inside the mollifier support");
        phi[i] = rho[i] * std::log(std::abs(s1[i]) / std::abs(s0[i]));
    }
    SpectralField f = SpectralField::analyze(g, phi);
    f.set_real_valued(true);
    return to_trig_polynomial(f, degree_cap, 1e-6);
}

}  // namespace cgl
