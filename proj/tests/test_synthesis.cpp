#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgl/errors.hpp"
#include "cgl/synthesis.hpp"

using namespace cgl;

namespace {

CGLParams low_mode_params(double nu = 0.0) {
    CGLParams p;
    p.nu = nu;
    p.Q.push_back(constant_poly(1, 1.0));
    p.Q.push_back(harmonic_sin({1}));
    p.Q.push_back(harmonic_cos({1}));
    return p;
}

SolverConfig fast_config() {
    SolverConfig c;
    c.grid = GridSpec(1, 64);
    c.s = 1;
    c.dt_max = 2e-3;
    return c;
}

SpectralField one_plus_02sinx(const GridSpec& g) {
    TrigPolynomial ic(1);
    ic.add_cos({0}, 1.0);
    ic.add_sin({1}, 0.2);
    return to_field(ic, g);
}

}  // namespace

TEST_CASE("conjugation coefficients: real case, canonical coupling, branch flip") {
    auto ab = conjugation_coeffs(1.0, 0.0, 0.0);
    CHECK(ab.a == doctest::Approx(1.0));
    CHECK(ab.b == doctest::Approx(0.0));

    const double nu = 1.7;
    auto cc = conjugation_coeffs(1.0 / (1.0 + nu * nu), -nu / (1.0 + nu * nu), nu);
    CHECK(cc.a == doctest::Approx(1.0 / (1.0 + nu * nu)).epsilon(1e-12));
    CHECK(cc.b == doctest::Approx(-nu / (1.0 + nu * nu)).epsilon(1e-12));

    auto zz = conjugation_coeffs(0.0, 0.0, 0.4);
    CHECK(zz.a == 0.0);
    CHECK(zz.b == 0.0);

    // the flipped branch satisfies the same defining identity
    const Complex flipped = -cc.value();
    const Complex lhs = Complex(1.0, nu) * flipped * flipped;
    CHECK(std::abs(lhs - Complex(1.0 / (1.0 + nu * nu), -nu / (1.0 + nu * nu))) < 1e-12);
}

TEST_CASE("conjugation coefficients satisfy the defining identity on random inputs") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> ur(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double r1 = ur(rng), r2 = ur(rng), nu = ur(rng);
        const auto ab = conjugation_coeffs(r1, r2, nu);
        const Complex lhs = Complex(1.0, nu) * ab.value() * ab.value();
        CHECK(std::abs(lhs - Complex(r1, r2)) < 1e-12 * (1.0 + std::abs(r1) + std::abs(r2)));
    }
}

TEST_CASE("limit probe: phi = 0, u = 0 errors shrink with delta") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    auto rows = limit_probe(psi0, TrigPolynomial(1), {0.0, 0.0, 0.0}, p, cfg, {0.1, 0.05, 0.025});
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i].error > rows[i + 1].error);
    CHECK(rows.back().error < rows.front().error);
}

TEST_CASE("limit probe: constant control direction, decreasing error, positive slope") {
    auto p = low_mode_params(1.0);
    p.r1 = 0.5;
    p.r2 = -0.5;
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    auto rows =
        limit_probe(psi0, TrigPolynomial(1), {0.5, 0.0, 0.0}, p, cfg, {0.08, 0.04, 0.02, 0.01});
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i].error > rows[i + 1].error);
    CHECK(loglog_slope(rows) > 0.0);
}

TEST_CASE("limit probe: threaded rows match sequential rows exactly") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    TrigPolynomial phi = constant_poly(1, 1.0) - harmonic_cos({1});
    auto seq = limit_probe(psi0, phi, {0.0, 0.0, 0.0}, p, cfg, {0.08, 0.04});
    auto par = limit_probe(psi0, phi, {0.0, 0.0, 0.0}, p, cfg, {0.08, 0.04}, 2);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i].error == par[i].error);
}

TEST_CASE("limit probe input validation") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    CHECK_THROWS_AS(limit_probe(psi0, TrigPolynomial(1), {0, 0, 0}, p, cfg, {0.1, 0.2}), InputError);
    TrigPolynomial negative = -1.0 * constant_poly(1, 1.0);
    CHECK_THROWS_AS(limit_probe(psi0, negative, {0, 0, 0}, p, cfg, {0.1, 0.05}), InputError);
}

TEST_CASE("null control: trivial and unsupported cases") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    SynthesisConfig synth;

    SpectralField zero(cfg.grid);
    auto empty = null_control_search(zero, 0.1, 0.5, 1.0, 0.0, p, cfg, synth);
    CHECK(empty.schedule.segments.empty());

    auto psi0 = one_plus_02sinx(cfg.grid);
    const double norm0 = psi0.sobolev_norm(cfg.s);
    auto free_only = null_control_search(psi0, 3.0 * norm0, 0.5, 1.0, 0.0, p, cfg, synth);
    REQUIRE(free_only.schedule.segments.size() == 1);
    for (double v : free_only.schedule.segments[0].u) CHECK(v == 0.0);

    CHECK_THROWS_AS(null_control_search(psi0, 0.1, 0.5, 0.0, 1.0, p, cfg, synth), UnsupportedError);
}

TEST_CASE("null control: chosen exponent matches the margin rule and the goal is met") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    cfg.dt_max = 1e-3;
    SynthesisConfig synth;
    synth.delta0 = 0.05;
    synth.max_refinements = 12;

    TrigPolynomial unit(1);
    unit.add_cos({0}, 1.0);
    auto psi0 = to_field(unit, cfg.grid);  // |psi0|_s = 1
    const double eps = 0.1;
    auto result = null_control_search(psi0, eps, 0.5, 1.0, 0.0, p, cfg, synth);
    CHECK(result.c == doctest::Approx(std::log(0.04)).epsilon(1e-12));
    CHECK(result.final_hs < eps);
    REQUIRE(result.schedule.segments.size() == 2);
    CHECK(result.schedule.segments[0].duration + result.schedule.segments[1].duration ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("phase plan: empty target, level-0 structure, duration bookkeeping") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    SynthesisConfig synth;
    synth.delta0 = 0.02;
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto psi0 = one_plus_02sinx(cfg.grid);

    auto empty_plan = phase_plan(TrigPolynomial(1), psi0, chain, 0.0, p, synth, 1.0);
    CHECK(empty_plan.total_time == 0.0);
    CHECK(empty_plan.root.empty());

    TrigPolynomial theta = constant_poly(1, 0.4) + 0.2 * harmonic_sin({1});
    auto plan = phase_plan(theta, psi0, chain, 0.0, p, synth, 1.0);
    CHECK(plan.level == 0);
    REQUIRE(plan.root.size() == 1);
    CHECK(plan.root[0].type == PlanNode::Type::segment);
    REQUIRE(plan.flattened.segments.size() == 1);
    CHECK(plan.flattened.segments[0].duration == plan.total_time);
    // u amplitudes are target coefficients / delta
    CHECK(plan.flattened.segments[0].u[0] * plan.total_time == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(plan.flattened.segments[0].u[1] * plan.total_time == doctest::Approx(0.2).epsilon(1e-9));

    double sum = 0.0;
    for (const auto& seg : plan.flattened.segments) sum += seg.duration;
    CHECK(sum == plan.total_time);

    auto js = plan.to_json();
    CHECK(js.find("\"type\": \"segment\"") != std::string::npos);
    CHECK(js.find("level_deltas_seconds") != std::string::npos);
}

TEST_CASE("phase plan: level-1 target produces conjugation branches around free flow") {
    auto p = low_mode_params();
    SynthesisConfig synth;
    synth.delta0 = 0.02;
    synth.exponent_cap = 30.0;
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);

    TrigPolynomial theta = 0.3 * harmonic_cos({2});
    auto plan = phase_plan(theta, psi0, chain, 0.0, p, synth, 1.0);
    CHECK(plan.level == 1);
    REQUIRE(plan.root.size() >= 1);
    CHECK(plan.root[0].type == PlanNode::Type::conjugation);
    REQUIRE(plan.root[0].children.size() == 3);
    CHECK(plan.root[0].children[0].type == PlanNode::Type::segment);
    CHECK(plan.root[0].children[1].type == PlanNode::Type::free_flow);
    CHECK(plan.root[0].children[2].type == PlanNode::Type::segment);
    // flattened: minus segment, free, plus segment, theta0 segment
    CHECK(plan.flattened.segments.size() == 4);
    double sum = 0.0;
    for (const auto& seg : plan.flattened.segments) sum += seg.duration;
    CHECK(sum == plan.total_time);

    // the shifted part is nonnegative and respects the exponent cap
    const auto& branch = plan.root[0];
    TrigPolynomial lifted = branch.part + constant_poly(1, branch.shift);
    CHECK(lifted.min_on_grid(cfg.grid) >= 0.0);
    CHECK(lifted.max_on_grid(cfg.grid) / std::sqrt(branch.delta) <= synth.exponent_cap * 1.001);
}

TEST_CASE("conjugation multiplications invert to round-off at plan scale") {
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    TrigPolynomial part = std::sqrt(0.6) * harmonic_sin({1});
    const double shift = -part.min_on_grid(cfg.grid) + 1e-6;
    TrigPolynomial lifted = part + constant_poly(1, shift);
    const double delta = 0.05;
    const Complex z = Complex(1.0, 0.0) / std::sqrt(delta);
    auto there = exp_multiplier(lifted, -z, psi0);
    auto back = exp_multiplier(lifted, z, there);
    CHECK(distance_hs(back, psi0, cfg.s) < 1e-10 * psi0.sobolev_norm(cfg.s));
}

TEST_CASE("execute_and_refine: empty plan returns psi0 with zero error") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    SynthesisConfig synth;
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto psi0 = one_plus_02sinx(cfg.grid);
    auto plan = phase_plan(TrigPolynomial(1), psi0, chain, 0.0, p, synth, 1.0);
    auto report = execute_and_refine(plan, psi0, p, cfg, chain, synth, 1.0);
    CHECK(report.converged);
    CHECK(report.rel_error == 0.0);
    CHECK(report.total_time == 0.0);
}

TEST_CASE("execute_and_refine: level-0 constant target converges quickly") {
    auto p = low_mode_params();
    p.mu = 0.2;
    auto cfg = fast_config();
    cfg.dt_max = 1e-3;
    SynthesisConfig synth;
    synth.delta0 = 0.05;
    synth.delta_shrink = 0.5;
    synth.max_refinements = 10;
    synth.error_budget = 0.05;
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto psi0 = one_plus_02sinx(cfg.grid);

    TrigPolynomial theta = constant_poly(1, 0.3);
    auto plan = phase_plan(theta, psi0, chain, 0.0, p, synth, 0.2);
    auto report = execute_and_refine(plan, psi0, p, cfg, chain, synth, 0.2);
    CHECK(report.converged);
    CHECK(report.rel_error <= synth.error_budget);
    CHECK(report.total_time < 0.2);
    CHECK(report.rows.size() >= 1);
}

TEST_CASE("same-argument target: identity, global scaling, exact log-ratio") {
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    MollifierSpec spec;

    auto zero_target = same_argument_target(psi0, psi0, spec, 8);
    CHECK(zero_target.l2_norm() < 1e-12);

    SpectralField doubled = psi0;
    doubled *= 2.0;
    auto log2_target = same_argument_target(psi0, doubled, spec, 8);
    CHECK(log2_target.term({0}).cos_coeff == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK((log2_target - constant_poly(1, std::log(2.0))).l2_norm() < 1e-9);

    TrigPolynomial expo(1);
    expo.add_cos({1}, 0.3);
    auto psi1 = exp_multiplier(expo, Complex(1.0, 0.0), psi0);
    auto got = same_argument_target(psi0, psi1, spec, 8);
    CHECK((got - expo).l2_norm() < 1e-8);
}

TEST_CASE("same-argument target: mollifier vanishes near zeros and detects mismatches") {
    auto cfg = fast_config();
    // sin x vanishes at 0 and pi
    auto base = to_field(harmonic_sin({1}), cfg.grid);
    SpectralField scaled = base;
    scaled *= 1.5;
    MollifierSpec spec;
    spec.eta = 0.4;
    auto rho = mollifier_on_grid(base, scaled, spec);
    double lo = 2.0, hi = -1.0;
    for (double v : rho) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);

    // a genuine phase difference must be rejected
    auto rotated = exp_multiplier(harmonic_cos({1}), Complex(0.0, 0.2), base);
    CHECK_THROWS_AS(same_argument_target(base, rotated, spec, 8), InputError);
}

TEST_CASE("phase plan rejects targets outside the chain") {
    auto p = low_mode_params();
    SynthesisConfig synth;
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto cfg = fast_config();
    auto psi0 = one_plus_02sinx(cfg.grid);
    CHECK_THROWS_AS(phase_plan(harmonic_sin({3}), psi0, chain, 0.0, p, synth, 1.0),
                    DecompositionError);
}

TEST_CASE("execute_and_refine flags an exhausted budget as not converged") {
    auto p = low_mode_params();
    auto cfg = fast_config();
    SynthesisConfig synth;
    synth.delta0 = 0.05;
    synth.max_refinements = 2;
    synth.error_budget = 1e-12;  // unreachable
    auto chain = saturation_chain(harmonic_basis(standard_frequency_set(1)), 1);
    auto psi0 = one_plus_02sinx(cfg.grid);
    TrigPolynomial theta = constant_poly(1, 0.3);
    auto plan = phase_plan(theta, psi0, chain, 0.0, p, synth, 0.5);
    CHECK(plan.total_time < 0.5);
    auto report = execute_and_refine(plan, psi0, p, cfg, chain, synth, 0.5);
    CHECK_FALSE(report.converged);
    CHECK(report.rows.size() == 3);
    CHECK(report.rel_error < 1.0);  // best effort is still a sensible state
}
