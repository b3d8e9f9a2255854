#include "cgl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "cgl/errors.hpp"
#include "cgl/saturation.hpp"
#include "cgl/snapshot_io.hpp"

namespace cgl {

namespace fs = std::filesystem;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double need_number(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw InputError("config: missing numeric field '" + key + "'");
    return j[key].get<double>();
}

double number_or(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw InputError("config: field '" + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<TrigPolynomial> q_from_json(const nlohmann::json& spec, int d) {
    std::vector<TrigPolynomial> Q;
    if (spec.is_null() || (spec.is_object() && spec.value("preset", "") == "low-modes")) {
        for (auto& b : harmonic_basis(standard_frequency_set(d)).basis) Q.push_back(b);
        return Q;
    }
    if (spec.is_object() && spec.contains("polys")) {
        for (const auto& terms : spec["polys"]) Q.push_back(poly_from_json(terms, d));
        if (Q.empty()) throw InputError("config: params.Q.polys is empty");
        return Q;
    }
    throw InputError("config: params.Q must be {\"preset\":\"low-modes\"} or {\"polys\":[...]}");
}

}  // namespace

TrigPolynomial poly_from_json(const nlohmann::json& terms, int dim) {
    if (!terms.is_array()) throw InputError("trig polynomial spec must be an array of terms");
    TrigPolynomial p(dim);
    for (const auto& row : terms) {
        if (!row.is_array() || static_cast<int>(row.size()) != dim + 2)
            throw InputError("trig term must be [k_1..k_d, cos, sin]");
        Wavevector k(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a) {
            if (!row[static_cast<std::size_t>(a)].is_number_integer())
                throw InputError("trig term wavevector entries must be integers");
            k[static_cast<std::size_t>(a)] = row[static_cast<std::size_t>(a)].get<int>();
        }
        p.add_cos(k, row[static_cast<std::size_t>(dim)].get<double>());
        p.add_sin(k, row[static_cast<std::size_t>(dim) + 1].get<double>());
    }
    return p;
}

SpectralField field_from_spec(const nlohmann::json& spec, const GridSpec& grid) {
    if (spec.is_object() && spec.contains("constant")) {
        SpectralField f(grid, true);
        f.set_coeff(Wavevector(static_cast<std::size_t>(grid.d), 0),
                    Complex(spec["constant"].get<double>(), 0.0));
        return f;
    }
    if (spec.is_object() && spec.contains("trig"))
        return to_field(poly_from_json(spec["trig"], grid.d), grid);
    if (spec.is_object() && spec.contains("preset")) {
        const std::string name = spec["preset"].get<std::string>();
        TrigPolynomial p(grid.d);
        Wavevector e1(static_cast<std::size_t>(grid.d), 0);
        e1[0] = 1;
        if (name == "one") {
            p.add_cos(Wavevector(static_cast<std::size_t>(grid.d), 0), 1.0);
        } else if (name == "one-plus-02sinx") {
            p.add_cos(Wavevector(static_cast<std::size_t>(grid.d), 0), 1.0);
            p.add_sin(e1, 0.2);
        } else if (name == "one-plus-03cosx") {
            p.add_cos(Wavevector(static_cast<std::size_t>(grid.d), 0), 1.0);
            p.add_cos(e1, 0.3);
        } else {
            throw InputError("unknown initial-condition preset: " + name);
        }
        return to_field(p, grid);
    }
    if (spec.is_object() && spec.contains("file")) {
        const std::string path = spec["file"].get<std::string>();
        if (!fs::exists(path)) throw InputError("initial-condition file does not exist: " + path);
        SpectralField f = read_field(path, grid.dealias_fraction);
        if (!(f.grid() == grid)) throw InputError("initial-condition grid mismatch: " + path);
        return f;
    }
    if (spec.is_object() && spec.contains("exp_trig")) {
        // e^{poly} applied to a base state.
        if (!spec.contains("base")) throw InputError("exp_trig spec requires a base state");
        const SpectralField base = field_from_spec(spec["base"], grid);
        return exp_multiplier(poly_from_json(spec["exp_trig"], grid.d), Complex(1.0, 0.0), base);
    }
    throw InputError("initial_condition must provide constant, trig, preset, exp_trig or file");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.source_text = text;
    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw InputError("config: missing string field 'experiment'");
    cfg.kind = j["experiment"].get<std::string>();
    const bool known = cfg.kind == "simulate" || cfg.kind == "verify-limit" ||
                       cfg.kind == "null-control" || cfg.kind == "phase-control" ||
                       cfg.kind == "saturation-report" || cfg.kind == "same-argument";
    if (!known) throw InputError("config: unknown experiment kind '" + cfg.kind + "'");
    if (!j.contains("output_dir") || !j["output_dir"].is_string())
        throw InputError("config: missing string field 'output_dir'");
    cfg.output_dir = j["output_dir"].get<std::string>();
    cfg.seed = j.value("seed", 0ULL);

    const nlohmann::json solver = j.value("solver", nlohmann::json::object());
    const int d = static_cast<int>(number_or(solver, "d", 1));
    const int n = static_cast<int>(number_or(solver, "n_per_dim", d == 1 ? 64 : 32));
    cfg.solver.grid = GridSpec(d, n, number_or(solver, "dealias_fraction", 2.0 / 3.0));
    cfg.solver.s = static_cast<int>(number_or(solver, "s", sobolev_floor(d)));
    cfg.solver.dt_max = number_or(solver, "dt_max_seconds", 1e-2);
    cfg.solver.blowup_threshold = number_or(solver, "blowup_threshold", 0.0);
    const std::string policy = solver.value("substep_policy", "control-scaled");
    if (policy == "fixed")
        cfg.solver.policy = SubstepPolicy::fixed;
    else if (policy == "control-scaled")
        cfg.solver.policy = SubstepPolicy::control_scaled;
    else
        throw InputError("config: substep_policy must be 'fixed' or 'control-scaled'");
    cfg.solver.nonlinearity_enabled = solver.value("nonlinearity_enabled", true);
    cfg.solver.validate();

    const nlohmann::json params = j.value("params", nlohmann::json::object());
    cfg.params.V = number_or(params, "V", 0.0);
    cfg.params.nu = number_or(params, "nu", 0.0);
    cfg.params.mu = number_or(params, "mu", 0.0);
    cfg.params.sigma = static_cast<int>(number_or(params, "sigma", 1));
    cfg.params.r1 = number_or(params, "r1", 1.0);
    cfg.params.r2 = number_or(params, "r2", 0.0);
    cfg.params.Q = q_from_json(params.contains("Q") ? params["Q"] : nlohmann::json(), d);
    cfg.params.validate();

    const nlohmann::json synth = j.value("synthesis", nlohmann::json::object());
    cfg.synth.delta0 = number_or(synth, "delta0_seconds", 0.05);
    cfg.synth.delta_shrink = number_or(synth, "delta_shrink", 0.5);
    cfg.synth.max_refinements = static_cast<int>(number_or(synth, "max_refinements", 20));
    cfg.synth.error_budget = number_or(synth, "error_budget", 0.05);
    cfg.synth.exponent_cap = number_or(synth, "exponent_cap", 30.0);
    cfg.synth.validate();

    cfg.initial_condition = j.value("initial_condition", nlohmann::json::object());
    cfg.args = j.value("args", nlohmann::json::object());
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    if (!fs::exists(path)) throw InputError("config file does not exist: " + path);
    return from_json_text(read_file(path));
}

int worker_threads() {
    const char* env = std::getenv("CGL_STEER_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return std::clamp(v, 1, 64);
}

namespace {

struct RunContext {
    const ExperimentConfig& cfg;
    fs::path dir;
    nlohmann::json outputs = nlohmann::json::array();
    std::string summary;

    void save(const std::string& name, const std::string& bytes) {
        const fs::path p = dir / name;
        write_file_atomic(p.string(), bytes);
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        nlohmann::json entry;
        entry["file"] = name;
        entry["bytes"] = bytes.size();
        entry["fnv1a64"] = hex;
        outputs.push_back(std::move(entry));
    }

    void save_csv(const std::string& name, const CsvWriter& csv) { save(name, csv.str()); }
};

void run_simulate(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const double T = need_number(cfg.args, "T_seconds");
    const int samples = static_cast<int>(number_or(cfg.args, "sample_count", 200));
    SpectralField psi0 = field_from_spec(cfg.initial_condition, cfg.solver.grid);

    ControlSchedule sched{{}, cfg.params.r1, cfg.params.r2};
    if (cfg.args.contains("schedule")) {
        for (const auto& seg : cfg.args["schedule"].value("segments", nlohmann::json::array())) {
            ControlSegment s;
            s.duration = need_number(seg, "duration_seconds");
            for (const auto& v : seg.value("u", nlohmann::json::array()))
                s.u.push_back(v.get<double>());
            if (static_cast<int>(s.u.size()) != cfg.params.q())
                throw InputError("schedule segment control size != q");
            sched.segments.push_back(std::move(s));
        }
    }

    ResolveOptions opts;
    if (samples > 0) opts.sample_dt = T / samples;
    for (const auto& t : cfg.args.value("snapshot_times_seconds", nlohmann::json::array()))
        opts.snapshot_times.push_back(t.get<double>());

    const Trajectory traj = resolve(psi0, sched, T, cfg.params, cfg.solver, opts);
    CsvWriter csv({"t", "hs_norm", "l2_norm", "max_modulus"});
    for (const auto& row : traj.rows) csv.add_row({row.t, row.hs_norm, row.l2_norm, row.max_modulus});
    ctx.save_csv("trajectory.csv", csv);
    for (const auto& [t, field] : traj.snapshots) {
        std::ostringstream name;
        name << "snapshot_" << format_g17(t) << ".cglf";
        const fs::path p = ctx.dir / name.str();
        write_field(p.string(), field);
        ctx.outputs.push_back({{"file", name.str()},
                               {"bytes", fs::file_size(p)},
                               {"fnv1a64", [&] {
                                    char hex[32];
                                    std::snprintf(hex, sizeof hex, "%016llx",
                                                  static_cast<unsigned long long>(fnv1a64_file(p.string())));
                                    return std::string(hex);
                                }()}});
    }
    std::ostringstream sum;
    sum << "simulate: T=" << format_g17(T)
        << " final_hs=" << format_g17(traj.rows.back().hs_norm)
        << " final_l2=" << format_g17(traj.rows.back().l2_norm);
    ctx.summary = sum.str();
}

void run_verify_limit(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    const TrigPolynomial phi = cfg.args.contains("phi")
                                   ? poly_from_json(cfg.args["phi"], cfg.solver.grid.d)
                                   : TrigPolynomial(cfg.solver.grid.d);
    std::vector<double> u(static_cast<std::size_t>(cfg.params.q()), 0.0);
    if (cfg.args.contains("u")) {
        u.clear();
        for (const auto& v : cfg.args["u"]) u.push_back(v.get<double>());
        if (static_cast<int>(u.size()) != cfg.params.q())
            throw InputError("verify-limit: u size != q");
    }
    std::vector<double> deltas;
    for (const auto& v : cfg.args.value("deltas_seconds", nlohmann::json::array()))
        deltas.push_back(v.get<double>());
    if (deltas.empty()) throw InputError("verify-limit: deltas_seconds is required");

    SpectralField psi0 = field_from_spec(cfg.initial_condition, cfg.solver.grid);
    const auto rows = limit_probe(psi0, phi, u, cfg.params, cfg.solver, deltas, worker_threads());

    CsvWriter csv({"delta_seconds", "hs_error", "blowup"});
    for (const auto& r : rows) csv.add_row({r.delta, r.error, r.blowup ? 1.0 : 0.0});
    ctx.save_csv("limit.csv", csv);

    const double slope = loglog_slope(rows);
    std::ostringstream sum;
    sum << "verify-limit: first_error=" << format_g17(rows.front().error)
        << " final_error=" << format_g17(rows.back().error) << " slope=" << format_g17(slope);
    ctx.summary = sum.str();
    for (const auto& r : rows)
        if (r.blowup) throw NotConvergedError("limit probe recorded a blow-up row");
}

void run_null_control(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    SpectralField psi0 = field_from_spec(cfg.initial_condition, cfg.solver.grid);
    const double T = need_number(cfg.args, "T_seconds");
    double epsilon;
    if (cfg.args.contains("epsilon_abs"))
        epsilon = need_number(cfg.args, "epsilon_abs");
    else
        epsilon = need_number(cfg.args, "epsilon_rel") * psi0.sobolev_norm(cfg.solver.s);

    const auto result = null_control_search(psi0, epsilon, T, cfg.params.r1, cfg.params.r2,
                                            cfg.params, cfg.solver, cfg.synth);
    CsvWriter csv({"delta_seconds", "final_hs", "epsilon"});
    for (const auto& t : result.trials) csv.add_row({t.delta, t.final_hs, epsilon});
    ctx.save_csv("nullcontrol.csv", csv);

    nlohmann::json sj;
    sj["r1"] = result.schedule.r1;
    sj["r2"] = result.schedule.r2;
    sj["c"] = result.c;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : result.schedule.segments)
        segs.push_back({{"duration_seconds", s.duration}, {"u", s.u}});
    sj["segments"] = std::move(segs);
    ctx.save("schedule.json", sj.dump(2) + "\n");

    std::ostringstream sum;
    sum << "null-control: final_hs=" << format_g17(result.final_hs)
        << " epsilon=" << format_g17(epsilon) << " c=" << format_g17(result.c);
    ctx.summary = sum.str();
}

void run_phase_control(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    if (!cfg.args.contains("theta")) throw InputError("phase-control: args.theta is required");
    const TrigPolynomial theta = poly_from_json(cfg.args["theta"], cfg.solver.grid.d);
    const int levels = static_cast<int>(number_or(cfg.args, "chain_levels", 1));
    const double time_cap = number_or(cfg.args, "time_cap_seconds", 1.0);

    const FrequencySet K = standard_frequency_set(cfg.solver.grid.d);
    if (!check_q_condition(cfg.params.Q, K))
        throw InputError("phase-control: Q does not span the canonical low modes");
    const SaturationChain chain = saturation_chain(harmonic_basis(K), levels);

    SpectralField psi0 = field_from_spec(cfg.initial_condition, cfg.solver.grid);
    PhasePlan plan =
        phase_plan(theta, psi0, chain, cfg.params.nu, cfg.params, cfg.synth, time_cap);
    const ExecutionReport report =
        execute_and_refine(plan, psi0, cfg.params, cfg.solver, chain, cfg.synth, time_cap);

    CsvWriter csv({"refinement", "delta_deepest_seconds", "rel_hs_error", "total_time_seconds",
                   "blowup", "over_time_cap"});
    for (const auto& r : report.rows)
        csv.add_row({static_cast<double>(r.refinement), r.delta_deepest, r.rel_error, r.total_time,
                     r.blowup ? 1.0 : 0.0, r.over_time_cap ? 1.0 : 0.0});
    ctx.save_csv("refine.csv", csv);

    plan.level_deltas = report.level_deltas.empty() ? plan.level_deltas : report.level_deltas;
    ctx.save("plan.json", plan.to_json() + "\n");

    std::ostringstream sum;
    sum << "phase-control: level=" << plan.level << " rel_error=" << format_g17(report.rel_error)
        << " T=" << format_g17(report.total_time)
        << " converged=" << (report.converged ? "yes" : "no");
    ctx.summary = sum.str();
    if (!report.converged)
        throw NotConvergedError("phase-control did not reach the error budget");
}

void run_saturation_report(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    FrequencySet K;
    K.d = cfg.solver.grid.d;
    if (cfg.args.contains("K")) {
        for (const auto& row : cfg.args["K"]) {
            Wavevector k;
            for (const auto& v : row) k.push_back(v.get<int>());
            K.vectors.push_back(std::move(k));
        }
    } else {
        K = standard_frequency_set(K.d);
    }
    const int sigma = static_cast<int>(number_or(cfg.args, "sigma", cfg.params.sigma));
    const int levels = static_cast<int>(number_or(cfg.args, "levels", 2));
    const int samples = static_cast<int>(number_or(cfg.args, "decompose_samples", 0));

    const SaturationVerdict verdict = saturation_verdict(K, sigma);
    const SaturationChain chain = saturation_chain(harmonic_basis(K), levels);

    std::ostringstream rep;
    rep << "saturation report\n";
    rep << "dimension: " << K.d << "\nsigma: " << sigma << "\n";
    rep << "frequencies:";
    for (const auto& k : K.vectors) {
        rep << " (";
        for (std::size_t i = 0; i < k.size(); ++i) rep << (i ? "," : "") << k[i];
        rep << ")";
    }
    rep << "\ngenerator: " << (verdict.generator ? "true" : "false") << "\n";
    rep << "chain_condition: " << (verdict.chain.ok ? "true" : "false") << "\n";
    rep << "saturating: " << (verdict.saturating ? "true" : "false") << "\n";
    rep << "witnesses:\n";
    for (const auto& w : verdict.chain.pairs) {
        rep << "  pair (";
        for (std::size_t i = 0; i < w.l.size(); ++i) rep << (i ? "," : "") << w.l[i];
        rep << ") -> (";
        for (std::size_t i = 0; i < w.m.size(); ++i) rep << (i ? "," : "") << w.m[i];
        rep << "): " << (w.ok ? "chain" : "NONE");
        for (const auto& n : w.chain) {
            rep << " (";
            for (std::size_t i = 0; i < n.size(); ++i) rep << (i ? "," : "") << n[i];
            rep << ")";
        }
        rep << "\n";
    }
    rep << "levels:\n";
    for (std::size_t j = 0; j < chain.levels.size(); ++j) {
        int deg = 0;
        for (const auto& b : chain.levels[j].basis) deg = std::max(deg, b.degree());
        rep << "  H_" << j << ": dim=" << chain.levels[j].dim() << " max_degree=" << deg << "\n";
    }
    ctx.save("report.txt", rep.str());

    CsvWriter levels_csv({"level", "dim", "max_degree"});
    for (std::size_t j = 0; j < chain.levels.size(); ++j) {
        int deg = 0;
        for (const auto& b : chain.levels[j].basis) deg = std::max(deg, b.degree());
        levels_csv.add_row({static_cast<double>(j), static_cast<double>(chain.levels[j].dim()),
                            static_cast<double>(deg)});
    }
    ctx.save_csv("levels.csv", levels_csv);

    if (samples > 0 && chain.levels.size() >= 2) {
        std::mt19937_64 rng(cfg.seed ? cfg.seed : 0x5a7eULL);
        std::normal_distribution<double> nd(0.0, 1.0);
        CsvWriter res_csv({"sample", "residual"});
        for (int i = 0; i < samples; ++i) {
            TrigPolynomial target(K.d);
            for (const auto& b : chain.levels[1].basis) target += nd(rng) * b;
            const Decomposition dec = decompose(target, chain.levels[0]);
            res_csv.add_row({static_cast<double>(i), dec.residual});
        }
        ctx.save_csv("residuals.csv", res_csv);
    }

    std::ostringstream sum;
    sum << "saturation-report: saturating=" << (verdict.saturating ? "true" : "false")
        << " levels=" << levels;
    ctx.summary = sum.str();
}

void run_same_argument(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    SpectralField psi0 = field_from_spec(cfg.initial_condition, cfg.solver.grid);
    if (!cfg.args.contains("psi1")) throw InputError("same-argument: args.psi1 is required");
    SpectralField psi1 = field_from_spec(cfg.args["psi1"], cfg.solver.grid);
    MollifierSpec spec;
    spec.eta = number_or(cfg.args, "eta", 0.3);
    const int degree_cap =
        static_cast<int>(number_or(cfg.args, "degree_cap", cfg.solver.grid.dealias_cutoff()));
    const double time_cap = number_or(cfg.args, "time_cap_seconds", 1.0);

    const TrigPolynomial theta = same_argument_target(psi0, psi1, spec, degree_cap);
    {
        std::ostringstream os;
        theta.write(os);
        ctx.save("theta.txt", os.str());
    }

    const FrequencySet K = standard_frequency_set(cfg.solver.grid.d);
    const int levels = static_cast<int>(number_or(cfg.args, "chain_levels", 1));
    const SaturationChain chain = saturation_chain(harmonic_basis(K), levels);

    PhasePlan plan = phase_plan(theta, psi0, chain, 0.0, cfg.params, cfg.synth, time_cap);
    const ExecutionReport report =
        execute_and_refine(plan, psi0, cfg.params, cfg.solver, chain, cfg.synth, time_cap);

    const double d0 = distance_hs(psi0, psi1, 0);
    const double dT = distance_hs(report.final, psi1, 0);
    CsvWriter csv({"initial_l2_distance", "final_l2_distance", "ratio", "rel_hs_error",
                   "total_time_seconds"});
    csv.add_row({d0, dT, d0 > 0 ? dT / d0 : 0.0, report.rel_error, report.total_time});
    ctx.save_csv("distances.csv", csv);

    CsvWriter refine({"refinement", "delta_deepest_seconds", "rel_hs_error", "total_time_seconds",
                      "blowup", "over_time_cap"});
    for (const auto& r : report.rows)
        refine.add_row({static_cast<double>(r.refinement), r.delta_deepest, r.rel_error,
                        r.total_time, r.blowup ? 1.0 : 0.0, r.over_time_cap ? 1.0 : 0.0});
    ctx.save_csv("refine.csv", refine);

    std::ostringstream sum;
    sum << "same-argument: l2_ratio=" << format_g17(d0 > 0 ? dT / d0 : 0.0)
        << " T=" << format_g17(report.total_time)
        << " converged=" << (report.converged ? "yes" : "no");
    ctx.summary = sum.str();
    if (!report.converged)
        throw NotConvergedError("same-argument steering did not reach the error budget");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, bool quiet) {
    RunResult result;
    result.run_dir = cfg.output_dir;

    // Fail on config-level problems before creating the run directory.
    SpectralField probe_ic(cfg.solver.grid);
    try {
        cfg.solver.validate();
        cfg.params.validate();
        cfg.synth.validate();
        if (cfg.kind != "saturation-report")
            probe_ic = field_from_spec(cfg.initial_condition, cfg.solver.grid);
    } catch (const std::exception& e) {
        if (!quiet) std::cerr << "config error: " << e.what() << "\n";
        result.exit_code = 2;
        return result;
    }

    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    RunContext ctx{cfg, fs::path(cfg.output_dir), nlohmann::json::array(), ""};
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) {
        if (!quiet) std::cerr << "cannot create run directory: " << cfg.output_dir << "\n";
        result.exit_code = 2;
        return result;
    }
    ctx.save("config.json", cfg.source_text);

    std::string status = "ok";
    try {
        if (cfg.kind == "simulate")
            run_simulate(ctx);
        else if (cfg.kind == "verify-limit")
            run_verify_limit(ctx);
        else if (cfg.kind == "null-control")
            run_null_control(ctx);
        else if (cfg.kind == "phase-control")
            run_phase_control(ctx);
        else if (cfg.kind == "saturation-report")
            run_saturation_report(ctx);
        else if (cfg.kind == "same-argument")
            run_same_argument(ctx);
    } catch (const InputError& e) {
        if (!quiet) std::cerr << "config error: " << e.what() << "\n";
        result.exit_code = 2;
        status = std::string("config-error: ") + e.what();
    } catch (const std::exception& e) {
        result.exit_code = 3;
        status = std::string("numerical-failure: ") + e.what();
        if (ctx.summary.empty()) ctx.summary = status;
    }

    const auto t1 = std::chrono::steady_clock::now();
    nlohmann::json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["experiment"] = cfg.kind;
    manifest["seed"] = cfg.seed;
    manifest["started_utc"] = started;
    manifest["finished_utc"] = utc_now();
    manifest["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    manifest["status"] = status;
    manifest["summary"] = ctx.summary;
    manifest["outputs"] = ctx.outputs;
    try {
        manifest["config"] = nlohmann::json::parse(cfg.source_text);
    } catch (...) {
        manifest["config"] = nullptr;
    }
    write_file_atomic((ctx.dir / "manifest.json").string(), manifest.dump(2) + "\n");

    result.summary = ctx.summary;
    if (!quiet && !ctx.summary.empty()) std::cout << ctx.summary << "\n";
    return result;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

void columns_to_dat(const fs::path& csv, const fs::path& dat, int xcol, int ycol, bool log10x,
                    const std::string& comment) {
    const auto rows = read_csv(csv);
    std::ostringstream os;
    os << "# " << comment << "\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (xcol >= static_cast<int>(rows[i].size()) || ycol >= static_cast<int>(rows[i].size()))
            continue;
        double x = std::atof(rows[i][static_cast<std::size_t>(xcol)].c_str());
        double y = std::atof(rows[i][static_cast<std::size_t>(ycol)].c_str());
        if (log10x) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            x = std::log10(x);
            y = std::log10(y);
        }
        os << format_g17(x) << " " << format_g17(y) << "\n";
    }
    write_file_atomic(dat.string(), os.str());
}

}  // namespace

int emit_plotdata(const std::string& run_dir, bool quiet) {
    const fs::path dir(run_dir);
    if (!fs::exists(dir) || !fs::exists(dir / "manifest.json")) {
        if (!quiet) std::cerr << "not a run directory: " << run_dir << "\n";
        return 2;
    }
    if (fs::exists(dir / "limit.csv")) {
        columns_to_dat(dir / "limit.csv", dir / "limit.dat", 0, 1, false, "delta hs_error");
        columns_to_dat(dir / "limit.csv", dir / "limit_loglog.dat", 0, 1, true,
                       "log10(delta) log10(hs_error)");
    }
    if (fs::exists(dir / "trajectory.csv")) {
        columns_to_dat(dir / "trajectory.csv", dir / "t_hs.dat", 0, 1, false, "t hs_norm");
        columns_to_dat(dir / "trajectory.csv", dir / "t_l2.dat", 0, 2, false, "t l2_norm");
        columns_to_dat(dir / "trajectory.csv", dir / "t_maxmod.dat", 0, 3, false, "t max_modulus");
    }
    if (fs::exists(dir / "refine.csv"))
        columns_to_dat(dir / "refine.csv", dir / "refine.dat", 1, 2, false,
                       "delta_deepest rel_hs_error");
    if (fs::exists(dir / "nullcontrol.csv"))
        columns_to_dat(dir / "nullcontrol.csv", dir / "nullcontrol.dat", 0, 1, false,
                       "delta final_hs");
    return 0;
}

int validate_config_file(const std::string& path, bool quiet) {
    try {
        const ExperimentConfig cfg = ExperimentConfig::from_file(path);
        if (cfg.kind != "saturation-report")
            (void)field_from_spec(cfg.initial_condition, cfg.solver.grid);
        if (!quiet) std::cout << "config ok: " << cfg.kind << "\n";
        return 0;
    } catch (const std::exception& e) {
        if (!quiet) std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace cgl
