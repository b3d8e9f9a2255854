#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "cgl/dynamics.hpp"
#include "cgl/synthesis.hpp"

namespace cgl {

/// Parsed experiment configuration. Durations carry the _seconds suffix in the
/// JSON schema; see presets/ for complete examples.
struct ExperimentConfig {
    std::string kind;  // simulate | verify-limit | null-control | phase-control |
                       // saturation-report | same-argument
    CGLParams params;
    SolverConfig solver;
    SynthesisConfig synth;
    nlohmann::json initial_condition;
    nlohmann::json args;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::string source_text;  // raw config bytes, copied verbatim into the run dir

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

struct RunResult {
    int exit_code = 0;  // 0 success, 2 config error, 3 numerical failure
    std::string run_dir;
    std::string summary;
};

/// Dispatches to the named experiment, writing CSVs, artifacts and a manifest
/// into the output directory. Never throws; failures map to exit codes.
RunResult run_experiment(const ExperimentConfig& cfg, bool quiet = true);

/// Writes whitespace-separated (x, y) column files next to a completed run's
/// CSVs. Returns an exit code (2 when the run directory is missing).
int emit_plotdata(const std::string& run_dir, bool quiet = true);

/// Parses and validates a config file. Returns 0 or 2.
int validate_config_file(const std::string& path, bool quiet = true);

/// Worker-thread cap from CGL_STEER_THREADS (default 1).
int worker_threads();

/// Field from an initial-condition spec: {"constant": c}, {"trig": [terms]},
/// {"preset": name} or {"file": path}.
SpectralField field_from_spec(const nlohmann::json& spec, const GridSpec& grid);

TrigPolynomial poly_from_json(const nlohmann::json& terms, int dim);

}  // namespace cgl
