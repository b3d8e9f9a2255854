#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "cgl/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Pseudospectral simulator and control synthesis for the bilinear "
                 "complex Ginzburg-Landau equation on the torus"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string run_dir;
    long long seed_override = -1;
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress the one-line summary");

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out_dir, "override the config's output directory");
    run->add_option("--seed", seed_override, "override the config's RNG seed");

    auto* validate = app.add_subcommand("validate-config", "parse and validate a config");
    validate->add_option("--config", config_path, "config file path")->required();

    auto* plotdata = app.add_subcommand("emit-plotdata",
                                        "write (x, y) column files next to a run's CSVs");
    plotdata->add_option("--run", run_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cgl::ExperimentConfig cfg = cgl::ExperimentConfig::from_file(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
            const cgl::RunResult result = cgl::run_experiment(cfg, quiet);
            return result.exit_code;
        }
        if (validate->parsed()) return cgl::validate_config_file(config_path, quiet);
        if (plotdata->parsed()) return cgl::emit_plotdata(run_dir, quiet);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
