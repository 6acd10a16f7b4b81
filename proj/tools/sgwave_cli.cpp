// Experiment driver: runs a configured (or cataloged) experiment and
// writes its CSV table plus a JSON run manifest.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "sgwave/sgwave.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-Galerkin LDG wave solver experiments"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run an experiment");
    std::string config_path, preset_name, out_dir = "out";
    int workers = 2, verbosity = 0;
    bool print_config = false;
    run_cmd->add_option("-c,--config", config_path,
                        "config file path (or inline JSON starting with '{')");
    run_cmd->add_option("-p,--preset", preset_name, "experiment preset name (see `presets`)");
    run_cmd->add_option("-o,--out", out_dir, "output directory");
    run_cmd->add_option("-w,--workers", workers, "worker threads for refinement levels")
        ->check(CLI::PositiveNumber);
    run_cmd->add_flag("-v,--verbose", verbosity, "increase verbosity (repeatable)");
    run_cmd->add_flag("--print-config", print_config, "print the resolved config and exit");

    auto* presets_cmd = app.add_subcommand("presets", "list experiment presets");

    CLI11_PARSE(app, argc, argv);

    if (presets_cmd->parsed()) {
        for (const auto& name : sgwave::preset_names()) std::cout << name << '\n';
        return 0;
    }

    try {
        sgwave::RunConfig cfg;
        if (!preset_name.empty() && !config_path.empty()) {
            // preset first, config file entries override it
            auto base = sgwave::preset_config(preset_name).to_json();
            auto over = sgwave::load_config(config_path).to_json();
            base.merge_patch(over);
            cfg = sgwave::config_from_json(base);
            cfg.validate();
        } else if (!preset_name.empty()) {
            cfg = sgwave::preset_config(preset_name);
        } else if (!config_path.empty()) {
            cfg = sgwave::load_config(config_path);
        } else {
            std::cerr << "error: need --config or --preset\n";
            return 1;
        }
        if (print_config) {
            std::cout << cfg.to_json().dump(2) << '\n';
            return 0;
        }
        return sgwave::run(cfg, out_dir, workers, verbosity);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
