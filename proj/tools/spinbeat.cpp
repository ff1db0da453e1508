#include "spinbeat/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace spinbeat;

RunConfig load(const std::string& path) {
    RunConfig cfg = load_config(path);
    if (const char* dir = std::getenv("SPINBEAT_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
    return cfg;
}

void report(const RunManifest& m) {
    std::cout << m.command << ": " << m.products.size() << " products in " << m.output_dir.string()
              << '\n';
    for (const auto& [name, seconds] : m.timings) std::cout << "  " << name << ' ' << seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nuclear spin bath noise: CCE correlations and time-frequency analysis"};
    app.require_subcommand(1);
    std::string config_path;
    std::string correlation_path;
    std::vector<std::string> axes;
    std::vector<int> orders;

    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "key = value configuration file")->required();
        return sub;
    };
    CLI::App* gen = add("generate-bath", "write the bath realization");
    CLI::App* sim = add("simulate", "realization and normalized correlation");
    CLI::App* ana = add("analyze", "spectra and transforms of an exported correlation");
    ana->add_option("correlation", correlation_path, "correlation.txt from simulate or run")->required();
    CLI::App* run = add("run", "every stage");
    CLI::App* cmp = add("compare-orders", "per-order correlations and deviations");
    cmp->add_option("--orders", orders, "overrides compare_orders");
    CLI::App* sweep = add("sweep-axis", "products per hyperfine axis on a fixed realization");
    sweep->add_option("--axis", axes, "overrides sweep_axes; repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load(config_path);
        if (gen->parsed()) {
            report(generate_bath(cfg));
        } else if (sim->parsed()) {
            report(simulate_only(cfg));
        } else if (ana->parsed()) {
            report(analyze_file(cfg, correlation_path));
        } else if (run->parsed()) {
            report(run_pipeline(cfg));
        } else if (cmp->parsed()) {
            if (!orders.empty()) cfg.compare_orders = orders;
            report(compare_orders_run(cfg));
        } else if (sweep->parsed()) {
            if (!axes.empty()) cfg.sweep_axes = axes;
            if (cfg.sweep_axes.empty()) throw ConfigError("sweep_axes", "no axes given");
            for (const auto& m : sweep_hf_axis(cfg, cfg.sweep_axes)) report(m);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
