#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "capdual/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"capdual: capacity and representation-theoretic duality experiments"};
    app.set_version_flag("--version", capdual::version_string());
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run one experiment config and write <name>.csv and <name>.summary.json");
    run->add_option("config", config, "Experiment config (JSON)")->required();
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides the config's \"output\")");
    auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the config's \"seed\")");

    auto* list = app.add_subcommand("list", "List experiments and their config fields");

    CLI11_PARSE(app, argc, argv);

    if (const char* t = std::getenv("CAPDUAL_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(t, &end, 10);
        if (end == t || *end != '\0' || n < 1) {
            std::cerr << "capdual: CAPDUAL_THREADS must be a positive integer\n";
            return 1;
        }
        capdual::set_thread_cap(static_cast<int>(n));
    }

    if (list->parsed()) {
        std::cout << capdual::list_experiments();
        return 0;
    }

    try {
        capdual::RunOptions opts;
        if (*out_opt) opts.out_dir = out_dir;
        if (*seed_opt) opts.seed = seed;
        const auto res = capdual::run_experiment_file(config, opts);
        std::cout << (res.pass ? "PASS " : "FAIL ") << res.summary.string() << "\n";
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "capdual: " << e.what() << "\n";
        return 1;
    }
}
