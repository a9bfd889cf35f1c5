// Command-line driver for channels-matching classification experiments.

#include "cmmi/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Maximum mutual information classification by channels matching"};
    app.require_subcommand(1);

    std::string out_dir;
    std::size_t max_iters = 0;
    double mi_tol = -1;
    bool render = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out-dir", out_dir, "Directory for trace, partition and report files");
        cmd->add_option("--max-iters", max_iters, "Maximum number of CM iterations")->check(CLI::PositiveNumber);
        cmd->add_option("--mi-tol", mi_tol, "MI gain (bits) below which a revisited partition stops the loop")
            ->check(CLI::NonNegativeNumber);
        cmd->add_flag("--render", render, "Write a PPM image of every 2D partition");
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run the CM iteration for a config file");
    run->add_option("config", config_path, "Experiment config")->required();
    add_common(run);

    auto* ex1 = app.add_subcommand("example1", "1D preset: two Gaussian classes, start threshold 50");
    add_common(ex1);

    std::string init_kind = "vertical";
    std::uint64_t seed = 1;
    auto* ex2 = app.add_subcommand("example2", "2D preset: three classes, one a Gaussian mixture");
    ex2->add_option("--init", init_kind, "vertical | horizontal | random | random:<seed>");
    auto* seed_opt = ex2->add_option("--seed", seed, "Seed for random initialisation");
    add_common(ex2);

    auto* cmp = app.add_subcommand("compare", "Compare the MMI partition with the MPP (least error rate) partition");
    cmp->add_option("config", config_path, "Experiment config")->required();
    add_common(cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors share the config-error exit code.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cmmi::exit_config_error;
    }

    cmmi::RunOptions options;
    if (!out_dir.empty()) {
        options.out_dir = out_dir;
    }
    if (max_iters > 0) {
        options.max_iters = max_iters;
    }
    if (mi_tol >= 0) {
        options.mi_tol = mi_tol;
    }
    options.render = render;

    if (run->parsed()) {
        return cmmi::cmd_run(config_path, options, std::cout, std::cerr);
    }
    if (ex1->parsed()) {
        return cmmi::cmd_example1(options, std::cout, std::cerr);
    }
    if (ex2->parsed()) {
        std::optional<std::uint64_t> s;
        if (seed_opt->count() > 0) {
            s = seed;
        }
        return cmmi::cmd_example2(init_kind, s, options, std::cout, std::cerr);
    }
    return cmmi::cmd_compare(config_path, options, std::cout, std::cerr);
}
