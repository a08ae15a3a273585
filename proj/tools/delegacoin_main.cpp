#include <CLI11.hpp>

#include <iostream>

#include "delegacoin/cli/commands.hpp"
#include "delegacoin/errors.hpp"

using delegacoin::cli::CommandOutcome;
using delegacoin::cli::RunConfig;

int main(int argc, char** argv) {
    CLI::App app{"delegacoin: offline coin delegation on emulated trusted hardware"};
    app.require_subcommand(1);
    app.set_config("--config");

    RunConfig config;
    std::string schedule_csv = "200";
    std::string out_dir = ".";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", config.seed, "deterministic run seed");
        cmd->add_option("--deposit", config.deposit, "deposit amount in uBTC");
        cmd->add_option("--schedule", schedule_csv, "comma-separated delegation amounts");
        cmd->add_option("--depth", config.depth, "confirmation depth in blocks");
        cmd->add_option("--faults", config.faults,
                        "fault plan, e.g. drop@4,corrupt@1:9,crash@0:seal");
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* demo = app.add_subcommand("demo", "run setup, deposit, delegation and spend");
    add_common(demo);
    CLI::App* bench = app.add_subcommand("bench", "time each operation over 500 iterations");
    add_common(bench);
    CLI::App* disk = app.add_subcommand("diskgrowth", "measure seal-store growth");
    add_common(disk);

    std::string scenario;
    CLI::App* attack = app.add_subcommand("attack", "run a named attack scenario");
    attack->add_option("name", scenario, "scenario name")->required();
    attack->add_option("--seed", config.seed, "deterministic run seed");

    CLI11_PARSE(app, argc, argv);

    try {
        config.out_dir = out_dir;
        CommandOutcome outcome;
        if (demo->parsed()) {
            config.schedule = delegacoin::cli::parse_schedule(schedule_csv);
            outcome = delegacoin::cli::cmd_demo(config);
        } else if (bench->parsed()) {
            outcome = delegacoin::cli::cmd_bench(config);
        } else if (disk->parsed()) {
            outcome = delegacoin::cli::cmd_diskgrowth(config);
        } else if (attack->parsed()) {
            outcome = delegacoin::cli::cmd_attack(scenario, config.seed);
        }
        std::cout << outcome.output;
        return outcome.exit_code;
    } catch (const delegacoin::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == delegacoin::ErrorCode::MalformedMessage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
