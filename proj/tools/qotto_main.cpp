// qotto: command-line front end: simulate, optimize, sweep, ga, critical

#include <iostream>

#include <CLI11.hpp>

#include "qotto/commands.hpp"
#include "qotto/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quantum Otto refrigerator: limit cycles, optimization and T_c -> 0 scaling"};
    app.set_version_flag("--version", std::string(qotto::kToolVersion));

    std::string command;
    std::string config_path;
    qotto::Overrides ov;
    app.add_option("command", command, "simulate | optimize | sweep | ga | critical")
        ->required()
        ->check(CLI::IsMember(qotto::command_names()));
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--seed", ov.seed, "PRNG seed (overrides command-defaults.seed)");
    app.add_option("--out", ov.out, "output directory");
    app.add_option("--threads", ov.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tail-fit", ov.tail_fit_decades, "fit window in decades above the lowest T_c (0: all points)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    qotto::Config cfg;
    try {
        cfg = qotto::parse_config_file(config_path);
        qotto::apply_overrides(cfg, ov);
    } catch (const qotto::ConfigError& e) {
        nlohmann::json j = {{"command", command}, {"kind", "config"}, {"path", e.path()}, {"message", e.what()}};
        std::cerr << "error: " << j.dump() << "\n";
        return 2;
    }
    return qotto::run_command(command, cfg, std::cout, std::cerr);
}
