// femu: finite element model updating from the command line.
//
//   femu run --config <path> [--method rsm|ga|sa|all] [--out <dir>] [--seed <n>]
//   femu sample --config <path> --out <file>
//   femu modes --config <path>

#include "femu/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Finite element model updating with RSM, GA and SA"};
    app.require_subcommand(1);

    femu::RunOptions run;
    std::string method;
    std::string run_out;
    std::uint64_t seed = 0;
    auto* run_cmd = app.add_subcommand("run", "update the model with one or all methods");
    run_cmd->add_option("--config", run.config, "INI configuration")->required();
    auto* method_opt = run_cmd->add_option("--method", method, "rsm, ga, sa or all")
                           ->check(CLI::IsMember({"rsm", "ga", "sa", "all"}));
    auto* out_opt = run_cmd->add_option("--out", run_out, "output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "reseed every method");

    std::string sample_config;
    std::string sample_out;
    auto* sample_cmd = app.add_subcommand("sample", "evaluate the RSM design on the full model");
    sample_cmd->add_option("--config", sample_config, "INI configuration")->required();
    sample_cmd->add_option("--out", sample_out, "CSV file to write")->required();

    std::string modes_config;
    auto* modes_cmd = app.add_subcommand("modes", "print modes of the initial and ground-truth models");
    modes_cmd->add_option("--config", modes_config, "INI configuration")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : femu::exit_config;
    }

    if (*run_cmd) {
        if (*method_opt) run.method = method;
        if (*out_opt) run.out = run_out;
        if (*seed_opt) run.seed = seed;
        return femu::cmd_run(run, std::cout, std::cerr);
    }
    if (*sample_cmd) return femu::cmd_sample(sample_config, sample_out, std::cout, std::cerr);
    return femu::cmd_modes(modes_config, std::cout, std::cerr);
}
