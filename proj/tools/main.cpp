#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "runner/runner.hpp"

int main(int argc, char** argv) {
    using namespace infharnack::cli;
    CLI::App app{"Numerical checks for the Harnack inequality of the normalized infinity-Laplacian"};
    app.set_version_flag("--version", std::string(kVersion));
    RunOptions opt;
    app.add_option("--config", opt.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "Output directory")->capture_default_str();
    app.add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    const std::map<std::string, std::string> help = {
        {"check-conditions", "Decide the growth and integrability conditions for a pair"},
        {"profile", "Tabulate Psi and its inverse Phi"},
        {"radial", "Integrate the radial blow-up problem"},
        {"solve", "Solve a Dirichlet problem on a grid"},
        {"compare", "Solve two boundary-ordered problems and check the ordering"},
        {"global-bound", "Check a solve against the interior bound Phi(d)"},
        {"harnack", "Check the Harnack ratio on one ball"},
        {"chain", "Run the full chain Harnack pipeline on a region"}};
    for (const auto& name : subcommands()) {
        const auto it = help.find(name);
        app.add_subcommand(name, it == help.end() ? "" : it->second)->fallthrough();
    }
    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }
    opt.subcommand = app.get_subcommands().front()->get_name();
    return run(opt, std::cerr);
}
