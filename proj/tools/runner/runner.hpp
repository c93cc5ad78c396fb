#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "infharnack/nonlinearity.hpp"
#include "runner/config.hpp"

namespace infharnack::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInconclusive = 2, kExitError = 3 };

const std::vector<std::string>& subcommands();

struct RunOptions {
    std::string subcommand;
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::uint64_t seed = 1;
    int threads = 1;
};

struct RunResult {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::filesystem::path> files;  // report, manifest, then plot data
};

// Runs one subcommand on a parsed configuration and writes the output files.  Errors
// propagate as exceptions.
RunResult execute(const RunOptions& opt, const Config& config);

// Loads the configuration, runs, and maps the outcome to an exit code; diagnostics go
// to `err`.
int run(const RunOptions& opt, std::ostream& err);

int exit_code(Verdict v);

}  // namespace infharnack::cli
