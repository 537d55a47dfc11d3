#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace wavelab::cli {

inline constexpr const char* version = "0.1.0";

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    bool quiet = false;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand and returns the names of the files it committed.
/// Throws wavelab errors; nothing is left on disk when it throws.
std::vector<std::string> run_command(const std::string& subcommand, const Scenario& scenario,
                                     const RunOptions& options);

/// Full command line entry point; returns the process exit code
/// (0 ok, 1 validation, 2 numerical, 3 I/O).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavelab::cli
