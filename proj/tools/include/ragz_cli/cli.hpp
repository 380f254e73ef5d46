#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace ragz::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

struct CliConfig {
    std::string input = "-";
    bool decompress = false;
    bool to_stdout = false;
    std::optional<std::string> output;
    std::size_t parallelism = 0;
    std::uint64_t chunk_size_kib = 4096;
    std::optional<std::string> import_index;
    std::optional<std::string> export_index;
    bool verify = false;
    std::uint64_t seek = 0;
    std::optional<std::uint64_t> length;
    bool force = false;
    bool quiet = false;
    bool verbose = false;
};

/// Where the decompressed bytes go, after resolving defaults. Empty when
/// the run only exports an index.
std::optional<std::string> output_path(const CliConfig& config);

/// Throws std::invalid_argument for inconsistent options.
void validate(const CliConfig& config);

int run(const CliConfig& config, std::ostream& diagnostics);

/// Parses arguments and runs; returns the process exit code.
int main(int argc, char** argv, std::ostream& diagnostics);

}  // namespace ragz::cli
