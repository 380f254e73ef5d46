#include "ragz_cli/cli.hpp"

#include "ragz/error.hpp"
#include "ragz/parallel_gzip_reader.hpp"
#include "ragz/shared_source.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <unistd.h>
#include <vector>

namespace ragz::cli {

namespace {

constexpr std::uint64_t min_chunk_kib = 64;
constexpr std::size_t copy_buffer_size = 4U << 20U;

class OutputSink {
public:
    explicit OutputSink(const std::string& path) : path_(path)
    {
        if (path == "-") {
            return;
        }
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) {
            throw Error(ErrorCode::Io, "cannot create " + path);
        }
    }

    OutputSink(const OutputSink&) = delete;
    OutputSink& operator=(const OutputSink&) = delete;

    ~OutputSink()
    {
        if (!committed_ && file_.is_open()) {
            file_.close();
            std::error_code ignored;
            std::filesystem::remove(path_, ignored);
        }
    }

    void write(std::span<const std::uint8_t> data)
    {
        if (path_ == "-") {
            if (std::fwrite(data.data(), 1, data.size(), stdout) != data.size()) {
                throw Error(ErrorCode::Io, "write to standard output failed");
            }
            return;
        }
        file_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!file_) {
            throw Error(ErrorCode::Io, "write to " + path_ + " failed");
        }
    }

    void commit()
    {
        if (path_ == "-") {
            if (std::fflush(stdout) != 0) {
                throw Error(ErrorCode::Io, "write to standard output failed");
            }
        } else {
            file_.close();
            if (!file_) {
                throw Error(ErrorCode::Io, "closing " + path_ + " failed");
            }
        }
        committed_ = true;
    }

private:
    std::string path_;
    std::ofstream file_;
    bool committed_ = false;
};

std::shared_ptr<const SharedSource> open_input(const std::string& input)
{
    if (input == "-") {
        return SpooledSource::from_fd(STDIN_FILENO);
    }
    return open_source(input);
}

void report(std::ostream& out, const StatisticsSnapshot& s)
{
    out << "speculative tasks:   " << s.speculative_tasks << '\n'
        << "exact tasks:         " << s.exact_tasks << '\n'
        << "prefetch hits:       " << s.cache_hits << '\n'
        << "prefetch misses:     " << s.cache_misses << '\n'
        << "failed candidates:   " << s.failed_candidates << '\n'
        << "unused prefetches:   " << s.unused_prefetches << '\n'
        << "empty chunks:        " << s.empty_chunks << '\n'
        << "marker buffers:      " << s.marker_buffers << '\n'
        << "replaced markers:    " << s.replaced_symbols << '\n'
        << "peak chunk memory:   " << s.peak_chunk_bytes << " B\n";
}

}  // namespace

std::optional<std::string> output_path(const CliConfig& config)
{
    if (config.to_stdout) {
        return "-";
    }
    if (config.output) {
        return config.output;
    }
    const bool ranged = config.seek != 0 || config.length.has_value();
    if (config.export_index && !config.decompress && !ranged) {
        return std::nullopt;
    }
    if (config.input == "-") {
        return "-";
    }
    const std::filesystem::path input(config.input);
    if (input.extension() != ".gz" || input.stem().empty()) {
        throw std::invalid_argument("cannot derive an output name from " + config.input + "; use -c or -o");
    }
    return (input.parent_path() / input.stem()).string();
}

void validate(const CliConfig& config)
{
    if (config.to_stdout && config.output) {
        throw std::invalid_argument("-c and -o are mutually exclusive");
    }
    if (config.chunk_size_kib < min_chunk_kib) {
        throw std::invalid_argument("--chunk-size must be at least 64 KiB");
    }
    if (config.import_index && config.export_index) {
        throw std::invalid_argument("--import-index and --export-index are mutually exclusive");
    }
    const auto out = output_path(config);
    if (out && *out != "-" && config.input != "-" && std::filesystem::exists(*out) &&
        std::filesystem::equivalent(*out, config.input)) {
        throw std::invalid_argument("output would overwrite the input");
    }
}

int run(const CliConfig& config, std::ostream& diagnostics)
{
    try {
        validate(config);
    } catch (const std::invalid_argument& e) {
        diagnostics << "ragz: " << e.what() << '\n';
        return exit_usage;
    }
    const auto out_path = output_path(config);
    if (out_path && *out_path != "-" && !config.force && std::filesystem::exists(*out_path)) {
        diagnostics << "ragz: " << *out_path << " already exists; use --force to overwrite\n";
        return exit_usage;
    }

    try {
        FetcherOptions options;
        options.parallelism = config.parallelism;
        options.chunk_size = config.chunk_size_kib * 1024U;
        options.verify_crc = config.verify;
        ParallelGzipReader reader(open_input(config.input), options);
        if (config.import_index) {
            reader.import_index(std::filesystem::path(*config.import_index));
        }

        if (out_path) {
            OutputSink sink(*out_path);
            reader.seek(config.seek);
            std::vector<std::uint8_t> buffer(copy_buffer_size);
            auto remaining = config.length.value_or(std::numeric_limits<std::uint64_t>::max());
            while (remaining > 0) {
                const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, buffer.size()));
                const auto n = reader.read(std::span(buffer).first(want));
                sink.write(std::span(buffer).first(n));
                remaining -= n;
                if (n < want) {
                    break;
                }
            }
            sink.commit();
        }

        if (config.export_index) {
            reader.export_index(std::filesystem::path(*config.export_index));
        }
        if (config.verbose) {
            report(diagnostics, reader.statistics());
        }
        return exit_ok;
    } catch (const Error& e) {
        diagnostics << "ragz: " << config.input << ": " << to_string(e.code()) << ": " << e.what();
        if (e.bit_offset()) {
            diagnostics << " (at compressed bit offset " << *e.bit_offset() << ", byte " << *e.bit_offset() / 8U
                        << ')';
        }
        diagnostics << '\n';
        return exit_failure;
    } catch (const std::exception& e) {
        diagnostics << "ragz: " << config.input << ": " << e.what() << '\n';
        return exit_failure;
    }
}

int main(int argc, char** argv, std::ostream& diagnostics)
{
    CLI::App app{"Parallel random-access gzip decompressor"};
    app.set_version_flag("--version", "ragz 0.1.0");

    CliConfig config;
    app.add_option("input", config.input, "gzip file, or - for standard input")->required();
    app.add_flag("-d,--decompress", config.decompress, "Decompress (the default action)");
    app.add_flag("-c,--stdout", config.to_stdout, "Write to standard output");
    app.add_option("-o,--output", config.output, "Output file");
    app.add_option("-P,--parallelism", config.parallelism, "Worker threads (default: hardware threads)")
        ->check(CLI::PositiveNumber);
    app.add_option("--chunk-size", config.chunk_size_kib, "Compressed chunk size in KiB")
        ->capture_default_str();
    app.add_option("--import-index", config.import_index, "Use the seek point index stored in this file");
    app.add_option("--export-index", config.export_index, "Write the seek point index to this file");
    app.add_flag("--verify", config.verify, "Check CRC32 of every gzip member");
    app.add_option("--seek", config.seek, "Start at this decompressed byte offset");
    app.add_option("--length", config.length, "Decompress at most this many bytes");
    app.add_flag("-f,--force", config.force, "Overwrite existing output files");
    auto* quiet = app.add_flag("-q,--quiet", config.quiet, "Suppress diagnostics other than errors");
    app.add_flag("-v,--verbose", config.verbose, "Print decoder statistics")->excludes(quiet);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion& e) {
        std::cout << e.what() << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        diagnostics << "ragz: " << e.what() << '\n' << "Run with --help for usage.\n";
        return exit_usage;
    }
    return run(config, diagnostics);
}

}  // namespace ragz::cli
