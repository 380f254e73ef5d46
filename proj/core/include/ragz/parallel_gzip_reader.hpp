#pragma once

#include "ragz/chunk_fetcher.hpp"
#include "ragz/gzip_index.hpp"
#include "ragz/shared_source.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ragz {

/// File-like cursor over the decompressed stream of a gzip file.
///
/// Several readers may share one fetcher (and so its caches and index);
/// each keeps its own position.
class ParallelGzipReader {
public:
    ParallelGzipReader(std::shared_ptr<const SharedSource> source, FetcherOptions options = {});
    explicit ParallelGzipReader(std::shared_ptr<ChunkFetcher> fetcher);

    static ParallelGzipReader open(const std::filesystem::path& path, FetcherOptions options = {});
    static ParallelGzipReader open(std::vector<std::uint8_t> bytes, FetcherOptions options = {});
    /// Spools a non-seekable stream first.
    static ParallelGzipReader open(std::istream& input, FetcherOptions options = {});

    /// Reads up to out.size() bytes at the current position; fewer only at
    /// the end of the stream.
    std::size_t read(std::span<std::uint8_t> out);
    std::vector<std::uint8_t> read_all();

    /// Moves the position. Seeking beyond the end is allowed; the next read
    /// returns 0.
    void seek(std::uint64_t offset) noexcept
    {
        position_ = offset;
        eof_ = false;
    }
    std::uint64_t tell() const noexcept { return position_; }
    /// True once a read came back short.
    bool eof() const noexcept { return eof_; }

    /// Decompressed size; decodes the whole stream if it is not known yet.
    std::uint64_t size();

    void import_index(GzipIndex index);
    void import_index(const std::filesystem::path& path);
    GzipIndex build_full_index();
    void export_index(const std::filesystem::path& path);

    StatisticsSnapshot statistics() const { return fetcher_->statistics(); }
    const std::shared_ptr<ChunkFetcher>& fetcher() const noexcept { return fetcher_; }

private:
    std::shared_ptr<ChunkFetcher> fetcher_;
    std::uint64_t position_ = 0;
    bool eof_ = false;
};

}  // namespace ragz
