#pragma once

#include "ragz/chunk_decoder.hpp"
#include "ragz/gzip_index.hpp"
#include "ragz/prefetch_strategy.hpp"
#include "ragz/shared_source.hpp"
#include "ragz/statistics.hpp"
#include "ragz/thread_pool.hpp"

#include <cstdint>
#include <deque>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace ragz {

struct FetcherOptions {
    /// Worker threads; 0 means std::thread::hardware_concurrency().
    std::size_t parallelism = 0;
    /// Compressed bytes per speculative chunk.
    std::uint64_t chunk_size = 4U << 20U;
    std::size_t access_cache_capacity = 1;
    /// Check CRC32 of every member (ISIZE is always checked).
    bool verify_crc = false;
    /// Maximum decompressed distance between seek points; 0 means chunk_size.
    std::uint64_t seek_point_spacing = 0;
    /// Decoded size limit per chunk; 0 means 256 * chunk_size.
    std::uint64_t max_chunk_output = 0;
    /// Fault injection: bogus block-start candidates added to every
    /// speculative chunk.
    std::size_t injected_false_candidates = 0;
    std::uint64_t fault_seed = 1;
};

/// Decompressed bytes of one resolved range.
struct ResolvedChunk {
    std::uint64_t decompressed_begin = 0;
    TrackedBuffer<std::uint8_t> storage;
    std::size_t offset = 0;
    std::size_t length = 0;

    std::span<const std::uint8_t> data() const { return {storage.data() + offset, length}; }
    std::uint64_t decompressed_end() const { return decompressed_begin + length; }
};

/// Cache-and-prefetch engine. Resolves decompressed offsets to chunk data,
/// speculatively decoding ahead on a worker pool and building the seek point
/// index as it goes. All public members are internally serialized.
class ChunkFetcher {
public:
    ChunkFetcher(std::shared_ptr<const SharedSource> source, FetcherOptions options = {});
    ~ChunkFetcher();

    ChunkFetcher(const ChunkFetcher&) = delete;
    ChunkFetcher& operator=(const ChunkFetcher&) = delete;

    /// Copies decompressed bytes starting at `offset`; returns fewer than
    /// requested only at the end of the stream.
    std::size_t read(std::uint64_t offset, std::span<std::uint8_t> out);

    /// Decompressed size, once known.
    std::optional<std::uint64_t> size();

    /// Decodes whatever has not been decoded yet and returns the finalized
    /// index.
    GzipIndex build_full_index();
    /// Replaces the index; reads afterwards only use the imported seek points.
    void import_index(GzipIndex index);
    GzipIndex index();

    StatisticsSnapshot statistics() const;
    Statistics& counters() noexcept { return stats_; }

    std::size_t parallelism() const noexcept { return parallelism_; }
    bool is_bgzf() const noexcept { return !bgzf_groups_.empty(); }

private:
    enum class KeySpace : std::uint8_t { Grid, Interval };
    using CacheKey = std::pair<KeySpace, std::uint64_t>;

    struct Frontier {
        std::uint64_t key = 0;
        std::uint64_t decompressed = 0;
        std::vector<std::uint8_t> window;
        bool reached_end = false;
    };

    struct Pending {
        std::uint64_t decompressed_begin = 0;
        std::uint64_t end_key = 0;
        bool reached_end = false;
        std::vector<BlockBoundary> boundaries;
        std::vector<MemberEnd> member_ends;
        std::vector<std::uint64_t> member_starts;
        std::vector<std::uint8_t> window_before;
        std::future<std::shared_ptr<ResolvedChunk>> resolved;
    };

    struct PointCandidate {
        std::uint64_t key = 0;
        std::uint64_t decompressed = 0;
        std::optional<std::vector<std::uint8_t>> window;
    };

    std::shared_ptr<const ResolvedChunk> cached(std::uint64_t offset);
    void remember(std::shared_ptr<const ResolvedChunk> chunk);

    void advance_until(std::uint64_t offset);
    bool confirm_next(bool wait);
    void harvest_front();
    void consider_seek_point(const BlockBoundary& boundary, const Pending& pending, const ResolvedChunk& chunk);
    void finalize_index();

    struct IntervalPlan {
        ChunkRequest request;
        std::shared_ptr<const std::vector<std::uint8_t>> window;
        std::uint64_t decompressed_begin = 0;
        std::uint64_t decompressed_end = 0;
        /// False when the interval runs to the end of the file.
        bool bounded = true;
    };

    std::shared_ptr<const ResolvedChunk> fetch_interval(std::size_t point);
    /// Empty when the end of the interval is not known yet.
    std::optional<IntervalPlan> plan_interval(std::size_t point) const;

    std::uint64_t grid_ordinal(std::uint64_t key) const;
    ChunkRequest exact_grid_request(std::uint64_t ordinal, std::uint64_t key) const;
    void prefetch_grid(std::uint64_t ordinal);
    void prefetch_intervals(std::size_t point);
    bool may_dispatch(const std::vector<CacheKey>& plan);
    void drop_prefetch(const CacheKey& key);
    std::future<DecodedChunk> dispatch_exact(ChunkRequest request, ThreadPool::Priority priority,
                                             std::shared_ptr<const std::vector<std::uint8_t>> window);

    std::shared_ptr<const SharedSource> source_;
    FetcherOptions options_;
    std::size_t parallelism_ = 1;
    std::uint64_t chunk_bits_ = 0;
    std::uint64_t file_bits_ = 0;
    std::uint64_t spacing_ = 0;
    ChunkDecodeOptions decode_options_;
    std::vector<std::uint64_t> bgzf_groups_;  // member byte offsets starting each group

    mutable std::mutex mutex_;
    Statistics stats_;
    GzipIndex index_;
    bool index_imported_ = false;

    Frontier frontier_;
    std::deque<Pending> pending_;
    std::uint64_t harvested_end_ = 0;
    std::uint64_t harvested_end_key_ = 0;
    bool harvested_all_ = false;
    std::uint64_t member_start_ = 0;
    std::uint32_t running_crc_ = 0;
    std::optional<PointCandidate> point_candidate_;
    std::uint64_t last_point_ = 0;

    PrefetchStrategy grid_strategy_;
    PrefetchStrategy interval_strategy_;
    std::list<std::shared_ptr<const ResolvedChunk>> access_cache_;
    std::map<CacheKey, std::future<DecodedChunk>> prefetch_;
    std::deque<CacheKey> prefetch_order_;

    // Declared last so that workers stop before anything they reference.
    std::unique_ptr<ThreadPool> pool_;
};

}  // namespace ragz
