#include "ragz/chunk_fetcher.hpp"

#include "ragz/bit_reader.hpp"
#include "ragz/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <thread>

namespace ragz {

namespace {

std::size_t resolve_parallelism(std::size_t requested)
{
    if (requested != 0) {
        return requested;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

bool is_ready(const std::future<DecodedChunk>& future)
{
    return future.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
}

std::uint32_t crc_update(std::uint32_t crc, std::span<const std::uint8_t> data)
{
    return static_cast<std::uint32_t>(crc32_z(crc, data.data(), data.size()));
}

std::shared_ptr<ResolvedChunk> from_bytes(std::uint64_t begin, deflate::SymbolBuffer<std::uint8_t>&& bytes)
{
    auto out = std::make_shared<ResolvedChunk>();
    out->decompressed_begin = begin;
    out->offset = bytes.prefix;
    out->length = bytes.size - bytes.prefix;
    out->storage = std::move(bytes.storage);
    return out;
}

}  // namespace

ChunkFetcher::ChunkFetcher(std::shared_ptr<const SharedSource> source, FetcherOptions options)
    : source_(std::move(source)),
      options_(options),
      parallelism_(resolve_parallelism(options.parallelism)),
      grid_strategy_(2 * parallelism_),
      interval_strategy_(2 * parallelism_)
{
    if (!source_) {
        throw Error(ErrorCode::InvalidArgument, "no input source");
    }
    if (options_.chunk_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "chunk size must be positive");
    }
    options_.access_cache_capacity = std::max<std::size_t>(1, options_.access_cache_capacity);
    chunk_bits_ = options_.chunk_size * 8U;
    file_bits_ = source_->size() * 8U;
    spacing_ = options_.seek_point_spacing != 0 ? options_.seek_point_spacing : options_.chunk_size;
    decode_options_.max_output =
        options_.max_chunk_output != 0 ? options_.max_chunk_output : 256U * options_.chunk_size;
    decode_options_.statistics = &stats_;
    decode_options_.initial_capacity =
        static_cast<std::size_t>(std::clamp<std::uint64_t>(options_.chunk_size, 64U << 10U, 1U << 20U));

    // BGZF: every member announces its size, so chunks can start at member
    // headers without searching.
    try {
        BitReader reader(source_);
        const auto size = source_->size();
        std::vector<std::uint64_t> groups;
        std::uint64_t offset = 0;
        while (offset < size) {
            reader.seek_bits(offset * 8U);
            const auto block_size = gzip::parse_gzip_header(reader).bgzf_block_size();
            if (!block_size) {
                groups.clear();
                break;
            }
            if (groups.empty() || offset - groups.back() >= options_.chunk_size) {
                groups.push_back(offset);
            }
            offset += *block_size + 1U;
        }
        if (offset == size) {
            bgzf_groups_ = std::move(groups);
        }
    } catch (const Error&) {
    }

    pool_ = std::make_unique<ThreadPool>(parallelism_);
}

ChunkFetcher::~ChunkFetcher() = default;

std::size_t ChunkFetcher::read(std::uint64_t offset, std::span<std::uint8_t> out)
{
    std::lock_guard lock(mutex_);
    std::size_t copied = 0;
    while (copied < out.size()) {
        const auto position = offset + copied;
        if (index_.finalized() && position >= index_.total_decompressed()) {
            break;
        }
        auto chunk = cached(position);
        if (!chunk) {
            if (index_.finalized() || position < harvested_end_) {
                chunk = fetch_interval(index_.locate(position));
                remember(chunk);
            } else {
                advance_until(position);
                chunk = cached(position);
            }
        }
        if (!chunk || position >= chunk->decompressed_end()) {
            break;
        }
        const auto data = chunk->data().subspan(position - chunk->decompressed_begin);
        const auto n = std::min<std::size_t>(data.size(), out.size() - copied);
        std::memcpy(out.data() + copied, data.data(), n);
        copied += n;
    }
    return copied;
}

std::optional<std::uint64_t> ChunkFetcher::size()
{
    std::lock_guard lock(mutex_);
    if (index_.finalized()) {
        return index_.total_decompressed();
    }
    return std::nullopt;
}

GzipIndex ChunkFetcher::build_full_index()
{
    std::lock_guard lock(mutex_);
    if (!index_.finalized()) {
        advance_until(std::numeric_limits<std::uint64_t>::max());
    }
    return index_;
}

void ChunkFetcher::import_index(GzipIndex index)
{
    std::lock_guard lock(mutex_);
    if (!index.finalized()) {
        throw Error(ErrorCode::InvalidArgument, "only a complete index can be imported");
    }
    if (index.total_compressed_bits() != file_bits_) {
        throw Error(ErrorCode::IndexMismatch, "index describes a file of " +
                                                  std::to_string(index.total_compressed_bits() / 8U) +
                                                  " bytes, input has " + std::to_string(file_bits_ / 8U));
    }
    if (index.empty() && index.total_decompressed() != 0) {
        throw Error(ErrorCode::IndexCorruption, "index has no seek points");
    }
    index_ = std::move(index);
    index_imported_ = true;
    harvested_all_ = true;
    pending_.clear();
    access_cache_.clear();
    prefetch_.clear();
    prefetch_order_.clear();
}

GzipIndex ChunkFetcher::index()
{
    std::lock_guard lock(mutex_);
    return index_;
}

StatisticsSnapshot ChunkFetcher::statistics() const { return snapshot(stats_); }

std::shared_ptr<const ResolvedChunk> ChunkFetcher::cached(std::uint64_t offset)
{
    for (auto it = access_cache_.begin(); it != access_cache_.end(); ++it) {
        if ((*it)->decompressed_begin <= offset && offset < (*it)->decompressed_end()) {
            access_cache_.splice(access_cache_.begin(), access_cache_, it);
            return access_cache_.front();
        }
    }
    return nullptr;
}

void ChunkFetcher::remember(std::shared_ptr<const ResolvedChunk> chunk)
{
    access_cache_.push_front(std::move(chunk));
    while (access_cache_.size() > options_.access_cache_capacity) {
        access_cache_.pop_back();
    }
}

void ChunkFetcher::advance_until(std::uint64_t offset)
{
    while (!harvested_all_ && harvested_end_ <= offset) {
        if (pending_.empty()) {
            confirm_next(true);
        }
        // Confirm whatever speculative results are already there so that
        // their marker replacement overlaps with the wait for the oldest one.
        while (pending_.size() < parallelism_ && confirm_next(false)) {
        }
        harvest_front();
    }
}

bool ChunkFetcher::confirm_next(bool wait)
{
    if (frontier_.reached_end) {
        return false;
    }
    const auto key = frontier_.key;
    const auto ordinal = grid_ordinal(key);

    // Chunks the frontier jumped over will never be asked for.
    for (auto it = prefetch_.begin(); it != prefetch_.end();) {
        if (it->first.first == KeySpace::Grid && it->first.second < ordinal) {
            stats_.unused_prefetches.fetch_add(1, std::memory_order_relaxed);
            const auto stale = it->first;
            ++it;
            drop_prefetch(stale);
        } else {
            ++it;
        }
    }

    std::optional<DecodedChunk> chunk;
    const CacheKey cache_key{KeySpace::Grid, ordinal};
    if (auto it = prefetch_.find(cache_key); it != prefetch_.end()) {
        if (!wait && !is_ready(it->second)) {
            return false;
        }
        auto future = std::move(it->second);
        drop_prefetch(cache_key);
        try {
            auto result = future.get();
            if (result.found && result.start_key == key) {
                chunk = std::move(result);
                stats_.cache_hits.fetch_add(1, std::memory_order_relaxed);
            }
        } catch (const std::exception&) {
            // A speculative decode that failed just means an exact one is needed.
        }
    } else if (!wait) {
        return false;
    }

    prefetch_grid(ordinal);

    if (!chunk) {
        stats_.cache_misses.fetch_add(1, std::memory_order_relaxed);
        auto window = std::make_shared<const std::vector<std::uint8_t>>(frontier_.window);
        chunk = dispatch_exact(exact_grid_request(ordinal, key), ThreadPool::Priority::High, std::move(window)).get();
    }

    Pending pending;
    pending.decompressed_begin = frontier_.decompressed;
    pending.end_key = chunk->end_key;
    pending.reached_end = chunk->reached_end;
    pending.boundaries = std::move(chunk->boundaries);
    pending.member_ends = std::move(chunk->member_ends);
    pending.member_starts = std::move(chunk->member_starts);
    pending.window_before = frontier_.window;

    // The next chunk needs the last 32 KiB right away; resolve only the
    // markers among them here and leave the rest to a worker.
    const auto bytes = chunk->bytes.output();
    auto next_window = deflate::trailing_window(frontier_.window, {});
    if (bytes.size() < deflate::window_size && chunk->contains_markers()) {
        const auto markers = chunk->markers.output();
        const auto count = std::min<std::size_t>(deflate::window_size - bytes.size(), markers.size());
        std::vector<std::uint8_t> tail(count);
        deflate::replace_markers(markers.last(count), frontier_.window, tail);
        stats_.propagated_symbols.fetch_add(count, std::memory_order_relaxed);
        next_window = deflate::trailing_window(next_window, tail);
    }
    next_window = deflate::trailing_window(next_window, bytes);

    const auto size = chunk->size();
    if (!chunk->contains_markers()) {
        std::promise<std::shared_ptr<ResolvedChunk>> promise;
        promise.set_value(from_bytes(pending.decompressed_begin, std::move(chunk->bytes)));
        pending.resolved = promise.get_future();
    } else {
        auto decoded = std::make_shared<DecodedChunk>(std::move(*chunk));
        auto window = std::make_shared<const std::vector<std::uint8_t>>(frontier_.window);
        pending.resolved = pool_->submit([decoded, window, begin = pending.decompressed_begin, stats = &stats_] {
            auto out = std::make_shared<ResolvedChunk>();
            out->decompressed_begin = begin;
            out->storage = TrackedBuffer<std::uint8_t>(&stats->memory);
            out->storage.resize(decoded->size());
            out->length = decoded->size();
            const auto markers = decoded->markers.output();
            deflate::replace_markers(markers, *window, out->storage.span().first(markers.size()));
            const auto bytes = decoded->bytes.output();
            if (!bytes.empty()) {
                std::memcpy(out->storage.data() + markers.size(), bytes.data(), bytes.size());
            }
            decoded->markers.storage.clear_and_release();
            decoded->bytes.storage.clear_and_release();
            stats->replaced_symbols.fetch_add(markers.size(), std::memory_order_relaxed);
            stats->replacement_tasks.fetch_add(1, std::memory_order_relaxed);
            return out;
        });
    }
    pending_.push_back(std::move(pending));

    frontier_.key = pending_.back().end_key;
    frontier_.decompressed += size;
    frontier_.window = std::move(next_window);
    frontier_.reached_end = pending_.back().reached_end;
    return true;
}

void ChunkFetcher::harvest_front()
{
    auto pending = std::move(pending_.front());
    pending_.pop_front();
    std::shared_ptr<const ResolvedChunk> chunk = pending.resolved.get();
    const auto data = chunk->data();
    const auto begin = pending.decompressed_begin;

    for (const auto start : pending.member_starts) {
        index_.add_member_start(begin + start);
    }

    std::size_t crc_from = 0;
    for (const auto& end : pending.member_ends) {
        const auto member_end = begin + end.decompressed_offset;
        const auto isize = static_cast<std::uint32_t>(member_end - member_start_);
        if (isize != end.footer.isize) {
            throw Error(ErrorCode::IsizeMismatch, "gzip member ending at decompressed offset " +
                                                      std::to_string(member_end) + " has ISIZE " +
                                                      std::to_string(end.footer.isize) + ", decoded " +
                                                      std::to_string(isize) + " (mod 2^32)");
        }
        if (options_.verify_crc) {
            running_crc_ = crc_update(running_crc_, data.subspan(crc_from, end.decompressed_offset - crc_from));
            if (running_crc_ != end.footer.crc32) {
                throw Error(ErrorCode::CrcMismatch,
                            "CRC32 mismatch in gzip member ending at decompressed offset " +
                                std::to_string(member_end));
            }
            running_crc_ = 0;
            crc_from = end.decompressed_offset;
        }
        member_start_ = member_end;
    }
    if (options_.verify_crc) {
        running_crc_ = crc_update(running_crc_, data.subspan(crc_from));
    }

    for (const auto& boundary : pending.boundaries) {
        consider_seek_point(boundary, pending, *chunk);
    }
    if (point_candidate_ && !point_candidate_->window) {
        const auto relative = point_candidate_->decompressed - begin;
        point_candidate_->window = deflate::trailing_window(pending.window_before, data.first(relative));
    }

    harvested_end_ = chunk->decompressed_end();
    harvested_end_key_ = pending.end_key;
    remember(chunk);
    if (pending.reached_end) {
        harvested_all_ = true;
        finalize_index();
    }
}

void ChunkFetcher::consider_seek_point(const BlockBoundary& boundary, const Pending& pending,
                                       const ResolvedChunk& chunk)
{
    const auto begin = pending.decompressed_begin;
    const auto window_at = [&](std::uint64_t decompressed) {
        return deflate::trailing_window(pending.window_before, chunk.data().first(decompressed - begin));
    };
    const auto add = [&](std::uint64_t key, std::uint64_t decompressed, std::vector<std::uint8_t> window) {
        index_.insert({key, decompressed, std::move(window)});
        last_point_ = decompressed;
    };

    const auto decompressed = begin + boundary.decompressed_offset;
    if (index_.empty()) {
        add(boundary.key, decompressed, window_at(decompressed));
        return;
    }
    if (decompressed == last_point_ || (point_candidate_ && point_candidate_->decompressed == decompressed)) {
        return;
    }
    if (decompressed - last_point_ >= spacing_) {
        if (decompressed - last_point_ > spacing_ && point_candidate_) {
            auto candidate = std::move(*point_candidate_);
            point_candidate_.reset();
            add(candidate.key, candidate.decompressed,
                candidate.window ? std::move(*candidate.window) : window_at(candidate.decompressed));
        }
        if (decompressed - last_point_ >= spacing_) {
            add(boundary.key, decompressed, window_at(decompressed));
            return;
        }
    }
    point_candidate_ = PointCandidate{boundary.key, decompressed, std::nullopt};
}

void ChunkFetcher::finalize_index()
{
    if (point_candidate_ && harvested_end_ - last_point_ > spacing_) {
        auto candidate = std::move(*point_candidate_);
        index_.insert({candidate.key, candidate.decompressed, std::move(candidate.window).value()});
        last_point_ = candidate.decompressed;
    }
    point_candidate_.reset();
    index_.finalize(harvested_end_, file_bits_);
}

std::optional<ChunkFetcher::IntervalPlan> ChunkFetcher::plan_interval(std::size_t point) const
{
    const auto& start = index_[point];
    IntervalPlan plan;
    plan.decompressed_begin = start.decompressed_offset;
    plan.request.start = start.compressed_offset;
    plan.request.policy = StopPolicy::AnyBoundary;
    if (point + 1 < index_.size()) {
        plan.request.stop = index_[point + 1].compressed_offset;
        plan.decompressed_end = index_[point + 1].decompressed_offset;
    } else if (index_.finalized()) {
        plan.request.stop = std::numeric_limits<std::uint64_t>::max();
        plan.decompressed_end = index_.total_decompressed();
        plan.bounded = false;
    } else if (harvested_end_key_ > start.compressed_offset) {
        plan.request.stop = harvested_end_key_;
        plan.decompressed_end = harvested_end_;
    } else {
        return std::nullopt;
    }
    plan.window = std::make_shared<const std::vector<std::uint8_t>>(start.window);
    return plan;
}

std::shared_ptr<const ResolvedChunk> ChunkFetcher::fetch_interval(std::size_t point)
{
    const auto plan = plan_interval(point);
    if (!plan) {
        throw Error(ErrorCode::OutOfRange, "no decoded data around seek point " + std::to_string(point));
    }

    // Claim the prefetched entry before planning more, or eviction could pick it.
    std::future<DecodedChunk> future;
    const CacheKey cache_key{KeySpace::Interval, point};
    if (auto it = prefetch_.find(cache_key); it != prefetch_.end()) {
        future = std::move(it->second);
        drop_prefetch(cache_key);
        stats_.cache_hits.fetch_add(1, std::memory_order_relaxed);
        prefetch_intervals(point);
    } else {
        stats_.cache_misses.fetch_add(1, std::memory_order_relaxed);
        future = dispatch_exact(plan->request, ThreadPool::Priority::High, plan->window);
        prefetch_intervals(point);
    }
    auto chunk = future.get();

    const auto expected = plan->decompressed_end - plan->decompressed_begin;
    const bool ends_right = plan->bounded ? chunk.end_key == plan->request.stop : chunk.reached_end;
    if (!ends_right || chunk.size() != expected) {
        throw Error(ErrorCode::IndexMismatch,
                    "decoding from seek point " + std::to_string(point) + " produced " +
                        std::to_string(chunk.size()) + " bytes ending at bit " + std::to_string(chunk.end_key) +
                        ", index expects " + std::to_string(expected) + " bytes",
                    plan->request.start);
    }
    return from_bytes(plan->decompressed_begin, std::move(chunk.bytes));
}

std::uint64_t ChunkFetcher::grid_ordinal(std::uint64_t key) const
{
    if (bgzf_groups_.empty()) {
        return key / chunk_bits_;
    }
    const auto it = std::upper_bound(bgzf_groups_.begin(), bgzf_groups_.end(), key / 8U);
    return static_cast<std::uint64_t>(std::distance(bgzf_groups_.begin(), it)) - 1U;
}

ChunkRequest ChunkFetcher::exact_grid_request(std::uint64_t ordinal, std::uint64_t key) const
{
    ChunkRequest request;
    request.start = key;
    if (bgzf_groups_.empty()) {
        request.stop = (ordinal + 1U) * chunk_bits_;
        request.policy = StopPolicy::FindableBoundary;
        request.at_member_header = key == 0;
    } else {
        request.stop = ordinal + 1U < bgzf_groups_.size() ? bgzf_groups_[ordinal + 1U] * 8U
                                                           : std::numeric_limits<std::uint64_t>::max();
        request.policy = StopPolicy::MemberStart;
        request.at_member_header = true;
    }
    return request;
}

void ChunkFetcher::prefetch_grid(std::uint64_t ordinal)
{
    const auto ordinals = grid_strategy_.plan(ordinal);
    std::vector<CacheKey> plan;
    for (const auto o : ordinals) {
        plan.emplace_back(KeySpace::Grid, o);
    }

    for (const auto o : ordinals) {
        const CacheKey key{KeySpace::Grid, o};
        if (prefetch_.contains(key)) {
            continue;
        }
        if (bgzf_groups_.empty() ? o * chunk_bits_ >= file_bits_ : o >= bgzf_groups_.size()) {
            break;
        }
        if (!may_dispatch(plan)) {
            break;
        }
        std::future<DecodedChunk> future;
        if (bgzf_groups_.empty()) {
            const auto guess = o * chunk_bits_;
            const auto stop = guess + chunk_bits_;
            std::vector<std::uint64_t> extra;
            if (options_.injected_false_candidates != 0) {
                std::mt19937_64 rng(options_.fault_seed ^ (o * 0x9E3779B97F4A7C15ULL));
                std::uniform_int_distribution<std::uint64_t> position(guess, std::min(stop, file_bits_) - 1U);
                for (std::size_t i = 0; i < options_.injected_false_candidates; ++i) {
                    extra.push_back(position(rng));
                }
                std::sort(extra.begin(), extra.end());
            }
            future = pool_->submit([source = source_, guess, stop, options = decode_options_,
                                    extra = std::move(extra)]() mutable {
                return decode_chunk_speculative(source, guess, stop, options, std::move(extra));
            });
        } else {
            auto request = exact_grid_request(o, bgzf_groups_[o] * 8U);
            future = dispatch_exact(request, ThreadPool::Priority::Normal,
                                    std::make_shared<const std::vector<std::uint8_t>>());
        }
        stats_.prefetch_dispatches.fetch_add(1, std::memory_order_relaxed);
        prefetch_.emplace(key, std::move(future));
        prefetch_order_.push_back(key);
    }
}

void ChunkFetcher::prefetch_intervals(std::size_t point)
{
    const auto points = interval_strategy_.plan(point);
    std::vector<CacheKey> plan;
    for (const auto p : points) {
        plan.emplace_back(KeySpace::Interval, p);
    }
    for (const auto p : points) {
        const CacheKey key{KeySpace::Interval, p};
        if (prefetch_.contains(key)) {
            continue;
        }
        if (p >= index_.size()) {
            break;
        }
        // Only intervals whose end is already fixed.
        if (p + 1 == index_.size() && !index_.finalized()) {
            break;
        }
        if (!may_dispatch(plan)) {
            break;
        }
        auto interval = plan_interval(p);
        if (!interval) {
            break;
        }
        stats_.prefetch_dispatches.fetch_add(1, std::memory_order_relaxed);
        prefetch_.emplace(key, dispatch_exact(interval->request, ThreadPool::Priority::Normal, interval->window));
        prefetch_order_.push_back(key);
    }
}

bool ChunkFetcher::may_dispatch(const std::vector<CacheKey>& plan)
{
    const auto capacity = 2 * parallelism_;
    if (prefetch_.size() < capacity) {
        return true;
    }
    // Evict the least recently inserted entry the current plan does not need.
    for (const auto& key : prefetch_order_) {
        if (std::find(plan.begin(), plan.end(), key) == plan.end()) {
            const auto victim = key;
            drop_prefetch(victim);
            stats_.unused_prefetches.fetch_add(1, std::memory_order_relaxed);
            return true;
        }
    }
    return false;
}

void ChunkFetcher::drop_prefetch(const CacheKey& key)
{
    prefetch_.erase(key);
    prefetch_order_.erase(std::remove(prefetch_order_.begin(), prefetch_order_.end(), key), prefetch_order_.end());
}

std::future<DecodedChunk> ChunkFetcher::dispatch_exact(ChunkRequest request, ThreadPool::Priority priority,
                                                       std::shared_ptr<const std::vector<std::uint8_t>> window)
{
    stats_.exact_tasks.fetch_add(1, std::memory_order_relaxed);
    return pool_->submit(
        [source = source_, request, window = std::move(window), options = decode_options_]() mutable {
            if (window) {
                request.window = std::span<const std::uint8_t>(*window);
            }
            return decode_chunk(source, request, options);
        },
        priority);
}

}  // namespace ragz
