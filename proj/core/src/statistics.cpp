#include "ragz/statistics.hpp"

namespace ragz {

StatisticsSnapshot snapshot(const Statistics& stats) noexcept
{
    const auto get = [](const std::atomic<std::uint64_t>& value) { return value.load(std::memory_order_relaxed); };
    StatisticsSnapshot out;
    out.speculative_tasks = get(stats.speculative_tasks);
    out.exact_tasks = get(stats.exact_tasks);
    out.cache_hits = get(stats.cache_hits);
    out.cache_misses = get(stats.cache_misses);
    out.failed_candidates = get(stats.failed_candidates);
    out.unused_prefetches = get(stats.unused_prefetches);
    out.empty_chunks = get(stats.empty_chunks);
    out.marker_buffers = get(stats.marker_buffers);
    out.mode_switches = get(stats.mode_switches);
    out.stored_blocks = get(stats.stored_blocks);
    out.propagated_symbols = get(stats.propagated_symbols);
    out.replaced_symbols = get(stats.replaced_symbols);
    out.replacement_tasks = get(stats.replacement_tasks);
    out.prefetch_dispatches = get(stats.prefetch_dispatches);
    out.live_chunk_bytes = stats.memory.current();
    out.peak_chunk_bytes = stats.memory.peak();
    return out;
}

}  // namespace ragz
