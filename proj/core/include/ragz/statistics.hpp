#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ragz {

/// Live/peak byte accounting for decoded chunk buffers.
class MemoryTracker {
public:
    void add(std::int64_t delta) noexcept
    {
        const auto now = current_.fetch_add(delta, std::memory_order_relaxed) + delta;
        auto peak = peak_.load(std::memory_order_relaxed);
        while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
        }
    }

    std::int64_t current() const noexcept { return current_.load(std::memory_order_relaxed); }
    std::int64_t peak() const noexcept { return peak_.load(std::memory_order_relaxed); }
    void reset_peak() noexcept { peak_.store(current(), std::memory_order_relaxed); }

private:
    std::atomic<std::int64_t> current_{0};
    std::atomic<std::int64_t> peak_{0};
};

/// std::vector whose capacity is reported to a MemoryTracker for as long as
/// the buffer lives. Move-only.
template <typename T>
class TrackedBuffer {
public:
    TrackedBuffer() = default;
    explicit TrackedBuffer(MemoryTracker* tracker) : tracker_(tracker) {}

    TrackedBuffer(const TrackedBuffer&) = delete;
    TrackedBuffer& operator=(const TrackedBuffer&) = delete;

    TrackedBuffer(TrackedBuffer&& other) noexcept
        : data_(std::move(other.data_)), tracker_(other.tracker_), accounted_(std::exchange(other.accounted_, 0))
    {
        other.data_.clear();
    }

    TrackedBuffer& operator=(TrackedBuffer&& other) noexcept
    {
        if (this != &other) {
            release();
            data_ = std::move(other.data_);
            other.data_.clear();
            tracker_ = other.tracker_;
            accounted_ = std::exchange(other.accounted_, 0);
        }
        return *this;
    }

    ~TrackedBuffer() { release(); }

    void resize(std::size_t n)
    {
        data_.resize(n);
        sync();
    }

    void reserve(std::size_t n)
    {
        data_.reserve(n);
        sync();
    }

    void shrink_to_fit()
    {
        data_.shrink_to_fit();
        sync();
    }

    void clear_and_release()
    {
        std::vector<T>().swap(data_);
        sync();
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> span() noexcept { return data_; }
    std::span<const T> span() const noexcept { return data_; }

private:
    void sync() noexcept
    {
        const auto bytes = data_.capacity() * sizeof(T);
        if (tracker_ != nullptr && bytes != accounted_) {
            tracker_->add(static_cast<std::int64_t>(bytes) - static_cast<std::int64_t>(accounted_));
        }
        accounted_ = bytes;
    }

    void release() noexcept
    {
        if (tracker_ != nullptr && accounted_ != 0) {
            tracker_->add(-static_cast<std::int64_t>(accounted_));
        }
        accounted_ = 0;
    }

    std::vector<T> data_;
    MemoryTracker* tracker_ = nullptr;
    std::size_t accounted_ = 0;
};

/// Instrumentation counters shared by the fetcher and its worker tasks.
struct Statistics {
    std::atomic<std::uint64_t> speculative_tasks{0};
    std::atomic<std::uint64_t> exact_tasks{0};
    std::atomic<std::uint64_t> cache_hits{0};
    std::atomic<std::uint64_t> cache_misses{0};
    std::atomic<std::uint64_t> failed_candidates{0};
    std::atomic<std::uint64_t> unused_prefetches{0};
    std::atomic<std::uint64_t> empty_chunks{0};
    std::atomic<std::uint64_t> marker_buffers{0};
    std::atomic<std::uint64_t> mode_switches{0};
    std::atomic<std::uint64_t> stored_blocks{0};
    std::atomic<std::uint64_t> propagated_symbols{0};
    std::atomic<std::uint64_t> replaced_symbols{0};
    std::atomic<std::uint64_t> replacement_tasks{0};
    std::atomic<std::uint64_t> prefetch_dispatches{0};
    MemoryTracker memory;
};

/// Plain copy of the counters for reporting.
struct StatisticsSnapshot {
    std::uint64_t speculative_tasks = 0;
    std::uint64_t exact_tasks = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t failed_candidates = 0;
    std::uint64_t unused_prefetches = 0;
    std::uint64_t empty_chunks = 0;
    std::uint64_t marker_buffers = 0;
    std::uint64_t mode_switches = 0;
    std::uint64_t stored_blocks = 0;
    std::uint64_t propagated_symbols = 0;
    std::uint64_t replaced_symbols = 0;
    std::uint64_t replacement_tasks = 0;
    std::uint64_t prefetch_dispatches = 0;
    std::int64_t live_chunk_bytes = 0;
    std::int64_t peak_chunk_bytes = 0;
};

StatisticsSnapshot snapshot(const Statistics& stats) noexcept;

}  // namespace ragz
