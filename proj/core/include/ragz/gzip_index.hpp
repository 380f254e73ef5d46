#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ragz {

struct SeekPoint {
    /// Bit offset of a Deflate block start (canonical form for stored blocks).
    std::uint64_t compressed_offset = 0;
    std::uint64_t decompressed_offset = 0;
    /// The min(32 KiB, decompressed_offset) bytes preceding decompressed_offset.
    std::vector<std::uint8_t> window;

    bool operator==(const SeekPoint&) const = default;
};

/// Seek points sorted by both offsets, plus totals once the whole stream is
/// known.
class GzipIndex {
public:
    static constexpr std::uint16_t format_version = 1;
    static constexpr std::uint16_t flag_raw_windows = 1;

    bool empty() const noexcept { return points_.empty(); }
    std::size_t size() const noexcept { return points_.size(); }
    const std::vector<SeekPoint>& points() const noexcept { return points_; }
    const SeekPoint& operator[](std::size_t i) const { return points_[i]; }

    /// Inserting an identical point again is a no-op. Throws IndexCorruption
    /// when the point breaks the ordering of either offset.
    void insert(SeekPoint point);

    /// Position of the point with the greatest decompressed offset <= offset.
    /// Throws OutOfRange if the index is empty or a finalized index ends
    /// before `offset`.
    std::size_t locate(std::uint64_t decompressed_offset) const;

    void finalize(std::uint64_t total_decompressed, std::uint64_t total_compressed_bits);
    bool finalized() const noexcept { return finalized_; }
    std::uint64_t total_decompressed() const noexcept { return total_decompressed_; }
    std::uint64_t total_compressed_bits() const noexcept { return total_compressed_bits_; }

    /// Decompressed offsets at which gzip members start; in memory only.
    const std::vector<std::uint64_t>& member_starts() const noexcept { return member_starts_; }
    void add_member_start(std::uint64_t decompressed_offset);

    /// Binary export; requires a finalized index.
    std::vector<std::uint8_t> serialize() const;
    void write(std::ostream& out) const;

    /// Throws IndexFormat for a bad magic, version, flags or truncation and
    /// IndexCorruption for inconsistent contents.
    static GzipIndex deserialize(std::span<const std::uint8_t> bytes);
    static GzipIndex read(std::istream& in);

    /// Structural equality: points and totals (member starts are not stored).
    bool operator==(const GzipIndex& other) const
    {
        return points_ == other.points_ && finalized_ == other.finalized_ &&
               total_decompressed_ == other.total_decompressed_ &&
               total_compressed_bits_ == other.total_compressed_bits_;
    }

private:
    std::vector<SeekPoint> points_;
    std::vector<std::uint64_t> member_starts_;
    bool finalized_ = false;
    std::uint64_t total_decompressed_ = 0;
    std::uint64_t total_compressed_bits_ = 0;
};

}  // namespace ragz
