#pragma once

#include "ragz/deflate.hpp"
#include "ragz/error.hpp"
#include "ragz/shared_source.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ragz::blockfinder {

inline constexpr unsigned skip_lut_bits = 14;

/// Entry v is the smallest shift k in [0, 14) such that the bits of v from k
/// on do not contradict BFINAL = 0, BTYPE = dynamic and HLIT < 30; 14 when no
/// shift qualifies. Entry 0 means all three checks pass at shift 0.
const std::array<std::uint8_t, 1U << skip_lut_bits>& skip_lut();

/// Counts of precode code lengths 0..7 packed into 5-bit fields
/// (field l at bits [5l, 5l + 5)). Field 0 also counts the unused slots up
/// to 20, so it is only meaningful as 20 minus the coded symbols.
std::uint64_t packed_precode_histogram(std::uint64_t precode_bits, unsigned precode_count);

/// True unless the counts for lengths 1..4 (20 bits, packed as above starting
/// at length 1) already rule out a complete code over at most 19 symbols.
bool precode_prefix_possible(std::uint32_t lengths_1_to_4) noexcept;

/// Classifies the precode made of `precode_count` 3-bit lengths in
/// transmission order, using the packed histogram and prefix table.
CodeClass check_precode(std::uint64_t precode_bits, unsigned precode_count);

/// Number of distinct histograms (n1..n7) with at most 19 symbols forming a
/// complete precode, by exhaustive enumeration.
std::size_t count_complete_precode_histograms();

/// A byte range of the compressed file loaded for scanning.
class ScanWindow {
public:
    /// Loads bytes [first_byte, end_byte) clamped to the source size; borrows
    /// memory when the source is contiguous.
    ScanWindow(const SharedSource& source, std::uint64_t first_byte, std::uint64_t end_byte);
    /// Borrows `bytes`, which start at absolute byte `first_byte`.
    ScanWindow(std::span<const std::uint8_t> bytes, std::uint64_t first_byte);

    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
    std::uint64_t first_bit() const noexcept { return first_byte_ * 8U; }
    std::uint64_t end_bit() const noexcept { return (first_byte_ + bytes_.size()) * 8U; }

    /// 64 bits starting at absolute `bit`; bits past the window read as zero.
    /// At least 57 of them are meaningful.
    std::uint64_t load(std::uint64_t bit) const noexcept;

private:
    std::vector<std::uint8_t> owned_;
    std::span<const std::uint8_t> bytes_;
    std::uint64_t first_byte_ = 0;
};

/// Classifies the dynamic-header candidate at `bit` by running every check in
/// order with a plain bit reader; used as a reference and for statistics.
deflate::HeaderCheck classify_position(const ScanWindow& window, std::uint64_t bit);

/// First offset in [from, until) at which a non-final dynamic block header
/// passes every check, using the skip table and the packed precode histogram.
std::optional<std::uint64_t> find_next_dynamic(const ScanWindow& window, std::uint64_t from, std::uint64_t until);

/// First canonical stored-block offset in [from, until): LEN/NLEN complement
/// each other at byte b and the top three bits of byte b-1 are zero. The
/// canonical offset is 8b - 3, where a reader sees BFINAL = 0, BTYPE = 0 and
/// zero padding up to LEN.
std::optional<std::uint64_t> find_next_stored(const ScanWindow& window, std::uint64_t from, std::uint64_t until);

/// Canonical offset of a non-final stored block whose header starts at
/// `header_bit` with LEN at byte `len_byte`; nullopt if the padding bits
/// between the header and LEN are not zero, since no scan can produce it.
std::optional<std::uint64_t> canonical_stored_offset(std::uint64_t header_bit, std::uint64_t len_byte,
                                                     std::uint8_t byte_before_len) noexcept;

/// Merges both finders and optional extra offsets into one increasing
/// sequence of block-start candidates within [from, until).
class CandidateIterator {
public:
    CandidateIterator(const ScanWindow& window, std::uint64_t from, std::uint64_t until,
                      std::vector<std::uint64_t> extra = {});

    std::optional<std::uint64_t> next();

private:
    const ScanWindow& window_;
    std::uint64_t until_;
    std::uint64_t dynamic_from_;
    std::uint64_t stored_from_;
    std::optional<std::uint64_t> dynamic_;
    std::optional<std::uint64_t> stored_;
    bool dynamic_done_ = false;
    bool stored_done_ = false;
    std::vector<std::uint64_t> extra_;
    std::size_t extra_next_ = 0;
    std::uint64_t last_ = 0;
    bool any_returned_ = false;
};

}  // namespace ragz::blockfinder
