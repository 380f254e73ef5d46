#pragma once

#include "ragz/deflate.hpp"
#include "ragz/gzip_format.hpp"
#include "ragz/shared_source.hpp"
#include "ragz/statistics.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ragz {

/// Where a chunk decode ends, checked at each block start after the first.
enum class StopPolicy : std::uint8_t {
    /// At the first non-final dynamic or stored block at or after the stop
    /// offset whose key the block finder would report.
    FindableBoundary,
    /// At the first block of any kind, or gzip member start, at or after the
    /// stop offset.
    AnyBoundary,
    /// At the first gzip member start at or after the stop offset.
    MemberStart,
};

struct BlockBoundary {
    /// Bit offset where decoding can resume (canonical for stored blocks).
    std::uint64_t key = 0;
    /// Relative to the chunk start.
    std::uint64_t decompressed_offset = 0;
};

struct MemberEnd {
    /// Relative to the chunk start: the end of the member's data.
    std::uint64_t decompressed_offset = 0;
    gzip::GzipFooter footer;
};

/// Result of decoding one chunk. Output is markers.output() followed by
/// bytes.output(); markers are only present for two-stage decodes.
struct DecodedChunk {
    std::uint64_t start_key = 0;
    /// Key of the block where the next chunk starts, or the file size in
    /// bits when the chunk reached the end of the file.
    std::uint64_t end_key = 0;
    bool reached_end = false;
    /// False when no candidate in the scanned range decoded successfully.
    bool found = true;
    deflate::SymbolBuffer<std::uint16_t> markers;
    deflate::SymbolBuffer<std::uint8_t> bytes;
    /// Block starts inside the chunk, beginning with the first block.
    std::vector<BlockBoundary> boundaries;
    std::vector<MemberEnd> member_ends;
    /// Relative offsets where a new gzip member's data starts.
    std::vector<std::uint64_t> member_starts;

    std::uint64_t marker_size() const noexcept { return markers.size - markers.prefix; }
    std::uint64_t size() const noexcept { return marker_size() + (bytes.size - bytes.prefix); }
    bool contains_markers() const noexcept { return marker_size() != 0; }
};

struct ChunkRequest {
    std::uint64_t start = 0;
    std::uint64_t stop = 0;
    StopPolicy policy = StopPolicy::FindableBoundary;
    /// A gzip member header (not a Deflate block) starts at `start`.
    bool at_member_header = false;
    /// Known window before `start`; absent means two-stage decoding.
    std::optional<std::span<const std::uint8_t>> window;
};

struct ChunkDecodeOptions {
    std::uint64_t max_output = std::numeric_limits<std::uint64_t>::max();
    Statistics* statistics = nullptr;
    /// First allocation of the output buffers, in symbols.
    std::size_t initial_capacity = 1U << 20U;
};

/// Decodes starting exactly at `request.start`. Throws on malformed data.
DecodedChunk decode_chunk(const std::shared_ptr<const SharedSource>& source, const ChunkRequest& request,
                          const ChunkDecodeOptions& options);

/// Tries block-start candidates in [guess, stop) in order, decoding the first
/// one that succeeds two-stage up to the stop condition. Returns a chunk with
/// found == false when none succeeds. `extra_candidates` are merged in, which
/// lets tests inject bogus positions.
DecodedChunk decode_chunk_speculative(const std::shared_ptr<const SharedSource>& source, std::uint64_t guess,
                                      std::uint64_t stop, const ChunkDecodeOptions& options,
                                      std::vector<std::uint64_t> extra_candidates = {});

/// Headers of dynamic blocks can span this many bits at most.
inline constexpr std::uint64_t max_dynamic_header_bits = 3 + 14 + 19 * 3 + (286 + 32) * 7 + 64;

}  // namespace ragz
