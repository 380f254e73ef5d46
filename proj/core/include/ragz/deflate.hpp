#pragma once

#include "ragz/bit_reader.hpp"
#include "ragz/huffman.hpp"
#include "ragz/statistics.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace ragz::deflate {

inline constexpr std::size_t window_size = 32768;
/// Two-stage symbols at or above this value are unresolved back-references
/// into the unknown window: marker_base + offset into the window.
inline constexpr std::uint16_t marker_base = 32768;

inline constexpr unsigned max_literal_codes = 286;
inline constexpr unsigned max_distance_codes = 30;
/// HDIST encodes up to 32 distance lengths; the last two symbols are unusable.
inline constexpr unsigned max_distance_lengths = 32;
inline constexpr unsigned precode_alphabet = 19;
inline constexpr unsigned max_match_length = 258;
inline constexpr std::uint16_t end_of_block = 256;

/// Order in which precode lengths are transmitted.
inline constexpr std::array<std::uint8_t, precode_alphabet> precode_order = {
    16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15};

inline constexpr std::array<std::uint16_t, 29> length_base = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                                              15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                                              67, 83, 99, 115, 131, 163, 195, 227, 258};
inline constexpr std::array<std::uint8_t, 29> length_extra = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                                              2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
inline constexpr std::array<std::uint16_t, 30> distance_base = {
    1,   2,   3,   4,   5,   7,    9,    13,   17,   25,   33,   49,   65,    97,    129,
    193, 257, 385, 513, 769, 1025, 1537, 2049, 3073, 4097, 6145, 8193, 12289, 16385, 24577};
inline constexpr std::array<std::uint8_t, 30> distance_extra = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5,  6,
                                                                6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

/// BTYPE field values as read LSB-first.
enum class BlockType : std::uint8_t { Stored = 0, Fixed = 1, Dynamic = 2 };

struct BlockHeader {
    bool is_final = false;
    BlockType type = BlockType::Stored;
};

/// Reads BFINAL and BTYPE; throws ReservedBlockType for BTYPE 3.
BlockHeader read_block_header(BitReader& reader);

/// Aligns to the next byte and reads LEN/NLEN; returns LEN.
std::uint16_t read_stored_length(BitReader& reader);

/// Outcome of validating a dynamic block header, in the order the checks run.
enum class HeaderCheck : std::uint8_t {
    Valid,
    InvalidFinalBlock,
    InvalidCompressionType,
    InvalidPrecodeSize,
    InvalidPrecodeCode,
    NonOptimalPrecodeCode,
    InvalidPrecodeData,
    InvalidDistanceCode,
    NonOptimalDistanceCode,
    InvalidLiteralCode,
    NonOptimalLiteralCode,
    Truncated,
};

inline constexpr std::size_t header_check_count = 12;

std::string_view to_string(HeaderCheck check) noexcept;

/// How lenient the literal and distance code checks are. The precode is always
/// checked strictly.
enum class Strictness : std::uint8_t {
    /// Both codes must be complete; used to reject block-start candidates.
    Strict,
    /// Accepts what zlib accepts: an empty distance code, or a single one-bit
    /// literal or distance code.
    Permissive,
};

struct CodeLengths {
    unsigned literal_count = 0;
    unsigned distance_count = 0;
    std::array<std::uint8_t, precode_alphabet> precode{};  // indexed by symbol
    std::array<std::uint8_t, max_literal_codes + 2 + max_distance_lengths> lengths{};

    std::span<const std::uint8_t> literal() const { return {lengths.data(), literal_count}; }
    std::span<const std::uint8_t> distance() const { return {lengths.data() + literal_count, distance_count}; }
};

/// Validates the dynamic header fields that follow BFINAL/BTYPE: HLIT, HDIST,
/// HCLEN, the precode, the precode-coded lengths and both resulting codes.
/// Leaves the reader after the header on success, anywhere on failure.
HeaderCheck check_dynamic_header(BitReader& reader, CodeLengths& out, Strictness strictness);

/// Checks from the precode-coded lengths onward. `out.precode`,
/// `out.literal_count` and `out.distance_count` must be set and the precode
/// already known to be complete; the reader sits after the precode lengths.
HeaderCheck check_code_lengths(BitReader& reader, CodeLengths& out, Strictness strictness);

struct DynamicCodes {
    huffman::HuffmanDecoder literal;
    huffman::HuffmanDecoder distance;
    /// Both codes are complete, i.e. the header would pass the block finder.
    bool complete = true;
};

/// Reads a dynamic block header (after BFINAL/BTYPE) for decoding. Throws an
/// Error naming the failed check.
DynamicCodes read_dynamic_header(BitReader& reader);

const huffman::HuffmanDecoder& fixed_literal_decoder();
const huffman::HuffmanDecoder& fixed_distance_decoder();

/// Growable symbol buffer used as decoding history and output.
/// Symbols [0, prefix) are history only; [prefix, size) is the output.
/// Back-references may not reach below `floor`.
template <typename Symbol>
struct SymbolBuffer {
    TrackedBuffer<Symbol> storage;
    std::size_t size = 0;
    std::size_t prefix = 0;
    std::size_t floor = 0;

    std::span<const Symbol> output() const { return {storage.data() + prefix, size - prefix}; }
    std::span<const Symbol> all() const { return {storage.data(), size}; }
};

/// Block-by-block decoder that starts either with an unknown window, producing
/// 16-bit marker symbols, or with a known window, producing bytes. In marker
/// mode it switches to bytes as soon as the trailing 32 KiB contain no marker.
class BlockDecoder {
public:
    enum class Mode : std::uint8_t { Markers, Bytes };

    struct Options {
        /// Throws ChunkTooLarge when the decoded size would exceed this.
        std::uint64_t max_output = std::numeric_limits<std::uint64_t>::max();
        MemoryTracker* tracker = nullptr;
        Statistics* statistics = nullptr;
        std::size_t initial_capacity = 1U << 20U;
    };

    /// Two-stage: the 32 KiB before the first block is unknown.
    static BlockDecoder with_unknown_window(const Options& options);
    /// Single-stage with a known (possibly shorter or empty) window.
    static BlockDecoder with_window(std::span<const std::uint8_t> window, const Options& options);

    BlockDecoder(BlockDecoder&&) noexcept = default;
    BlockDecoder& operator=(BlockDecoder&&) noexcept = default;

    /// Decodes the body of a block whose header was just read. For dynamic
    /// blocks, pass the header read with read_dynamic_header.
    void decode_block(BitReader& reader, const BlockHeader& header, const DynamicCodes* dynamic = nullptr);

    /// A new gzip member begins: history is discarded.
    void reset_history();

    Mode mode() const noexcept { return mode_; }
    /// Symbols produced so far, in both stages.
    std::uint64_t size() const noexcept;

    /// Output decoded before the switch to bytes (empty if none).
    const SymbolBuffer<std::uint16_t>& markers() const noexcept { return markers_; }
    const SymbolBuffer<std::uint8_t>& bytes() const noexcept { return bytes_; }
    SymbolBuffer<std::uint16_t> take_markers() noexcept { return std::move(markers_); }
    SymbolBuffer<std::uint8_t> take_bytes() noexcept { return std::move(bytes_); }

    /// Marker output length (0 when the decoder never used markers).
    std::size_t marker_output_size() const noexcept { return markers_.size - markers_.prefix; }

private:
    explicit BlockDecoder(const Options& options) : options_(options) {}

    enum class BlockEnd : std::uint8_t { EndOfBlock, SwitchToBytes };

    template <typename Symbol>
    void reserve(SymbolBuffer<Symbol>& buffer, std::size_t extra);

    template <typename Symbol, bool TrackMarkers>
    BlockEnd decode_huffman(BitReader& reader, const huffman::HuffmanDecoder& literal,
                            const huffman::HuffmanDecoder& distance, SymbolBuffer<Symbol>& out);

    void decode_stored(BitReader& reader);
    void switch_to_bytes();
    void check_limit(std::size_t additional) const;

    Options options_;
    Mode mode_ = Mode::Bytes;
    SymbolBuffer<std::uint16_t> markers_;
    SymbolBuffer<std::uint8_t> bytes_;
    /// Position after the last marker symbol in markers_.
    std::size_t last_marker_end_ = 0;
};

/// Resolves marker symbols against the 32 KiB window that precedes the
/// chunk. A window shorter than 32 KiB is aligned to the end. Throws
/// CorruptMarkerBuffer for symbols in [256, 32768) or markers that point
/// before the start of a short window.
void replace_markers(std::span<const std::uint16_t> symbols, std::span<const std::uint8_t> window,
                     std::span<std::uint8_t> out);

/// Last `window_size` bytes of the concatenation of `previous` and `data`.
std::vector<std::uint8_t> trailing_window(std::span<const std::uint8_t> previous, std::span<const std::uint8_t> data);

}  // namespace ragz::deflate
