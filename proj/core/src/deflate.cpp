#include "ragz/deflate.hpp"

#include <algorithm>
#include <cstring>

namespace ragz::deflate {

using huffman::HuffmanDecoder;

std::string_view to_string(HeaderCheck check) noexcept
{
    switch (check) {
    case HeaderCheck::Valid: return "valid";
    case HeaderCheck::InvalidFinalBlock: return "invalid final block";
    case HeaderCheck::InvalidCompressionType: return "invalid compression type";
    case HeaderCheck::InvalidPrecodeSize: return "invalid precode size";
    case HeaderCheck::InvalidPrecodeCode: return "invalid precode code";
    case HeaderCheck::NonOptimalPrecodeCode: return "non-optimal precode code";
    case HeaderCheck::InvalidPrecodeData: return "invalid precode data";
    case HeaderCheck::InvalidDistanceCode: return "invalid distance code";
    case HeaderCheck::NonOptimalDistanceCode: return "non-optimal distance code";
    case HeaderCheck::InvalidLiteralCode: return "invalid literal code";
    case HeaderCheck::NonOptimalLiteralCode: return "non-optimal literal code";
    case HeaderCheck::Truncated: return "truncated";
    }
    return "unknown";
}

BlockHeader read_block_header(BitReader& reader)
{
    const auto offset = reader.tell();
    const auto bits = reader.read(3);
    BlockHeader header;
    header.is_final = (bits & 1U) != 0;
    const auto type = bits >> 1U;
    if (type == 3) {
        throw Error(ErrorCode::ReservedBlockType, "block type 3 is reserved", offset);
    }
    header.type = static_cast<BlockType>(type);
    return header;
}

std::uint16_t read_stored_length(BitReader& reader)
{
    reader.align_to_byte();
    const auto offset = reader.tell();
    const auto length = reader.read(16);
    const auto complement = reader.read(16);
    if ((length ^ complement) != 0xFFFFU) {
        throw Error(ErrorCode::LengthMismatch, "stored block LEN does not match NLEN", offset);
    }
    return static_cast<std::uint16_t>(length);
}

namespace {

HeaderCheck classify_code(std::span<const std::uint8_t> lengths, Strictness strictness, HeaderCheck invalid,
                          HeaderCheck non_optimal, bool empty_allowed)
{
    huffman::CodeLengthHistogram histogram;
    for (const auto length : lengths) {
        ++histogram.count[length];
    }
    switch (huffman::classify(histogram)) {
    case CodeClass::Valid: return HeaderCheck::Valid;
    case CodeClass::OverSubscribed: return invalid;
    case CodeClass::Empty:
        return strictness == Strictness::Permissive && empty_allowed ? HeaderCheck::Valid : non_optimal;
    case CodeClass::Inefficient:
        if (strictness == Strictness::Permissive && histogram.coded_symbols() == 1 && histogram.count[1] == 1) {
            return HeaderCheck::Valid;
        }
        return non_optimal;
    }
    return invalid;
}

}  // namespace

HeaderCheck check_code_lengths(BitReader& reader, CodeLengths& out, Strictness strictness)
{
    // The precode is complete, so every 7-bit pattern maps to a symbol.
    std::array<std::uint16_t, 128> table{};
    {
        const auto codes = huffman::canonical_codes(out.precode);
        for (unsigned symbol = 0; symbol < precode_alphabet; ++symbol) {
            const unsigned length = out.precode[symbol];
            if (length == 0) {
                continue;
            }
            const auto packed = static_cast<std::uint16_t>((symbol << 3U) | length);
            for (auto index = huffman::reverse_bits(codes[symbol], length); index < table.size();
                 index += 1U << length) {
                table[index] = packed;
            }
        }
    }

    const unsigned total = out.literal_count + out.distance_count;
    unsigned i = 0;
    while (i < total) {
        const auto entry = table[reader.peek_bits(7)];
        reader.skip(entry & 7U);
        const unsigned symbol = entry >> 3U;
        if (symbol < 16) {
            out.lengths[i++] = static_cast<std::uint8_t>(symbol);
            continue;
        }
        std::uint8_t value = 0;
        unsigned repeat = 0;
        if (symbol == 16) {
            if (i == 0) {
                return HeaderCheck::InvalidPrecodeData;
            }
            value = out.lengths[i - 1];
            repeat = 3 + reader.read(2);
        } else if (symbol == 17) {
            repeat = 3 + reader.read(3);
        } else {
            repeat = 11 + reader.read(7);
        }
        if (i + repeat > total) {
            return HeaderCheck::InvalidPrecodeData;
        }
        std::fill_n(out.lengths.begin() + i, repeat, value);
        i += repeat;
    }

    // HDIST can describe 32 lengths but only 30 distance symbols exist.
    if (out.distance_count > max_distance_codes) {
        return HeaderCheck::InvalidDistanceCode;
    }
    if (const auto check = classify_code(out.distance(), strictness, HeaderCheck::InvalidDistanceCode,
                                         HeaderCheck::NonOptimalDistanceCode, true);
        check != HeaderCheck::Valid) {
        return check;
    }
    return classify_code(out.literal(), strictness, HeaderCheck::InvalidLiteralCode,
                         HeaderCheck::NonOptimalLiteralCode, false);
}

HeaderCheck check_dynamic_header(BitReader& reader, CodeLengths& out, Strictness strictness)
{
    try {
        const auto hlit = reader.read(5);
        if (hlit >= 30) {
            return HeaderCheck::InvalidPrecodeSize;
        }
        out.literal_count = 257 + hlit;
        out.distance_count = 1 + reader.read(5);
        const auto precode_count = 4 + reader.read(4);
        out.precode.fill(0);
        for (unsigned i = 0; i < precode_count; ++i) {
            out.precode[precode_order[i]] = static_cast<std::uint8_t>(reader.read(3));
        }
        switch (huffman::classify(std::span<const std::uint8_t>(out.precode))) {
        case CodeClass::Valid: break;
        case CodeClass::OverSubscribed: return HeaderCheck::InvalidPrecodeCode;
        case CodeClass::Inefficient:
        case CodeClass::Empty: return HeaderCheck::NonOptimalPrecodeCode;
        }
        return check_code_lengths(reader, out, strictness);
    } catch (const Error& error) {
        if (error.code() == ErrorCode::TruncatedInput) {
            return HeaderCheck::Truncated;
        }
        throw;
    }
}

DynamicCodes read_dynamic_header(BitReader& reader)
{
    const auto offset = reader.tell();
    CodeLengths lengths;
    const auto check = check_dynamic_header(reader, lengths, Strictness::Permissive);
    const auto message = std::string(to_string(check));
    switch (check) {
    case HeaderCheck::Valid: break;
    case HeaderCheck::Truncated: throw Error(ErrorCode::TruncatedInput, "dynamic block header", offset);
    case HeaderCheck::InvalidPrecodeSize: throw Error(ErrorCode::InvalidHlit, message, offset);
    case HeaderCheck::InvalidPrecodeCode:
        throw Error(ErrorCode::InvalidPrecode, message, offset, CodeClass::OverSubscribed);
    case HeaderCheck::NonOptimalPrecodeCode:
        throw Error(ErrorCode::InvalidPrecode, message, offset, CodeClass::Inefficient);
    case HeaderCheck::InvalidPrecodeData: throw Error(ErrorCode::InvalidPrecodeData, message, offset);
    case HeaderCheck::InvalidDistanceCode:
        throw Error(ErrorCode::InvalidDistanceCode, message, offset, CodeClass::OverSubscribed);
    case HeaderCheck::NonOptimalDistanceCode:
        throw Error(ErrorCode::InvalidDistanceCode, message, offset, CodeClass::Inefficient);
    case HeaderCheck::InvalidLiteralCode:
        throw Error(ErrorCode::InvalidLiteralCode, message, offset, CodeClass::OverSubscribed);
    case HeaderCheck::NonOptimalLiteralCode:
        throw Error(ErrorCode::InvalidLiteralCode, message, offset, CodeClass::Inefficient);
    default: throw Error(ErrorCode::InvalidArgument, message, offset);
    }
    DynamicCodes codes;
    codes.literal = HuffmanDecoder::build(lengths.literal(), true);
    codes.distance = HuffmanDecoder::build(lengths.distance(), true);
    codes.complete = huffman::classify(lengths.literal()) == CodeClass::Valid &&
                     huffman::classify(lengths.distance()) == CodeClass::Valid;
    return codes;
}

const HuffmanDecoder& fixed_literal_decoder()
{
    static const HuffmanDecoder decoder = [] {
        std::array<std::uint8_t, 288> lengths{};
        std::fill(lengths.begin(), lengths.begin() + 144, 8);
        std::fill(lengths.begin() + 144, lengths.begin() + 256, 9);
        std::fill(lengths.begin() + 256, lengths.begin() + 280, 7);
        std::fill(lengths.begin() + 280, lengths.end(), 8);
        return HuffmanDecoder::build(lengths);
    }();
    return decoder;
}

const HuffmanDecoder& fixed_distance_decoder()
{
    static const HuffmanDecoder decoder = [] {
        std::array<std::uint8_t, 32> lengths{};
        lengths.fill(5);
        return HuffmanDecoder::build(lengths);
    }();
    return decoder;
}

BlockDecoder BlockDecoder::with_unknown_window(const Options& options)
{
    BlockDecoder decoder(options);
    decoder.mode_ = Mode::Markers;
    decoder.markers_.storage = TrackedBuffer<std::uint16_t>(options.tracker);
    decoder.markers_.storage.resize(window_size + options.initial_capacity);
    for (std::size_t i = 0; i < window_size; ++i) {
        decoder.markers_.storage[i] = static_cast<std::uint16_t>(marker_base + i);
    }
    decoder.markers_.prefix = window_size;
    decoder.markers_.size = window_size;
    decoder.last_marker_end_ = window_size;
    if (options.statistics != nullptr) {
        options.statistics->marker_buffers.fetch_add(1, std::memory_order_relaxed);
    }
    return decoder;
}

BlockDecoder BlockDecoder::with_window(std::span<const std::uint8_t> window, const Options& options)
{
    if (window.size() > window_size) {
        window = window.last(window_size);
    }
    BlockDecoder decoder(options);
    decoder.mode_ = Mode::Bytes;
    decoder.bytes_.storage = TrackedBuffer<std::uint8_t>(options.tracker);
    decoder.bytes_.storage.resize(window.size() + options.initial_capacity);
    std::copy(window.begin(), window.end(), decoder.bytes_.storage.data());
    decoder.bytes_.prefix = window.size();
    decoder.bytes_.size = window.size();
    return decoder;
}

std::uint64_t BlockDecoder::size() const noexcept
{
    return marker_output_size() + (bytes_.size - bytes_.prefix);
}

void BlockDecoder::check_limit(std::size_t additional) const
{
    if (size() + additional > options_.max_output) {
        throw Error(ErrorCode::ChunkTooLarge,
                    "decoded chunk exceeds " + std::to_string(options_.max_output) + " bytes");
    }
}

template <typename Symbol>
void BlockDecoder::reserve(SymbolBuffer<Symbol>& buffer, std::size_t extra)
{
    if (buffer.size + extra <= buffer.storage.size()) {
        return;
    }
    check_limit(extra);
    auto capacity = std::max<std::size_t>(buffer.storage.size(), options_.initial_capacity);
    while (capacity < buffer.size + extra) {
        capacity *= 2;
    }
    buffer.storage.resize(capacity);
}

void BlockDecoder::switch_to_bytes()
{
    const auto history = std::min(window_size, markers_.size - last_marker_end_);
    bytes_.storage = TrackedBuffer<std::uint8_t>(options_.tracker);
    bytes_.storage.resize(history + options_.initial_capacity);
    const auto* source = markers_.storage.data() + markers_.size - history;
    for (std::size_t i = 0; i < history; ++i) {
        bytes_.storage[i] = static_cast<std::uint8_t>(source[i]);
    }
    bytes_.prefix = history;
    bytes_.size = history;
    bytes_.floor = 0;
    mode_ = Mode::Bytes;
}

void BlockDecoder::reset_history()
{
    if (mode_ == Mode::Markers) {
        last_marker_end_ = markers_.size;
        switch_to_bytes();
        return;
    }
    bytes_.floor = bytes_.size;
}

template <typename Symbol, bool TrackMarkers>
BlockDecoder::BlockEnd BlockDecoder::decode_huffman(BitReader& reader, const HuffmanDecoder& literal,
                                                    const HuffmanDecoder& distance, SymbolBuffer<Symbol>& out)
{
    std::size_t pos = out.size;
    Symbol* data = out.storage.data();
    std::size_t capacity = out.storage.size();

    while (true) {
        if (pos + max_match_length > capacity) {
            out.size = pos;
            reserve(out, max_match_length);
            data = out.storage.data();
            capacity = out.storage.size();
        }

        const auto symbol = literal.decode(reader);
        if (symbol < 256) {
            data[pos++] = static_cast<Symbol>(symbol);
        } else if (symbol == end_of_block) {
            out.size = pos;
            return BlockEnd::EndOfBlock;
        } else {
            const unsigned index = symbol - 257U;
            if (index >= length_base.size()) {
                throw Error(ErrorCode::InvalidSymbol, "invalid length symbol " + std::to_string(symbol),
                            reader.tell());
            }
            const std::size_t length = length_base[index] + reader.read(length_extra[index]);
            const auto distance_symbol = distance.decode(reader);
            if (distance_symbol >= max_distance_codes) {
                throw Error(ErrorCode::InvalidSymbol, "invalid distance symbol " + std::to_string(distance_symbol),
                            reader.tell());
            }
            const std::size_t dist = distance_base[distance_symbol] + reader.read(distance_extra[distance_symbol]);
            if (dist > pos - out.floor) {
                throw Error(ErrorCode::DistanceTooFar,
                            "distance " + std::to_string(dist) + " reaches before the available history",
                            reader.tell());
            }
            Symbol* dst = data + pos;
            const Symbol* src = dst - dist;
            if constexpr (TrackMarkers) {
                for (std::size_t i = 0; i < length; ++i) {
                    const auto value = src[i];
                    dst[i] = value;
                    if (value >= marker_base) {
                        last_marker_end_ = pos + i + 1;
                    }
                }
            } else {
                if (dist >= length) {
                    std::memcpy(dst, src, length * sizeof(Symbol));
                } else {
                    for (std::size_t i = 0; i < length; ++i) {
                        dst[i] = src[i];
                    }
                }
            }
            pos += length;
        }

        if constexpr (TrackMarkers) {
            if (pos - last_marker_end_ >= window_size) {
                out.size = pos;
                return BlockEnd::SwitchToBytes;
            }
        }
    }
}

void BlockDecoder::decode_stored(BitReader& reader)
{
    const auto length = read_stored_length(reader);
    if (options_.statistics != nullptr) {
        options_.statistics->stored_blocks.fetch_add(1, std::memory_order_relaxed);
    }
    if (mode_ == Mode::Bytes) {
        reserve(bytes_, length);
        reader.read_bytes({bytes_.storage.data() + bytes_.size, length});
        bytes_.size += length;
        return;
    }
    std::vector<std::uint8_t> raw(length);
    reader.read_bytes(raw);
    reserve(markers_, length);
    std::copy(raw.begin(), raw.end(), markers_.storage.data() + markers_.size);
    markers_.size += length;
    if (markers_.size - last_marker_end_ >= window_size) {
        switch_to_bytes();
        if (options_.statistics != nullptr) {
            options_.statistics->mode_switches.fetch_add(1, std::memory_order_relaxed);
        }
    }
}

void BlockDecoder::decode_block(BitReader& reader, const BlockHeader& header, const DynamicCodes* dynamic_codes)
{
    if (header.type == BlockType::Stored) {
        decode_stored(reader);
        return;
    }

    DynamicCodes dynamic;
    const HuffmanDecoder* literal = &fixed_literal_decoder();
    const HuffmanDecoder* distance = &fixed_distance_decoder();
    if (header.type == BlockType::Dynamic) {
        if (dynamic_codes == nullptr) {
            dynamic = read_dynamic_header(reader);
            dynamic_codes = &dynamic;
        }
        literal = &dynamic_codes->literal;
        distance = &dynamic_codes->distance;
    }

    if (mode_ == Mode::Markers) {
        if (decode_huffman<std::uint16_t, true>(reader, *literal, *distance, markers_) == BlockEnd::EndOfBlock) {
            return;
        }
        switch_to_bytes();
        if (options_.statistics != nullptr) {
            options_.statistics->mode_switches.fetch_add(1, std::memory_order_relaxed);
        }
    }
    decode_huffman<std::uint8_t, false>(reader, *literal, *distance, bytes_);
}

void replace_markers(std::span<const std::uint16_t> symbols, std::span<const std::uint8_t> window,
                     std::span<std::uint8_t> out)
{
    if (out.size() < symbols.size()) {
        throw Error(ErrorCode::InvalidArgument, "output span shorter than the marker buffer");
    }
    if (window.size() > window_size) {
        window = window.last(window_size);
    }
    const auto missing = window_size - window.size();
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const auto value = symbols[i];
        if (value < 256) {
            out[i] = static_cast<std::uint8_t>(value);
            continue;
        }
        if (value < marker_base) {
            throw Error(ErrorCode::CorruptMarkerBuffer,
                        "symbol " + std::to_string(value) + " at index " + std::to_string(i) +
                            " is neither a byte nor a marker");
        }
        const std::size_t offset = value - marker_base;
        if (offset < missing) {
            throw Error(ErrorCode::CorruptMarkerBuffer,
                        "marker at index " + std::to_string(i) + " refers before the start of the window");
        }
        out[i] = window[offset - missing];
    }
}

std::vector<std::uint8_t> trailing_window(std::span<const std::uint8_t> previous, std::span<const std::uint8_t> data)
{
    if (data.size() >= window_size) {
        const auto tail = data.last(window_size);
        return {tail.begin(), tail.end()};
    }
    const auto from_previous = std::min(previous.size(), window_size - data.size());
    std::vector<std::uint8_t> window;
    window.reserve(from_previous + data.size());
    window.insert(window.end(), previous.end() - static_cast<std::ptrdiff_t>(from_previous), previous.end());
    window.insert(window.end(), data.begin(), data.end());
    return window;
}

}  // namespace ragz::deflate
