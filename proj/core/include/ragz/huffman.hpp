#pragma once

#include "ragz/bit_reader.hpp"
#include "ragz/error.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ragz::huffman {

inline constexpr unsigned max_code_length = 15;

/// count[l] = number of symbols with code length l; l = 0 means unused.
struct CodeLengthHistogram {
    std::array<std::uint32_t, max_code_length + 1> count{};

    static CodeLengthHistogram from_lengths(std::span<const std::uint8_t> lengths);

    std::uint32_t coded_symbols() const noexcept;

    /// Kraft sum scaled by 2^15, so a complete code sums to exactly 1 << 15.
    std::uint64_t kraft_fixed_point() const noexcept;
};

inline constexpr std::uint64_t kraft_one = std::uint64_t{1} << max_code_length;

CodeClass classify(const CodeLengthHistogram& histogram) noexcept;
CodeClass classify(std::span<const std::uint8_t> lengths) noexcept;

/// Canonical code words (MSB-first values) for the given code lengths; unused
/// symbols get 0. Shorter lengths come first, ties broken by symbol order.
std::vector<std::uint16_t> canonical_codes(std::span<const std::uint8_t> lengths);

/// Single-level table decoder indexed by the next max_length stream bits.
/// Immutable after construction.
class HuffmanDecoder {
public:
    struct Entry {
        std::uint16_t symbol;
        std::uint8_t length;  // 0 marks a bit pattern that is not a code
    };

    HuffmanDecoder() = default;

    /// Throws Error{OverSubscribedCode|IncompleteCode|EmptyCode} unless the
    /// code is complete. With `permissive`, an empty code and a code made of a
    /// single one-bit symbol are also accepted (encoders emit these for
    /// degenerate distance alphabets).
    static HuffmanDecoder build(std::span<const std::uint8_t> lengths, bool permissive = false);

    unsigned max_length() const noexcept { return max_length_; }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    bool empty() const noexcept { return table_.empty(); }

    Entry lookup(std::uint32_t bits) const noexcept
    {
        const auto packed = table_[bits & table_mask_];
        return {static_cast<std::uint16_t>(packed >> 8U), static_cast<std::uint8_t>(packed & 0xFFU)};
    }

    /// Decodes one symbol, consuming exactly its code length.
    std::uint16_t decode(BitReader& reader) const
    {
        if (table_.empty()) {
            throw Error(ErrorCode::InvalidSymbol, "symbol read with an empty code", reader.tell());
        }
        const auto bits = reader.peek_bits(max_length_);
        const auto entry = lookup(bits);
        if (entry.length == 0) {
            const auto available = reader.peek(max_length_).available;
            if (available < max_length_) {
                throw Error(ErrorCode::TruncatedInput, "stream ends inside a Huffman code", reader.tell());
            }
            throw Error(ErrorCode::InvalidSymbol, "bit pattern is not a code word", reader.tell());
        }
        reader.skip(entry.length);
        return entry.symbol;
    }

private:
    std::vector<std::uint32_t> table_;
    std::uint32_t table_mask_ = 0;
    unsigned max_length_ = 0;
    std::size_t alphabet_size_ = 0;
};

/// Reverses the lowest `length` bits of `code`.
constexpr std::uint32_t reverse_bits(std::uint32_t code, unsigned length) noexcept
{
    std::uint32_t result = 0;
    for (unsigned i = 0; i < length; ++i) {
        result = (result << 1U) | ((code >> i) & 1U);
    }
    return result;
}

}  // namespace ragz::huffman
