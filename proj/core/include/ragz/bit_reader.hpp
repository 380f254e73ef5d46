#pragma once

#include "ragz/error.hpp"
#include "ragz/shared_source.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <vector>

namespace ragz {

/// LSB-first bit reader as used by Deflate. Each worker constructs its own
/// instance; the underlying source is shared.
class BitReader {
public:
    static constexpr std::size_t segment_size = 1U << 20U;
    static constexpr unsigned max_read_bits = 32;

    struct Peeked {
        std::uint32_t value;
        /// Number of the requested bits actually backed by data.
        unsigned available;
    };

    explicit BitReader(std::shared_ptr<const SharedSource> source);
    /// Non-owning view; `bytes` must outlive the reader.
    explicit BitReader(std::span<const std::uint8_t> bytes);

    std::uint64_t tell() const noexcept { return (data_offset_ + next_byte_) * 8U - nbits_; }
    std::uint64_t size_bits() const noexcept { return size_bytes_ * 8U; }
    std::uint64_t remaining_bits() const noexcept { return size_bits() - tell(); }
    bool eof() const noexcept { return tell() >= size_bits(); }

    std::uint32_t read(unsigned n)
    {
        if (n == 0) {
            return 0;
        }
        if (nbits_ < n) {
            refill();
            if (nbits_ < n) {
                throw Error(ErrorCode::TruncatedInput, "wanted " + std::to_string(n) + " bits", tell());
            }
        }
        const auto value = static_cast<std::uint32_t>(bits_ & mask(n));
        consume(n);
        return value;
    }

    Peeked peek(unsigned n)
    {
        const auto value = peek_bits(n);
        return {value, nbits_ < n ? nbits_ : n};
    }

    /// Next `n` bits without consuming them; bits past the end read as zero.
    std::uint32_t peek_bits(unsigned n)
    {
        if (nbits_ < n) {
            refill();
        }
        return static_cast<std::uint32_t>(bits_ & mask(n));
    }

    /// Consumes `n` bits that were just peeked.
    void skip(unsigned n)
    {
        if (nbits_ < n) {
            refill();
            if (nbits_ < n) {
                throw Error(ErrorCode::TruncatedInput, "wanted " + std::to_string(n) + " bits", tell());
            }
        }
        consume(n);
    }

    void seek_bits(std::uint64_t offset);
    void align_to_byte() { consume_checked(nbits_ % 8U); }

    /// Copies whole bytes; the reader must be byte-aligned.
    void read_bytes(std::span<std::uint8_t> out);

private:
    static constexpr std::uint64_t mask(unsigned n) noexcept
    {
        return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1U;
    }

    void consume(unsigned n) noexcept
    {
        bits_ = n >= 64 ? 0 : bits_ >> n;
        nbits_ -= n;
    }

    void consume_checked(unsigned n)
    {
        if (n > nbits_) {
            skip(n);
        } else {
            consume(n);
        }
    }

    void refill()
    {
        if (next_byte_ + 8U <= data_.size()) {
            std::uint64_t word = 0;
            std::memcpy(&word, data_.data() + next_byte_, sizeof(word));
            if constexpr (std::endian::native == std::endian::big) {
                word = byteswap64(word);
            }
            bits_ |= word << nbits_;
            const unsigned count = (63U - nbits_) / 8U;
            next_byte_ += count;
            nbits_ += count * 8U;
            bits_ &= mask(nbits_);
            return;
        }
        refill_slow();
    }

    void refill_slow();
    bool load_next_segment();
    void load_segment(std::uint64_t byte_offset);

    static constexpr std::uint64_t byteswap64(std::uint64_t v) noexcept
    {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) {
            r = (r << 8U) | (v & 0xFFU);
            v >>= 8U;
        }
        return r;
    }

    std::shared_ptr<const SharedSource> source_;
    std::vector<std::uint8_t> segment_;
    std::span<const std::uint8_t> data_;
    std::uint64_t data_offset_ = 0;
    std::size_t next_byte_ = 0;
    std::uint64_t size_bytes_ = 0;
    std::uint64_t bits_ = 0;
    unsigned nbits_ = 0;
};

}  // namespace ragz
