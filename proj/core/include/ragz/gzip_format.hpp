#pragma once

#include "ragz/bit_reader.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ragz::gzip {

inline constexpr std::uint8_t magic1 = 0x1F;
inline constexpr std::uint8_t magic2 = 0x8B;
inline constexpr std::uint8_t method_deflate = 8;

namespace flags {
inline constexpr std::uint8_t text = 0x01;
inline constexpr std::uint8_t header_crc = 0x02;
inline constexpr std::uint8_t extra = 0x04;
inline constexpr std::uint8_t name = 0x08;
inline constexpr std::uint8_t comment = 0x10;
}  // namespace flags

struct ExtraField {
    std::array<char, 2> id{};
    std::vector<std::uint8_t> payload;
};

struct GzipHeader {
    std::uint8_t method = method_deflate;
    std::uint8_t flags = 0;
    std::uint32_t mtime = 0;
    std::uint8_t extra_flags = 0;
    std::uint8_t os = 0;
    std::vector<ExtraField> extra;
    std::optional<std::string> name;
    std::optional<std::string> comment;
    std::optional<std::uint16_t> header_crc;
    /// Header length in bytes.
    std::size_t size = 0;

    /// BGZF "BC" subfield: total member size minus one.
    std::optional<std::uint16_t> bgzf_block_size() const;
};

struct GzipFooter {
    std::uint32_t crc32 = 0;
    std::uint32_t isize = 0;
};

/// Reads a gzip member header; the reader must be byte-aligned and is left at
/// the first Deflate block.
GzipHeader parse_gzip_header(BitReader& reader);

/// Skips the padding after the final Deflate block and reads CRC32 and ISIZE.
GzipFooter parse_gzip_footer(BitReader& reader);

enum class AfterMember { NextMember, EndOfFile };

/// Decides what follows a member footer: another member header, or the end of
/// the file (optionally followed by zero padding). Anything else is an error.
AfterMember classify_after_member(BitReader& reader);

}  // namespace ragz::gzip
