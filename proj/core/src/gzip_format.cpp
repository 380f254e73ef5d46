#include "ragz/gzip_format.hpp"

#include "ragz/error.hpp"

namespace ragz::gzip {

std::optional<std::uint16_t> GzipHeader::bgzf_block_size() const
{
    for (const auto& field : extra) {
        if (field.id[0] == 'B' && field.id[1] == 'C' && field.payload.size() == 2) {
            return static_cast<std::uint16_t>(field.payload[0] | (field.payload[1] << 8U));
        }
    }
    return std::nullopt;
}

namespace {

std::uint8_t read_u8(BitReader& reader) { return static_cast<std::uint8_t>(reader.read(8)); }

std::uint16_t read_u16(BitReader& reader) { return static_cast<std::uint16_t>(reader.read(16)); }

std::uint32_t read_u32(BitReader& reader) { return reader.read(32); }

std::string read_zero_terminated(BitReader& reader)
{
    std::string text;
    while (true) {
        const auto c = read_u8(reader);
        if (c == 0) {
            return text;
        }
        text.push_back(static_cast<char>(c));
    }
}

}  // namespace

GzipHeader parse_gzip_header(BitReader& reader)
{
    const auto start = reader.tell();
    if (start % 8 != 0) {
        throw Error(ErrorCode::InvalidArgument, "gzip header must start byte-aligned", start);
    }
    if (reader.remaining_bits() < 10 * 8) {
        throw Error(ErrorCode::TruncatedInput, "gzip header shorter than 10 bytes", start);
    }

    GzipHeader header;
    const auto id1 = read_u8(reader);
    const auto id2 = read_u8(reader);
    if (id1 != magic1 || id2 != magic2) {
        throw Error(ErrorCode::NotGzip, "bad magic bytes", start);
    }
    header.method = read_u8(reader);
    if (header.method != method_deflate) {
        throw Error(ErrorCode::NotGzip, "unsupported compression method " + std::to_string(header.method), start);
    }
    header.flags = read_u8(reader);
    if ((header.flags & 0xE0U) != 0) {
        throw Error(ErrorCode::NotGzip, "reserved header flag bits set", start);
    }
    header.mtime = read_u32(reader);
    header.extra_flags = read_u8(reader);
    header.os = read_u8(reader);

    if ((header.flags & flags::extra) != 0) {
        const auto extra_length = read_u16(reader);
        std::size_t consumed = 0;
        while (consumed + 4 <= extra_length) {
            ExtraField field;
            field.id[0] = static_cast<char>(read_u8(reader));
            field.id[1] = static_cast<char>(read_u8(reader));
            const auto length = read_u16(reader);
            consumed += 4;
            if (consumed + length > extra_length) {
                throw Error(ErrorCode::NotGzip, "extra subfield overruns the extra field", reader.tell());
            }
            field.payload.resize(length);
            reader.read_bytes(field.payload);
            consumed += length;
            header.extra.push_back(std::move(field));
        }
        // Tolerate a malformed tail that is too short for a subfield header.
        for (; consumed < extra_length; ++consumed) {
            read_u8(reader);
        }
    }
    if ((header.flags & flags::name) != 0) {
        header.name = read_zero_terminated(reader);
    }
    if ((header.flags & flags::comment) != 0) {
        header.comment = read_zero_terminated(reader);
    }
    if ((header.flags & flags::header_crc) != 0) {
        header.header_crc = read_u16(reader);
    }
    header.size = static_cast<std::size_t>((reader.tell() - start) / 8);
    return header;
}

GzipFooter parse_gzip_footer(BitReader& reader)
{
    reader.align_to_byte();
    if (reader.remaining_bits() < 8 * 8) {
        throw Error(ErrorCode::TruncatedInput, "gzip footer shorter than 8 bytes", reader.tell());
    }
    GzipFooter footer;
    footer.crc32 = read_u32(reader);
    footer.isize = read_u32(reader);
    return footer;
}

AfterMember classify_after_member(BitReader& reader)
{
    if (reader.eof()) {
        return AfterMember::EndOfFile;
    }
    const auto position = reader.tell();
    const auto peeked = reader.peek(16);
    if (peeked.available == 16 && (peeked.value & 0xFFU) == magic1 && (peeked.value >> 8U) == magic2) {
        return AfterMember::NextMember;
    }
    while (!reader.eof()) {
        const auto chunk = reader.peek(32);
        if (chunk.value != 0) {
            throw Error(ErrorCode::TrailingGarbage, "unexpected bytes after gzip member", position);
        }
        reader.skip(chunk.available);
    }
    reader.seek_bits(position);
    return AfterMember::EndOfFile;
}

}  // namespace ragz::gzip
