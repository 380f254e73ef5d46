#include "corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string_view>

namespace ragz::support {

namespace {

void put_le(Bytes& out, std::uint64_t value, unsigned bytes)
{
    for (unsigned i = 0; i < bytes; ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8U * i)));
    }
}

const Bytes gzip_header = {0x1F, 0x8B, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x03};

void append_footer(Bytes& out, const Bytes& original)
{
    put_le(out, crc32_of(original), 4);
    put_le(out, original.size() & 0xFFFFFFFFU, 4);
}

Bytes deflate_with(const Bytes& data, int level, int window_bits, int strategy, std::size_t flush_every)
{
    z_stream z{};
    if (deflateInit2(&z, level, Z_DEFLATED, window_bits, 9, strategy) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    Bytes out(deflateBound(&z, data.size()) + 1024 + (flush_every ? data.size() / flush_every * 16 : 0));
    z.next_out = out.data();
    z.avail_out = static_cast<uInt>(out.size());
    std::size_t offset = 0;
    const std::size_t step = flush_every ? flush_every : std::max<std::size_t>(data.size(), 1);
    do {
        const auto n = std::min(step, data.size() - offset);
        z.next_in = const_cast<Bytef*>(data.data() + offset);
        z.avail_in = static_cast<uInt>(n);
        offset += n;
        const bool last = offset >= data.size();
        const auto rc = deflate(&z, last ? Z_FINISH : Z_FULL_FLUSH);
        if (rc != (last ? Z_STREAM_END : Z_OK)) {
            throw std::runtime_error("deflate failed");
        }
        if (last) {
            break;
        }
    } while (true);
    out.resize(z.total_out);
    deflateEnd(&z);
    return out;
}

}  // namespace

std::uint32_t crc32_of(const Bytes& data)
{
    return static_cast<std::uint32_t>(crc32_z(0, data.data(), data.size()));
}

Bytes random_bytes(std::size_t size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out(size);
    std::size_t i = 0;
    for (; i + 8 <= size; i += 8) {
        const auto v = rng();
        for (unsigned b = 0; b < 8; ++b) {
            out[i + b] = static_cast<std::uint8_t>(v >> (8U * b));
        }
    }
    for (auto v = rng(); i < size; ++i, v >>= 8U) {
        out[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

Bytes base64_text(std::size_t size, std::uint64_t seed)
{
    static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::mt19937_64 rng(seed);
    Bytes out;
    out.reserve(size);
    std::uint64_t bits = 0;
    unsigned left = 0;
    while (out.size() < size) {
        if (out.size() % 77 == 76) {
            out.push_back('\n');
            continue;
        }
        if (left < 6) {
            bits = rng();
            left = 64;
        }
        out.push_back(static_cast<std::uint8_t>(alphabet[bits & 63U]));
        bits >>= 6U;
        left -= 6;
    }
    return out;
}

Bytes repetitive_text(std::size_t size, std::uint64_t seed)
{
    static constexpr std::string_view lines[] = {
        "the quick brown fox jumps over the lazy dog\n",
        "INFO  request handled in 12 ms status=200 path=/index.html\n",
        "WARN  cache miss for key user:1000 falling back to store\n",
        "lorem ipsum dolor sit amet, consectetur adipiscing elit\n",
    };
    std::mt19937_64 rng(seed);
    Bytes out;
    out.reserve(size + 64);
    while (out.size() < size) {
        const auto& line = lines[rng() % 4];
        out.insert(out.end(), line.begin(), line.end());
        if (rng() % 16 == 0) {
            const auto digits = std::to_string(rng() % 100000);
            out.insert(out.end(), digits.begin(), digits.end());
            out.push_back('\n');
        }
    }
    out.resize(size);
    return out;
}

Bytes tarball_like(std::size_t size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out;
    out.reserve(size + 1024 * 1024);
    unsigned file = 0;
    while (out.size() < size) {
        Bytes header(512, 0);
        const auto name = "dir/file" + std::to_string(file++) + ".dat";
        std::copy(name.begin(), name.end(), header.begin());
        std::fill(header.begin() + 100, header.begin() + 107, '0');
        out.insert(out.end(), header.begin(), header.end());

        const std::size_t length = 1000 + rng() % (256 * 1024);
        Bytes body;
        switch (rng() % 4) {
        case 0: body = random_bytes(length, rng()); break;
        case 1: body = base64_text(length, rng()); break;
        case 2: body = repetitive_text(length, rng()); break;
        default: body = zeros(length); break;
        }
        out.insert(out.end(), body.begin(), body.end());
        out.resize((out.size() + 511) / 512 * 512, 0);
    }
    out.resize(size);
    return out;
}

Bytes zeros(std::size_t size) { return Bytes(size, 0); }

Bytes gzip_compress(const Bytes& data, int level, int strategy, std::size_t flush_every)
{
    return deflate_with(data, level, 31, strategy, flush_every);
}

Bytes raw_deflate(const Bytes& data, int level) { return deflate_with(data, level, -15, Z_DEFAULT_STRATEGY, 0); }

Bytes gzip_wrap(const Bytes& deflate_stream, const Bytes& original)
{
    Bytes out = gzip_header;
    out.insert(out.end(), deflate_stream.begin(), deflate_stream.end());
    append_footer(out, original);
    return out;
}

Bytes bgzf_compress(const Bytes& data, int level)
{
    constexpr std::size_t block_input = 65280;
    Bytes out;
    const auto member = [&](const Bytes& part) {
        const auto body = raw_deflate(part, level);
        const auto bsize = 18 + body.size() + 8 - 1;
        if (bsize > 0xFFFF) {
            throw std::runtime_error("BGZF member too large");
        }
        const Bytes header = {0x1F, 0x8B, 0x08, 0x04, 0, 0, 0, 0, 0, 0xFF, 6, 0, 'B', 'C', 2, 0};
        out.insert(out.end(), header.begin(), header.end());
        put_le(out, bsize, 2);
        out.insert(out.end(), body.begin(), body.end());
        append_footer(out, part);
    };
    for (std::size_t offset = 0; offset < data.size(); offset += block_input) {
        const auto end = std::min(data.size(), offset + block_input);
        member(Bytes(data.begin() + static_cast<std::ptrdiff_t>(offset), data.begin() + static_cast<std::ptrdiff_t>(end)));
    }
    // The conventional end-of-file marker is an empty member.
    member({});
    return out;
}

std::vector<std::uint32_t> canonical_code_words(const std::vector<std::uint8_t>& lengths)
{
    std::array<std::uint32_t, 16> count{};
    for (const auto l : lengths) {
        ++count[l];
    }
    count[0] = 0;
    std::array<std::uint32_t, 16> next{};
    std::uint32_t code = 0;
    for (unsigned bits = 1; bits < 16; ++bits) {
        code = (code + count[bits - 1]) << 1U;
        next[bits] = code;
    }
    std::vector<std::uint32_t> words(lengths.size(), 0);
    for (std::size_t s = 0; s < lengths.size(); ++s) {
        if (lengths[s] != 0) {
            words[s] = next[lengths[s]]++;
        }
    }
    return words;
}

void BitWriter::put(std::uint32_t value, unsigned bits)
{
    for (unsigned i = 0; i < bits; ++i) {
        if (used == 0) {
            bytes.push_back(0);
        }
        bytes.back() |= static_cast<std::uint8_t>(((value >> i) & 1U) << used);
        used = (used + 1) % 8;
    }
}

void BitWriter::put_code(std::uint32_t code, unsigned length)
{
    for (unsigned i = length; i-- > 0;) {
        put((code >> i) & 1U, 1);
    }
}

void BitWriter::align() { used = 0; }

Bytes single_dynamic_block_gzip(const Bytes& data)
{
    // Literal/length code over 258 symbols: 254 literals of 8 bits and four
    // 9-bit symbols (literals 254, 255, end of block and length 257).
    std::vector<std::uint8_t> literal(258, 8);
    literal[254] = literal[255] = literal[256] = literal[257] = 9;
    const auto literal_codes = canonical_code_words(literal);
    // Precode: symbol 8 -> 1 bit, symbols 1 and 9 -> 2 bits.
    std::vector<std::uint8_t> precode(19, 0);
    precode[8] = 1;
    precode[1] = 2;
    precode[9] = 2;
    const auto precode_codes = canonical_code_words(precode);
    static constexpr std::array<std::uint8_t, 19> order = {16, 17, 18, 0, 8, 7, 9, 6, 10, 5,
                                                           11, 4, 12, 3, 13, 2, 14, 1, 15};

    BitWriter w;
    w.bytes = gzip_header;
    w.put(1, 1);
    w.put(2, 2);
    w.put(258 - 257, 5);
    w.put(2 - 1, 5);
    w.put(18 - 4, 4);
    for (unsigned i = 0; i < 18; ++i) {
        w.put(precode[order[i]], 3);
    }
    for (const auto l : literal) {
        w.put_code(precode_codes[l], precode[l]);
    }
    for (int i = 0; i < 2; ++i) {
        w.put_code(precode_codes[1], precode[1]);
    }
    for (const auto byte : data) {
        w.put_code(literal_codes[byte], literal[byte]);
    }
    w.put_code(literal_codes[256], literal[256]);
    w.align();
    append_footer(w.bytes, data);
    return w.bytes;
}

Bytes stored_blocks_gzip(const Bytes& data, std::size_t block_size)
{
    if (block_size == 0 || block_size > 0xFFFF) {
        throw std::invalid_argument("stored block size out of range");
    }
    BitWriter w;
    w.bytes = gzip_header;
    const auto block = [&](std::size_t offset, std::size_t length, bool final) {
        w.put(final ? 1 : 0, 1);
        w.put(0, 2);
        w.align();
        put_le(w.bytes, length, 2);
        put_le(w.bytes, ~length & 0xFFFFU, 2);
        w.bytes.insert(w.bytes.end(), data.begin() + static_cast<std::ptrdiff_t>(offset),
                       data.begin() + static_cast<std::ptrdiff_t>(offset + length));
    };
    for (std::size_t offset = 0; offset < data.size(); offset += block_size) {
        block(offset, std::min(block_size, data.size() - offset), false);
    }
    block(data.size(), 0, true);
    append_footer(w.bytes, data);
    return w.bytes;
}

}  // namespace ragz::support
