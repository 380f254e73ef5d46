#include "ragz/error.hpp"
#include "ragz/gzip_index.hpp"

#include "corpus.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace ragz;
using ragz::support::Bytes;

namespace {

SeekPoint point(std::uint64_t bit, std::uint64_t byte)
{
    return {bit, byte, support::random_bytes(std::min<std::uint64_t>(byte, 32768), bit)};
}

GzipIndex three_points()
{
    GzipIndex index;
    index.insert(point(80, 0));
    index.insert(point(1000, 100));
    index.insert(point(5000, 40000));
    index.finalize(50000, 9000);
    return index;
}

ErrorCode load_error(const std::vector<std::uint8_t>& bytes)
{
    try {
        GzipIndex::deserialize(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "index loaded";
    return ErrorCode::InvalidArgument;
}

void put_u64(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint64_t value)
{
    for (std::size_t i = 0; i < 8; ++i) {
        bytes[at + i] = static_cast<std::uint8_t>(value >> (8U * i));
    }
}

constexpr std::size_t header_bytes = 32;

}  // namespace

TEST(GzipIndex, Locate)
{
    GzipIndex index;
    index.insert({80, 0, {}});
    index.insert({1000, 100, point(1000, 100).window});
    index.insert({5000, 900, point(5000, 900).window});
    EXPECT_EQ(index.locate(0), 0U);
    EXPECT_EQ(index.locate(99), 0U);
    EXPECT_EQ(index.locate(100), 1U);
    EXPECT_EQ(index.locate(899), 1U);
    EXPECT_EQ(index.locate(900), 2U);
    EXPECT_EQ(index.locate(1U << 30U), 2U);
    index.finalize(1000, 6000);
    EXPECT_EQ(index.locate(999), 2U);
    EXPECT_THROW(index.locate(1000), Error);
}

TEST(GzipIndex, EmptyIndexLocate)
{
    GzipIndex index;
    try {
        index.locate(0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
    }
}

TEST(GzipIndex, InsertIsIdempotent)
{
    GzipIndex index;
    index.insert(point(80, 0));
    index.insert(point(1000, 100));
    index.insert(point(1000, 100));
    EXPECT_EQ(index.size(), 2U);
}

TEST(GzipIndex, InsertRejectsDisorder)
{
    GzipIndex index;
    index.insert(point(80, 0));
    index.insert(point(1000, 100));
    for (const auto& bad : {point(1000, 101), point(2000, 50), point(500, 200), point(2000, 100)}) {
        try {
            index.insert(bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::IndexCorruption);
        }
    }
    EXPECT_EQ(index.size(), 2U);
}

TEST(GzipIndex, RoundTrip)
{
    const auto index = three_points();
    const auto bytes = index.serialize();
    EXPECT_EQ(GzipIndex::deserialize(bytes), index);
    std::stringstream stream;
    index.write(stream);
    EXPECT_EQ(GzipIndex::read(stream), index);
}

TEST(GzipIndex, SerializeRequiresFinalized)
{
    GzipIndex index;
    index.insert(point(80, 0));
    EXPECT_THROW(index.serialize(), Error);
}

TEST(GzipIndex, BadMagicVersionFlags)
{
    const auto good = three_points().serialize();
    auto magic = good;
    magic[0] = 'X';
    EXPECT_EQ(load_error(magic), ErrorCode::IndexFormat);
    auto version = good;
    version[4] = 9;
    EXPECT_EQ(load_error(version), ErrorCode::IndexFormat);
    auto flags = good;
    flags[6] = 0;
    EXPECT_EQ(load_error(flags), ErrorCode::IndexFormat);
}

TEST(GzipIndex, EveryTruncationFails)
{
    const auto good = three_points().serialize();
    for (std::size_t n = 0; n < good.size(); n += (n < 200 ? 1 : 997)) {
        const std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(n));
        EXPECT_EQ(load_error(cut), ErrorCode::IndexFormat) << n;
    }
}

TEST(GzipIndex, Corruption)
{
    const auto good = three_points().serialize();
    const std::size_t second = header_bytes + 20;  // first point has no window

    auto reordered = good;
    put_u64(reordered, second, 50);
    EXPECT_EQ(load_error(reordered), ErrorCode::IndexCorruption);

    auto beyond = good;
    put_u64(beyond, 24, 4000);  // total bits before the last point
    EXPECT_EQ(load_error(beyond), ErrorCode::IndexCorruption);

    auto short_total = good;
    put_u64(short_total, 16, 30000);
    EXPECT_EQ(load_error(short_total), ErrorCode::IndexCorruption);

    auto window_length = good;
    window_length[second + 16] = 99;
    EXPECT_EQ(load_error(window_length), ErrorCode::IndexCorruption);

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_EQ(load_error(trailing), ErrorCode::IndexCorruption);

    auto not_at_zero = good;
    put_u64(not_at_zero, header_bytes + 8, 1);
    EXPECT_EQ(load_error(not_at_zero), ErrorCode::IndexCorruption);

    auto huge_count = good;
    put_u64(huge_count, 8, std::uint64_t{1} << 60U);
    EXPECT_EQ(load_error(huge_count), ErrorCode::IndexFormat);
}

TEST(GzipIndexProperty, RandomIndexesRoundTrip)
{
    std::mt19937_64 rng(11);
    for (int round = 0; round < 30; ++round) {
        GzipIndex index;
        std::uint64_t bit = 80;
        std::uint64_t byte = 0;
        const auto count = 1 + rng() % 20;
        for (std::uint64_t i = 0; i < count; ++i) {
            index.insert(point(bit, byte));
            bit += 1 + rng() % 100000;
            byte += 1 + rng() % 70000;
        }
        index.finalize(byte, bit);
        ASSERT_EQ(GzipIndex::deserialize(index.serialize()), index);
        std::uniform_int_distribution<std::uint64_t> offsets(0, byte - 1);
        for (int probe = 0; probe < 50; ++probe) {
            const auto offset = offsets(rng);
            const auto i = index.locate(offset);
            EXPECT_LE(index[i].decompressed_offset, offset);
            if (i + 1 < index.size()) {
                EXPECT_GT(index[i + 1].decompressed_offset, offset);
            }
        }
    }
}
