#include "ragz/chunk_fetcher.hpp"
#include "ragz/error.hpp"

#include "corpus.hpp"
#include "zlib_oracle.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <random>

using namespace ragz;
using ragz::support::Bytes;

namespace {

std::shared_ptr<const SharedSource> source_of(const Bytes& bytes) { return std::make_shared<MemorySource>(bytes); }

FetcherOptions small_chunks(std::size_t parallelism, std::uint64_t chunk_size = 64 * 1024)
{
    FetcherOptions options;
    options.parallelism = parallelism;
    options.chunk_size = chunk_size;
    return options;
}

Bytes read_sequential(ChunkFetcher& fetcher, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out;
    Bytes buffer(1U << 20U);
    while (true) {
        const auto want = 1 + rng() % buffer.size();
        const auto n = fetcher.read(out.size(), std::span(buffer).first(want));
        out.insert(out.end(), buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n));
        if (n < want) {
            return out;
        }
    }
}

ErrorCode read_error(const Bytes& gz, FetcherOptions options = small_chunks(2))
{
    ChunkFetcher fetcher(source_of(gz), options);
    try {
        read_sequential(fetcher, 1);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "read succeeded";
    return ErrorCode::InvalidArgument;
}

Bytes concat(std::initializer_list<Bytes> parts)
{
    Bytes out;
    for (const auto& p : parts) {
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

}  // namespace

TEST(ChunkFetcherProperty, SequentialReadsMatchReference)
{
    struct Case {
        const char* name;
        Bytes gz;
    };
    const auto text = support::base64_text(3U << 20U, 1);
    const auto tar = support::tarball_like(4U << 20U, 2);
    std::vector<Case> cases;
    cases.push_back({"base64", support::gzip_compress(text, 6)});
    cases.push_back({"tar level 1", support::gzip_compress(tar, 1)});
    cases.push_back({"tar level 9", support::gzip_compress(tar, 9)});
    cases.push_back({"random", support::gzip_compress(support::random_bytes(2U << 20U, 3), 6)});
    cases.push_back({"repetitive", support::gzip_compress(support::repetitive_text(5U << 20U, 4), 6)});
    cases.push_back({"fixed only", support::gzip_compress(text, 6, Z_FIXED)});
    cases.push_back({"huffman only", support::gzip_compress(tar, 6, Z_HUFFMAN_ONLY)});
    cases.push_back({"stored", support::stored_blocks_gzip(tar, 20000)});
    cases.push_back({"multi member",
                     concat({support::gzip_compress(text), support::gzip_compress({}), support::gzip_compress(tar)})});
    cases.push_back({"bgzf", support::bgzf_compress(tar)});
    cases.push_back({"single dynamic block", support::single_dynamic_block_gzip(support::base64_text(1U << 20U, 7))});

    for (const auto& c : cases) {
        const auto reference = support::reference_decompress(c.gz);
        for (const std::size_t p : {1U, 2U, 4U}) {
            for (const std::uint64_t chunk : {64U * 1024U, 256U * 1024U}) {
                ChunkFetcher fetcher(source_of(c.gz), small_chunks(p, chunk));
                ASSERT_EQ(read_sequential(fetcher, p * chunk), reference) << c.name << " P=" << p << " chunk=" << chunk;
                EXPECT_EQ(fetcher.size(), reference.size());
                EXPECT_TRUE(fetcher.index().finalized());
            }
        }
    }
}

TEST(ChunkFetcherProperty, RandomReadsMatchReference)
{
    const auto data = support::tarball_like(6U << 20U, 9);
    const auto gz = support::gzip_compress(data, 6);
    for (const std::size_t p : {1U, 3U}) {
        ChunkFetcher fetcher(source_of(gz), small_chunks(p, 128 * 1024));
        std::mt19937_64 rng(p);
        Bytes buffer(300000);
        for (int i = 0; i < 60; ++i) {
            const auto offset = rng() % (data.size() + 1000);
            const auto want = rng() % buffer.size();
            const auto n = fetcher.read(offset, std::span(buffer).first(want));
            const auto expected = offset >= data.size() ? 0 : std::min<std::uint64_t>(want, data.size() - offset);
            ASSERT_EQ(n, expected) << offset;
            ASSERT_TRUE(std::equal(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n),
                                   data.begin() + static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(offset, data.size()))));
        }
    }
}

TEST(ChunkFetcher, FalseCandidatesDoNotChangeOutput)
{
    const auto data = support::tarball_like(4U << 20U, 10);
    const auto gz = support::gzip_compress(data, 6);
    auto options = small_chunks(2, 128 * 1024);
    options.injected_false_candidates = 8;
    for (const std::uint64_t seed : {1U, 2U, 3U}) {
        options.fault_seed = seed;
        ChunkFetcher fetcher(source_of(gz), options);
        ASSERT_EQ(read_sequential(fetcher, seed), data);
        EXPECT_GT(fetcher.statistics().failed_candidates, 0U);
    }
}

TEST(ChunkFetcher, BgzfNeedsNoMarkers)
{
    const auto data = support::tarball_like(4U << 20U, 11);
    const auto gz = support::bgzf_compress(data);
    ChunkFetcher fetcher(source_of(gz), small_chunks(2, 256 * 1024));
    EXPECT_TRUE(fetcher.is_bgzf());
    ASSERT_EQ(read_sequential(fetcher, 1), data);
    const auto stats = fetcher.statistics();
    EXPECT_EQ(stats.marker_buffers, 0U);
    EXPECT_EQ(stats.speculative_tasks, 0U);
}

TEST(ChunkFetcher, PlainGzipIsNotBgzf)
{
    ChunkFetcher fetcher(source_of(support::gzip_compress(Bytes(1000, 1))), small_chunks(1));
    EXPECT_FALSE(fetcher.is_bgzf());
}

TEST(ChunkFetcher, ChunkMemoryIsBounded)
{
    const auto data = support::base64_text(8U << 20U, 12);
    const auto gz = support::gzip_compress(data, 6);
    const std::uint64_t chunk = 256 * 1024;
    const std::size_t p = 2;
    ChunkFetcher fetcher(source_of(gz), small_chunks(p, chunk));
    ASSERT_EQ(read_sequential(fetcher, 2), data);
    const double ratio = static_cast<double>(data.size()) / static_cast<double>(gz.size());
    // Each in-flight chunk is held as 16-bit markers at worst; windows and
    // candidates add a little.
    const double bound = (1.0 + 3.0 * p) * static_cast<double>(chunk) * ratio * 2.0 * 1.25;
    EXPECT_LE(static_cast<double>(fetcher.statistics().peak_chunk_bytes), bound);
}

TEST(ChunkFetcher, StoredFileSeekPoints)
{
    // 8 MiB in 32 KiB stored blocks; one point per 512 KiB plus the end.
    const auto data = support::random_bytes(8U << 20U, 13);
    const auto gz = support::stored_blocks_gzip(data, 32768);
    ChunkFetcher fetcher(source_of(gz), small_chunks(2, 512 * 1024));
    const auto index = fetcher.build_full_index();
    ASSERT_EQ(index.size(), 17U);
    for (std::size_t i = 0; i < index.size(); ++i) {
        EXPECT_EQ(index[i].decompressed_offset, i * (512U * 1024U)) << i;
        const auto& window = index[i].window;
        EXPECT_TRUE(std::equal(window.begin(), window.end(),
                               data.begin() + static_cast<std::ptrdiff_t>(index[i].decompressed_offset - window.size())));
    }
    EXPECT_EQ(index.total_decompressed(), data.size());
    EXPECT_EQ(index.total_compressed_bits(), gz.size() * 8);
}

TEST(ChunkFetcher, SeekPointSpacingIsRespected)
{
    const auto data = support::tarball_like(6U << 20U, 14);
    const auto gz = support::gzip_compress(data, 6);
    auto options = small_chunks(2, 128 * 1024);
    options.seek_point_spacing = 1U << 20U;
    ChunkFetcher fetcher(source_of(gz), options);
    const auto index = fetcher.build_full_index();
    const auto boundaries = support::true_boundaries(gz);
    ASSERT_GE(index.size(), 2U);
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& point = index[i];
        if (i > 0) {
            EXPECT_GT(point.decompressed_offset, index[i - 1].decompressed_offset);
        }
        if (i + 1 < index.size()) {
            // Gaps only exceed the spacing when no block boundary lies in between.
            const auto gap = index[i + 1].decompressed_offset - point.decompressed_offset;
            if (gap > options.seek_point_spacing) {
                const auto inside = std::count_if(boundaries.begin(), boundaries.end(), [&](const auto& b) {
                    return b.decompressed > point.decompressed_offset &&
                           b.decompressed < index[i + 1].decompressed_offset;
                });
                EXPECT_EQ(inside, 0);
            }
        }
    }
    EXPECT_LE(data.size() - index[index.size() - 1].decompressed_offset, 2 * options.seek_point_spacing);
}

TEST(ChunkFetcher, EmptyMember)
{
    ChunkFetcher fetcher(source_of(support::gzip_compress({})), small_chunks(1));
    Bytes buffer(10);
    EXPECT_EQ(fetcher.read(0, buffer), 0U);
    EXPECT_EQ(fetcher.size(), 0U);
    const auto index = fetcher.build_full_index();
    EXPECT_EQ(index.size(), 1U);
    EXPECT_EQ(index.total_decompressed(), 0U);
}

TEST(ChunkFetcher, MemberStarts)
{
    const auto a = support::base64_text(700000, 15);
    const auto b = support::base64_text(900000, 16);
    const auto gz = concat({support::gzip_compress(a), support::gzip_compress({}), support::gzip_compress(b),
                            support::gzip_compress(a)});
    ChunkFetcher fetcher(source_of(gz), small_chunks(2));
    const auto index = fetcher.build_full_index();
    EXPECT_EQ(index.member_starts(),
              (std::vector<std::uint64_t>{0, a.size(), a.size() + b.size()}));
    EXPECT_EQ(index.total_decompressed(), 2 * a.size() + b.size());
}

TEST(ChunkFetcher, ImportedIndexServesReadsExactly)
{
    const auto data = support::tarball_like(8U << 20U, 17);
    const auto gz = support::gzip_compress(data, 6);
    GzipIndex index;
    {
        ChunkFetcher fetcher(source_of(gz), small_chunks(2, 256 * 1024));
        index = fetcher.build_full_index();
    }
    ChunkFetcher fetcher(source_of(gz), small_chunks(2, 256 * 1024));
    fetcher.import_index(index);
    Bytes buffer(1000);
    const auto offset = data.size() - 5000;
    ASSERT_EQ(fetcher.read(offset, buffer), buffer.size());
    EXPECT_TRUE(std::equal(buffer.begin(), buffer.end(), data.begin() + static_cast<std::ptrdiff_t>(offset)));
    const auto stats = fetcher.statistics();
    EXPECT_EQ(stats.speculative_tasks, 0U);
    EXPECT_LE(stats.exact_tasks, 2U);
    EXPECT_EQ(fetcher.size(), data.size());
    EXPECT_EQ(read_sequential(fetcher, 3), data);
}

TEST(ChunkFetcher, ImportRejectsIndexOfAnotherFile)
{
    const auto gz = support::gzip_compress(support::base64_text(1U << 20U, 18));
    const auto other = support::gzip_compress(support::base64_text(2U << 20U, 19));
    ChunkFetcher source_fetcher(source_of(other), small_chunks(1));
    const auto index = source_fetcher.build_full_index();
    ChunkFetcher fetcher(source_of(gz), small_chunks(1));
    try {
        fetcher.import_index(index);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IndexMismatch);
    }
}

TEST(ChunkFetcher, DetectsIsizeMismatch)
{
    auto gz = support::gzip_compress(support::base64_text(1U << 20U, 20));
    gz[gz.size() - 4] ^= 1U;
    EXPECT_EQ(read_error(gz), ErrorCode::IsizeMismatch);
}

TEST(ChunkFetcher, CrcCheckedOnlyWhenAsked)
{
    const auto data = support::base64_text(1U << 20U, 21);
    auto gz = support::gzip_compress(data);
    gz[gz.size() - 8] ^= 1U;
    auto options = small_chunks(2);
    options.verify_crc = true;
    EXPECT_EQ(read_error(gz, options), ErrorCode::CrcMismatch);
    ChunkFetcher fetcher(source_of(gz), small_chunks(2));
    EXPECT_EQ(read_sequential(fetcher, 1), data);
}

TEST(ChunkFetcher, CrcVerifiedAcrossMembers)
{
    const auto data = support::tarball_like(3U << 20U, 22);
    const auto gz = concat({support::gzip_compress(data), support::bgzf_compress(data)});
    auto options = small_chunks(2);
    options.verify_crc = true;
    ChunkFetcher fetcher(source_of(gz), options);
    EXPECT_EQ(read_sequential(fetcher, 1), concat({data, data}));
}

TEST(ChunkFetcher, TrailingBytes)
{
    const auto data = support::base64_text(600000, 23);
    auto padded = support::gzip_compress(data);
    padded.resize(padded.size() + 512, 0);
    ChunkFetcher fetcher(source_of(padded), small_chunks(2));
    EXPECT_EQ(read_sequential(fetcher, 1), data);

    auto garbage = support::gzip_compress(data);
    garbage.push_back('x');
    EXPECT_EQ(read_error(garbage), ErrorCode::TrailingGarbage);
}

TEST(ChunkFetcher, CorruptDataIsAnError)
{
    auto gz = support::gzip_compress(support::tarball_like(2U << 20U, 24));
    for (std::size_t i = gz.size() / 2; i < gz.size() / 2 + 64; ++i) {
        gz[i] = 0xFF;
    }
    // zlib decodes this stream to the end as well; only the checksum catches it.
    EXPECT_THROW(support::reference_decompress(gz), std::exception);
    auto options = small_chunks(2);
    options.verify_crc = true;
    ChunkFetcher fetcher(source_of(gz), options);
    EXPECT_THROW(read_sequential(fetcher, 1), Error);
}

TEST(ChunkFetcher, TruncatedFile)
{
    auto gz = support::gzip_compress(support::tarball_like(1U << 20U, 25));
    gz.resize(gz.size() - 100);
    EXPECT_EQ(read_error(gz), ErrorCode::TruncatedInput);
}

TEST(ChunkFetcher, NotGzip)
{
    EXPECT_EQ(read_error(Bytes(5000, 'a')), ErrorCode::NotGzip);
}

TEST(ChunkFetcher, IndexedSequentialReadUsesEveryPrefetch)
{
    const auto data = support::base64_text(8U << 20U, 26);
    const auto gz = support::gzip_compress(data, 6);
    GzipIndex index;
    {
        ChunkFetcher fetcher(source_of(gz), small_chunks(1, 512 * 1024));
        index = fetcher.build_full_index();
    }
    ASSERT_GE(index.size(), 8U);
    for (const std::size_t p : {1U, 2U}) {
        ChunkFetcher fetcher(source_of(gz), small_chunks(p, 512 * 1024));
        fetcher.import_index(index);
        ASSERT_EQ(read_sequential(fetcher, 4), data);
        const auto stats = fetcher.statistics();
        // One decode per interval: nothing prefetched is thrown away.
        EXPECT_EQ(stats.exact_tasks, index.size());
        EXPECT_EQ(stats.unused_prefetches, 0U);
        EXPECT_EQ(stats.cache_misses, 1U);
    }
}
