#include "ragz/error.hpp"
#include "ragz/parallel_gzip_reader.hpp"

#include "corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ragz;
using ragz::support::Bytes;

namespace {

FetcherOptions options_for(std::size_t parallelism)
{
    FetcherOptions options;
    options.parallelism = parallelism;
    options.chunk_size = 128 * 1024;
    return options;
}

class TempDir {
public:
    TempDir()
    {
        path_ = std::filesystem::temp_directory_path() /
                ("ragz_reader_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ignored;
        std::filesystem::remove_all(path_, ignored);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const Bytes& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Reader, ReadAllFromMemory)
{
    const auto data = support::tarball_like(3U << 20U, 1);
    auto reader = ParallelGzipReader::open(support::gzip_compress(data), options_for(2));
    EXPECT_EQ(reader.read_all(), data);
    EXPECT_TRUE(reader.eof());
    EXPECT_EQ(reader.tell(), data.size());
}

TEST(Reader, OpenFileAndStream)
{
    TempDir dir;
    const auto data = support::base64_text(1U << 20U, 2);
    const auto gz = support::gzip_compress(data);
    write_file(dir / "a.gz", gz);
    auto from_file = ParallelGzipReader::open(dir / "a.gz", options_for(1));
    EXPECT_EQ(from_file.read_all(), data);

    std::istringstream stream(std::string(gz.begin(), gz.end()));
    auto from_stream = ParallelGzipReader::open(stream, options_for(1));
    EXPECT_EQ(from_stream.read_all(), data);

    EXPECT_THROW(ParallelGzipReader::open(dir / "missing.gz"), Error);
}

TEST(Reader, ZeroLengthRead)
{
    auto reader = ParallelGzipReader::open(support::gzip_compress(Bytes(100, 'a')), options_for(1));
    EXPECT_EQ(reader.read({}), 0U);
    EXPECT_FALSE(reader.eof());
    EXPECT_EQ(reader.tell(), 0U);
}

TEST(Reader, SeekPastEnd)
{
    auto reader = ParallelGzipReader::open(support::gzip_compress(Bytes(1000, 'a')), options_for(1));
    reader.seek(5000);
    Bytes buffer(10);
    EXPECT_EQ(reader.read(buffer), 0U);
    EXPECT_TRUE(reader.eof());
    reader.seek(995);
    EXPECT_FALSE(reader.eof());
    EXPECT_EQ(reader.read(buffer), 5U);
    EXPECT_TRUE(reader.eof());
    EXPECT_EQ(reader.tell(), 1000U);
}

TEST(Reader, Size)
{
    const auto data = support::repetitive_text(2U << 20U, 3);
    auto reader = ParallelGzipReader::open(support::gzip_compress(data), options_for(2));
    EXPECT_EQ(reader.size(), data.size());
    reader.seek(data.size() - 10);
    Bytes buffer(20);
    EXPECT_EQ(reader.read(buffer), 10U);
}

TEST(ReaderProperty, RandomSeeks)
{
    const auto data = support::tarball_like(5U << 20U, 4);
    auto reader = ParallelGzipReader::open(support::gzip_compress(data, 6), options_for(2));
    std::mt19937_64 rng(4);
    Bytes buffer(200000);
    for (int i = 0; i < 100; ++i) {
        const auto offset = rng() % data.size();
        reader.seek(offset);
        const auto n = reader.read(std::span(buffer).first(1 + rng() % buffer.size()));
        ASSERT_EQ(reader.tell(), offset + n);
        ASSERT_TRUE(std::equal(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n),
                               data.begin() + static_cast<std::ptrdiff_t>(offset)));
    }
}

TEST(Reader, TwoCursorsShareOneFetcher)
{
    const auto data = support::tarball_like(4U << 20U, 5);
    auto fetcher = std::make_shared<ChunkFetcher>(std::make_shared<MemorySource>(support::gzip_compress(data)),
                                                  options_for(2));
    ParallelGzipReader a(fetcher);
    ParallelGzipReader b(fetcher);
    b.seek(data.size() / 2);
    Bytes out_a;
    Bytes out_b;
    Bytes buffer(100000);
    while (out_a.size() < data.size() / 2) {
        auto n = a.read(buffer);
        out_a.insert(out_a.end(), buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n));
        n = b.read(buffer);
        out_b.insert(out_b.end(), buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n));
    }
    EXPECT_TRUE(std::equal(out_a.begin(), out_a.end(), data.begin()));
    EXPECT_TRUE(std::equal(out_b.begin(), out_b.end(), data.begin() + static_cast<std::ptrdiff_t>(data.size() / 2)));
    EXPECT_EQ(a.fetcher(), b.fetcher());
}

TEST(Reader, ConcurrentCursors)
{
    const auto data = support::base64_text(4U << 20U, 6);
    auto fetcher = std::make_shared<ChunkFetcher>(std::make_shared<MemorySource>(support::gzip_compress(data)),
                                                  options_for(2));
    std::vector<std::thread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            ParallelGzipReader reader(fetcher);
            std::mt19937_64 rng(static_cast<std::uint64_t>(t));
            Bytes buffer(50000);
            for (int i = 0; i < 30; ++i) {
                const auto offset = rng() % data.size();
                reader.seek(offset);
                const auto n = reader.read(buffer);
                if (!std::equal(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n),
                                data.begin() + static_cast<std::ptrdiff_t>(offset))) {
                    ++mismatches;
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    EXPECT_EQ(mismatches.load(), 0);
}

TEST(Reader, ExportAndImportIndex)
{
    TempDir dir;
    const auto data = support::tarball_like(4U << 20U, 7);
    const auto gz = support::gzip_compress(data);
    {
        auto reader = ParallelGzipReader::open(gz, options_for(2));
        reader.export_index(dir / "a.idx");
    }
    auto reader = ParallelGzipReader::open(gz, options_for(2));
    reader.import_index(dir / "a.idx");
    EXPECT_EQ(reader.size(), data.size());
    reader.seek(data.size() / 3);
    Bytes buffer(1000);
    ASSERT_EQ(reader.read(buffer), buffer.size());
    EXPECT_TRUE(std::equal(buffer.begin(), buffer.end(), data.begin() + static_cast<std::ptrdiff_t>(data.size() / 3)));
    EXPECT_EQ(reader.statistics().speculative_tasks, 0U);

    auto same = ParallelGzipReader::open(gz, options_for(1));
    EXPECT_EQ(same.build_full_index(), reader.fetcher()->index());
}
