#include "ragz/parallel_gzip_reader.hpp"

#include "ragz/error.hpp"

#include <fstream>

namespace ragz {

ParallelGzipReader::ParallelGzipReader(std::shared_ptr<const SharedSource> source, FetcherOptions options)
    : fetcher_(std::make_shared<ChunkFetcher>(std::move(source), options))
{
}

ParallelGzipReader::ParallelGzipReader(std::shared_ptr<ChunkFetcher> fetcher) : fetcher_(std::move(fetcher))
{
    if (!fetcher_) {
        throw Error(ErrorCode::InvalidArgument, "no fetcher");
    }
}

ParallelGzipReader ParallelGzipReader::open(const std::filesystem::path& path, FetcherOptions options)
{
    return {open_source(path), options};
}

ParallelGzipReader ParallelGzipReader::open(std::vector<std::uint8_t> bytes, FetcherOptions options)
{
    return {std::make_shared<MemorySource>(std::move(bytes)), options};
}

ParallelGzipReader ParallelGzipReader::open(std::istream& input, FetcherOptions options)
{
    return {std::make_shared<SpooledSource>(input), options};
}

std::size_t ParallelGzipReader::read(std::span<std::uint8_t> out)
{
    const auto n = fetcher_->read(position_, out);
    position_ += n;
    eof_ = n < out.size();
    return n;
}

std::vector<std::uint8_t> ParallelGzipReader::read_all()
{
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buffer(1U << 20U);
    while (true) {
        const auto n = read(buffer);
        out.insert(out.end(), buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(n));
        if (n < buffer.size()) {
            return out;
        }
    }
}

std::uint64_t ParallelGzipReader::size()
{
    if (const auto known = fetcher_->size()) {
        return *known;
    }
    return fetcher_->build_full_index().total_decompressed();
}

void ParallelGzipReader::import_index(GzipIndex index) { fetcher_->import_index(std::move(index)); }

void ParallelGzipReader::import_index(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open index " + path.string());
    }
    import_index(GzipIndex::read(in));
}

GzipIndex ParallelGzipReader::build_full_index() { return fetcher_->build_full_index(); }

void ParallelGzipReader::export_index(const std::filesystem::path& path)
{
    const auto index = build_full_index();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot create index " + path.string());
    }
    index.write(out);
    out.flush();
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing index " + path.string());
    }
}

}  // namespace ragz
