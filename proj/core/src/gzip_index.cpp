#include "ragz/gzip_index.hpp"

#include "ragz/deflate.hpp"
#include "ragz/error.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>

namespace ragz {

namespace {

constexpr std::array<char, 4> magic = {'R', 'G', 'I', 'X'};
constexpr std::size_t header_size = 4 + 2 + 2 + 8 + 8 + 8;
constexpr std::size_t point_header_size = 8 + 8 + 4;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8U * i)));
    }
}

class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get()
    {
        need(sizeof(T));
        std::uint64_t value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= std::uint64_t{bytes_[position_ + i]} << (8U * i);
        }
        position_ += sizeof(T);
        return static_cast<T>(value);
    }

    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        const auto out = bytes_.subspan(position_, n);
        position_ += n;
        return out;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - position_; }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n) {
            throw Error(ErrorCode::IndexFormat, "index file is truncated");
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t position_ = 0;
};

std::string describe(const SeekPoint& p)
{
    return "(bit " + std::to_string(p.compressed_offset) + ", byte " + std::to_string(p.decompressed_offset) + ")";
}

}  // namespace

void GzipIndex::insert(SeekPoint point)
{
    auto it = std::lower_bound(points_.begin(), points_.end(), point.compressed_offset,
                               [](const SeekPoint& p, std::uint64_t v) { return p.compressed_offset < v; });
    if (it != points_.end() && it->compressed_offset == point.compressed_offset) {
        if (it->decompressed_offset != point.decompressed_offset) {
            throw Error(ErrorCode::IndexCorruption,
                        "seek point " + describe(point) + " conflicts with existing " + describe(*it));
        }
        return;
    }
    if (it != points_.begin() && std::prev(it)->decompressed_offset >= point.decompressed_offset) {
        throw Error(ErrorCode::IndexCorruption,
                    "seek point " + describe(point) + " does not follow " + describe(*std::prev(it)));
    }
    if (it != points_.end() && it->decompressed_offset <= point.decompressed_offset) {
        throw Error(ErrorCode::IndexCorruption,
                    "seek point " + describe(point) + " does not precede " + describe(*it));
    }
    if (finalized_ && point.decompressed_offset > total_decompressed_) {
        throw Error(ErrorCode::IndexCorruption, "seek point " + describe(point) + " lies beyond the stream end");
    }
    points_.insert(it, std::move(point));
}

std::size_t GzipIndex::locate(std::uint64_t decompressed_offset) const
{
    if (points_.empty()) {
        throw Error(ErrorCode::OutOfRange, "index has no seek points");
    }
    if (finalized_ && decompressed_offset >= total_decompressed_ && total_decompressed_ != 0) {
        throw Error(ErrorCode::OutOfRange, "offset " + std::to_string(decompressed_offset) +
                                               " is at or beyond the stream end " +
                                               std::to_string(total_decompressed_));
    }
    auto it = std::upper_bound(points_.begin(), points_.end(), decompressed_offset,
                               [](std::uint64_t v, const SeekPoint& p) { return v < p.decompressed_offset; });
    if (it == points_.begin()) {
        throw Error(ErrorCode::OutOfRange, "offset precedes the first seek point");
    }
    return static_cast<std::size_t>(std::distance(points_.begin(), it) - 1);
}

void GzipIndex::finalize(std::uint64_t total_decompressed, std::uint64_t total_compressed_bits)
{
    if (!points_.empty() && points_.back().decompressed_offset > total_decompressed) {
        throw Error(ErrorCode::IndexCorruption, "last seek point lies beyond the stream end");
    }
    finalized_ = true;
    total_decompressed_ = total_decompressed;
    total_compressed_bits_ = total_compressed_bits;
}

void GzipIndex::add_member_start(std::uint64_t decompressed_offset)
{
    if (member_starts_.empty() || member_starts_.back() < decompressed_offset) {
        member_starts_.push_back(decompressed_offset);
    }
}

std::vector<std::uint8_t> GzipIndex::serialize() const
{
    if (!finalized_) {
        throw Error(ErrorCode::InvalidArgument, "only a finalized index can be exported");
    }
    std::vector<std::uint8_t> out;
    out.insert(out.end(), magic.begin(), magic.end());
    put<std::uint16_t>(out, format_version);
    put<std::uint16_t>(out, flag_raw_windows);
    put<std::uint64_t>(out, points_.size());
    put<std::uint64_t>(out, total_decompressed_);
    put<std::uint64_t>(out, total_compressed_bits_);
    for (const auto& point : points_) {
        put<std::uint64_t>(out, point.compressed_offset);
        put<std::uint64_t>(out, point.decompressed_offset);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(point.window.size()));
        out.insert(out.end(), point.window.begin(), point.window.end());
    }
    return out;
}

void GzipIndex::write(std::ostream& out) const
{
    const auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "failed to write index");
    }
}

GzipIndex GzipIndex::deserialize(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < header_size) {
        throw Error(ErrorCode::IndexFormat, "index file is truncated");
    }
    if (!std::equal(magic.begin(), magic.end(), bytes.begin())) {
        throw Error(ErrorCode::IndexFormat, "bad index magic");
    }
    Cursor cursor(bytes.subspan(magic.size()));
    const auto version = cursor.get<std::uint16_t>();
    if (version != format_version) {
        throw Error(ErrorCode::IndexFormat, "unsupported index version " + std::to_string(version));
    }
    const auto flags = cursor.get<std::uint16_t>();
    if (flags != flag_raw_windows) {
        throw Error(ErrorCode::IndexFormat, "unsupported index flags " + std::to_string(flags));
    }
    const auto count = cursor.get<std::uint64_t>();
    const auto total_decompressed = cursor.get<std::uint64_t>();
    const auto total_bits = cursor.get<std::uint64_t>();
    if (count > cursor.remaining() / point_header_size) {
        throw Error(ErrorCode::IndexFormat, "index file is truncated");
    }

    GzipIndex index;
    index.points_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        SeekPoint point;
        point.compressed_offset = cursor.get<std::uint64_t>();
        point.decompressed_offset = cursor.get<std::uint64_t>();
        const auto window_length = cursor.get<std::uint32_t>();
        const auto window = cursor.take(window_length);
        point.window.assign(window.begin(), window.end());

        const auto expected = std::min<std::uint64_t>(deflate::window_size, point.decompressed_offset);
        if (window_length != expected) {
            throw Error(ErrorCode::IndexCorruption, "seek point " + std::to_string(i) + " has a window of " +
                                                        std::to_string(window_length) + " bytes, expected " +
                                                        std::to_string(expected));
        }
        if (point.compressed_offset >= total_bits || point.decompressed_offset > total_decompressed) {
            throw Error(ErrorCode::IndexCorruption, "seek point " + std::to_string(i) + " lies beyond the stream");
        }
        if (!index.points_.empty() && (index.points_.back().compressed_offset >= point.compressed_offset ||
                                       index.points_.back().decompressed_offset >= point.decompressed_offset)) {
            throw Error(ErrorCode::IndexCorruption, "seek point " + std::to_string(i) + " is out of order");
        }
        index.points_.push_back(std::move(point));
    }
    if (cursor.remaining() != 0) {
        throw Error(ErrorCode::IndexCorruption, "trailing bytes after the last seek point");
    }
    if (index.points_.empty() || index.points_.front().decompressed_offset != 0) {
        throw Error(ErrorCode::IndexCorruption, "index does not start at decompressed offset 0");
    }
    index.finalize(total_decompressed, total_bits);
    return index;
}

GzipIndex GzipIndex::read(std::istream& in)
{
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace ragz
