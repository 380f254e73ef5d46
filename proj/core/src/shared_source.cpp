#include "ragz/shared_source.hpp"

#include "ragz/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

namespace ragz {

std::vector<std::uint8_t> SharedSource::read_at(std::uint64_t offset, std::size_t length) const
{
    const auto total = size();
    const auto available = offset >= total ? 0 : std::min<std::uint64_t>(length, total - offset);
    std::vector<std::uint8_t> result(static_cast<std::size_t>(available));
    const auto n = read_at(offset, std::span(result));
    result.resize(n);
    return result;
}

FileSource::FileSource(const std::filesystem::path& path) : path_(path)
{
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "': " + std::strerror(errno));
    }
    struct stat info {};
    if (::fstat(fd_, &info) != 0) {
        const auto reason = std::string(std::strerror(errno));
        ::close(fd_);
        throw Error(ErrorCode::Io, "cannot stat '" + path.string() + "': " + reason);
    }
    size_ = static_cast<std::uint64_t>(info.st_size);
}

FileSource::~FileSource()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

std::size_t FileSource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const
{
    if (offset >= size_) {
        return 0;
    }
    const auto wanted = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), size_ - offset));
    std::size_t done = 0;
    while (done < wanted) {
        const auto n = ::pread(fd_, out.data() + done, wanted - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw Error(ErrorCode::Io,
                        "pread failed at byte offset " + std::to_string(offset + done) + ": " + std::strerror(errno));
        }
        if (n == 0) {
            throw Error(ErrorCode::Io, "file '" + path_.string() + "' shrank while being read");
        }
        done += static_cast<std::size_t>(n);
    }
    return done;
}

std::size_t MemorySource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const
{
    if (offset >= bytes_.size()) {
        return 0;
    }
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), bytes_.size() - offset));
    std::memcpy(out.data(), bytes_.data() + offset, n);
    return n;
}

SpooledSource::SpooledSource(std::istream& input, std::size_t segment_size) : segment_size_(segment_size)
{
    std::vector<std::uint8_t> buffer(segment_size_);
    while (input) {
        input.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
        const auto n = static_cast<std::size_t>(input.gcount());
        if (n == 0) {
            break;
        }
        append(std::span(buffer.data(), n));
    }
    if (input.bad()) {
        throw Error(ErrorCode::Io, "failed to spool input stream");
    }
}

std::shared_ptr<SpooledSource> SpooledSource::from_fd(int fd, std::size_t segment_size)
{
    std::shared_ptr<SpooledSource> source(new SpooledSource());
    source->segment_size_ = segment_size;
    std::vector<std::uint8_t> buffer(segment_size);
    while (true) {
        const auto n = ::read(fd, buffer.data(), buffer.size());
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw Error(ErrorCode::Io, std::string("failed to spool input: ") + std::strerror(errno));
        }
        if (n == 0) {
            break;
        }
        source->append(std::span(buffer.data(), static_cast<std::size_t>(n)));
    }
    return source;
}

void SpooledSource::append(std::span<const std::uint8_t> bytes)
{
    while (!bytes.empty()) {
        if (segments_.empty() || segments_.back().size() == segment_size_) {
            segments_.emplace_back();
            segments_.back().reserve(segment_size_);
        }
        auto& tail = segments_.back();
        const auto n = std::min(bytes.size(), segment_size_ - tail.size());
        tail.insert(tail.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
        bytes = bytes.subspan(n);
        size_ += n;
    }
}

std::size_t SpooledSource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const
{
    if (offset >= size_) {
        return 0;
    }
    const auto wanted = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), size_ - offset));
    std::size_t done = 0;
    while (done < wanted) {
        const auto position = offset + done;
        const auto& segment = segments_[static_cast<std::size_t>(position / segment_size_)];
        const auto in_segment = static_cast<std::size_t>(position % segment_size_);
        const auto n = std::min(wanted - done, segment.size() - in_segment);
        std::memcpy(out.data() + done, segment.data() + in_segment, n);
        done += n;
    }
    return done;
}

std::optional<std::span<const std::uint8_t>> SpooledSource::contiguous() const
{
    if (segments_.size() == 1) {
        return std::span<const std::uint8_t>(segments_.front());
    }
    if (segments_.empty()) {
        return std::span<const std::uint8_t>{};
    }
    return std::nullopt;
}

std::shared_ptr<const SharedSource> open_source(const std::filesystem::path& path)
{
    return std::make_shared<FileSource>(path);
}

}  // namespace ragz
