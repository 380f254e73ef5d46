#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ragz {

/// Immutable, positional byte source that may be read concurrently from any
/// number of threads. Implementations never return short reads except at EOF.
class SharedSource {
public:
    virtual ~SharedSource() = default;

    /// Copies min(out.size(), size() - offset) bytes starting at `offset` into
    /// `out` and returns the number of bytes copied. Zero means end of data.
    virtual std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) const = 0;

    virtual std::uint64_t size() const = 0;

    /// The whole content as one contiguous span when the backing storage allows
    /// it without copying.
    virtual std::optional<std::span<const std::uint8_t>> contiguous() const { return std::nullopt; }

    std::vector<std::uint8_t> read_at(std::uint64_t offset, std::size_t length) const;
};

/// Regular file accessed with pread.
class FileSource final : public SharedSource {
public:
    explicit FileSource(const std::filesystem::path& path);
    ~FileSource() override;

    FileSource(const FileSource&) = delete;
    FileSource& operator=(const FileSource&) = delete;

    using SharedSource::read_at;
    std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;
    std::uint64_t size() const override { return size_; }

private:
    int fd_ = -1;
    std::uint64_t size_ = 0;
    std::filesystem::path path_;
};

class MemorySource final : public SharedSource {
public:
    explicit MemorySource(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    using SharedSource::read_at;
    std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;
    std::uint64_t size() const override { return bytes_.size(); }
    std::optional<std::span<const std::uint8_t>> contiguous() const override { return std::span(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Non-seekable stream (e.g. standard input) spooled into fixed-size segments
/// at construction so that it can be accessed positionally afterwards.
class SpooledSource final : public SharedSource {
public:
    static constexpr std::size_t default_segment_size = 4U << 20U;

    explicit SpooledSource(std::istream& input, std::size_t segment_size = default_segment_size);
    /// Spools from a POSIX file descriptor, reading until EOF.
    static std::shared_ptr<SpooledSource> from_fd(int fd, std::size_t segment_size = default_segment_size);

    using SharedSource::read_at;
    std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;
    std::uint64_t size() const override { return size_; }
    std::optional<std::span<const std::uint8_t>> contiguous() const override;

    std::size_t segment_count() const { return segments_.size(); }

private:
    SpooledSource() = default;
    void append(std::span<const std::uint8_t> bytes);

    std::size_t segment_size_ = default_segment_size;
    std::vector<std::vector<std::uint8_t>> segments_;
    std::uint64_t size_ = 0;
};

std::shared_ptr<const SharedSource> open_source(const std::filesystem::path& path);

}  // namespace ragz
