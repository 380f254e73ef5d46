#include "ragz/bit_reader.hpp"

#include <algorithm>

namespace ragz {

BitReader::BitReader(std::shared_ptr<const SharedSource> source) : source_(std::move(source))
{
    size_bytes_ = source_->size();
    if (auto whole = source_->contiguous()) {
        data_ = *whole;
    } else {
        load_segment(0);
    }
}

BitReader::BitReader(std::span<const std::uint8_t> bytes) : data_(bytes), size_bytes_(bytes.size()) {}

void BitReader::refill_slow()
{
    while (nbits_ <= 56) {
        if (next_byte_ >= data_.size() && !load_next_segment()) {
            return;
        }
        bits_ |= std::uint64_t{data_[next_byte_]} << nbits_;
        ++next_byte_;
        nbits_ += 8;
    }
}

bool BitReader::load_next_segment()
{
    const auto next = data_offset_ + data_.size();
    if (!source_ || next >= size_bytes_) {
        return false;
    }
    load_segment(next);
    return true;
}

void BitReader::load_segment(std::uint64_t byte_offset)
{
    const auto length = static_cast<std::size_t>(std::min<std::uint64_t>(segment_size, size_bytes_ - byte_offset));
    segment_.resize(length);
    const auto n = source_->read_at(byte_offset, std::span(segment_));
    data_ = std::span<const std::uint8_t>(segment_.data(), n);
    data_offset_ = byte_offset;
    next_byte_ = 0;
}

void BitReader::seek_bits(std::uint64_t offset)
{
    if (offset > size_bits()) {
        throw Error(ErrorCode::OutOfRange,
                    "seek to bit " + std::to_string(offset) + " beyond end (" + std::to_string(size_bits()) + " bits)");
    }
    if (offset == tell()) {
        return;
    }
    const auto byte = offset / 8U;
    bits_ = 0;
    nbits_ = 0;
    if (byte >= data_offset_ && byte <= data_offset_ + data_.size()) {
        next_byte_ = static_cast<std::size_t>(byte - data_offset_);
    } else {
        load_segment(byte);
    }
    if (const auto sub = static_cast<unsigned>(offset % 8U); sub != 0) {
        refill();
        consume(sub);
    }
}

void BitReader::read_bytes(std::span<std::uint8_t> out)
{
    if (nbits_ % 8U != 0) {
        throw Error(ErrorCode::InvalidArgument, "read_bytes on an unaligned bit reader", tell());
    }
    std::size_t done = 0;
    while (done < out.size() && nbits_ >= 8) {
        out[done++] = static_cast<std::uint8_t>(bits_ & 0xFFU);
        consume(8);
    }
    while (done < out.size()) {
        if (next_byte_ >= data_.size() && !load_next_segment()) {
            throw Error(ErrorCode::TruncatedInput,
                        "wanted " + std::to_string(out.size() - done) + " more bytes", tell());
        }
        const auto n = std::min(out.size() - done, data_.size() - next_byte_);
        std::memcpy(out.data() + done, data_.data() + next_byte_, n);
        next_byte_ += n;
        done += n;
    }
}

}  // namespace ragz
