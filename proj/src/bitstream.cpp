#include "rdht/bitstream.hpp"

namespace rdht {

BitStream BitStream::from_bytes(const std::vector<std::uint8_t>& data) {
    return BitStream(bytes_to_bits(data));
}

std::vector<std::uint8_t> BitStream::to_bytes() const {
    return bits_to_bytes(bits_);
}

Bits BitStream::read_prefix(std::size_t k) {
    Bits out;
    out.reserve(k);
    std::size_t take = std::min(k, remaining());
    for (std::size_t i = 0; i < take; ++i) out.push_back(bits_[cursor_ + i]);
    cursor_ += take;
    if (take < k) {
        out.resize(k, 0);
        padding_ += k - take;
        exhausted_ = true;
    }
    return out;
}

Bits RandomBitSource::read(std::size_t k) {
    Bits out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (avail_ == 0) {
            word_ = rng_();
            avail_ = 64;
        }
        out.push_back(static_cast<std::uint8_t>((word_ >> 63) & 1u));
        word_ <<= 1;
        --avail_;
    }
    consumed_ += k;
    return out;
}

Bits bytes_to_bits(const std::vector<std::uint8_t>& data) {
    Bits bits;
    bits.reserve(data.size() * 8);
    for (std::uint8_t byte : data) {
        for (int i = 7; i >= 0; --i) {
            bits.push_back(static_cast<std::uint8_t>((byte >> i) & 1u));
        }
    }
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes(const Bits& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
    }
    return bytes;
}

BitStream frame(const BitStream& payload) {
    if (payload.size() >= (1ull << 32)) {
        fail(ErrorKind::usage, "payload too large to frame");
    }
    Bits out;
    out.reserve(32 + payload.size());
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    for (int i = 31; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>((len >> i) & 1u));
    }
    out.insert(out.end(), payload.bits().begin(), payload.bits().end());
    return BitStream(std::move(out));
}

BitStream unframe(const BitStream& framed) {
    const Bits& bits = framed.bits();
    if (bits.size() < 32) fail(ErrorKind::inconsistency, "truncated payload");
    std::uint64_t len = 0;
    for (int i = 0; i < 32; ++i) len = (len << 1) | bits[static_cast<std::size_t>(i)];
    if (len > bits.size() - 32) fail(ErrorKind::inconsistency, "truncated payload");
    Bits body(bits.begin() + 32, bits.begin() + 32 + static_cast<std::ptrdiff_t>(len));
    return BitStream(std::move(body));
}

} // namespace rdht
