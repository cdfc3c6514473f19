#pragma once

#include <cstdint>
#include <cstddef>
#include <random>
#include <vector>

#include "rdht/errors.hpp"

namespace rdht {

using Bits = std::vector<std::uint8_t>; // each element 0 or 1

// Anything the embedding loop can pull bits from. read() always returns
// exactly k bits; sources that can run dry pad with zeros and report it.
class BitSource {
public:
    virtual ~BitSource() = default;
    virtual Bits read(std::size_t k) = 0;
    // Bits handed out so far, including any zero padding.
    virtual std::uint64_t consumed() const = 0;
    // Zero bits appended past the end of the underlying data.
    virtual std::uint64_t padding() const = 0;
};

// A finite bit sequence with a read cursor. Reads past the end pad with
// zeros and set the exhausted flag.
class BitStream : public BitSource {
public:
    BitStream() = default;
    explicit BitStream(Bits bits) : bits_(std::move(bits)) {}

    static BitStream from_bytes(const std::vector<std::uint8_t>& data);

    // Packs to bytes MSB-first, zero-padding the final partial byte.
    std::vector<std::uint8_t> to_bytes() const;

    void append_bit(std::uint8_t bit) { bits_.push_back(bit & 1u); }
    void append(const Bits& bits) { bits_.insert(bits_.end(), bits.begin(), bits.end()); }

    // Next min(k, remaining) bits; shortfall is zero-filled and flags the
    // stream exhausted. Always returns k bits.
    Bits read_prefix(std::size_t k);

    Bits read(std::size_t k) override { return read_prefix(k); }
    std::uint64_t consumed() const override { return cursor_ + padding_; }
    std::uint64_t padding() const override { return padding_; }

    std::size_t size() const { return bits_.size(); }
    std::size_t cursor() const { return cursor_; }
    std::size_t remaining() const { return bits_.size() - cursor_; }
    bool exhausted() const { return exhausted_; }
    void rewind() { cursor_ = 0; padding_ = 0; exhausted_ = false; }

    const Bits& bits() const { return bits_; }

    friend bool operator==(const BitStream& a, const BitStream& b) {
        return a.bits_ == b.bits_;
    }

private:
    Bits bits_;
    std::size_t cursor_ = 0;
    std::uint64_t padding_ = 0;
    bool exhausted_ = false;
};

// Unbounded all-zero source; used for capacity dry runs.
class ZeroSource : public BitSource {
public:
    Bits read(std::size_t k) override {
        consumed_ += k;
        return Bits(k, 0);
    }
    std::uint64_t consumed() const override { return consumed_; }
    std::uint64_t padding() const override { return 0; }

private:
    std::uint64_t consumed_ = 0;
};

// Unbounded seeded pseudo-random source; never exhausts.
class RandomBitSource : public BitSource {
public:
    explicit RandomBitSource(std::uint64_t seed) : rng_(seed) {}

    Bits read(std::size_t k) override;
    std::uint64_t consumed() const override { return consumed_; }
    std::uint64_t padding() const override { return 0; }

private:
    std::mt19937_64 rng_;
    std::uint64_t word_ = 0;
    int avail_ = 0;
    std::uint64_t consumed_ = 0;
};

// MSB-first expansion of bytes to bits and back.
Bits bytes_to_bits(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> bits_to_bytes(const Bits& bits);

// Prepends a 32-bit big-endian bit-length header.
BitStream frame(const BitStream& payload);
// Reads the header and returns exactly that many body bits; trailing padding
// is discarded. Shorter streams raise "truncated payload".
BitStream unframe(const BitStream& framed);

} // namespace rdht
