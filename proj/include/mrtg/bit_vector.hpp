#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mrtg {

/// Packed bit array. Bit i lives in word i / 64 at position i % 64.
/// Bits past size() in the last word are kept zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t size, bool value = false);

    static BitVector from_string(std::string_view ones_and_zeros);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v) {
            words_[i >> 6] |= m;
        } else {
            words_[i >> 6] &= ~m;
        }
    }
    bool operator[](std::size_t i) const noexcept { return get(i); }

    void push_back(bool v);
    void append(const BitVector& other);
    void resize(std::size_t size, bool value = false);
    void fill(bool value) noexcept;

    std::size_t popcount() const noexcept;

    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> words() noexcept { return words_; }

    BitVector slice(std::size_t first, std::size_t count) const;

    /// MSB-first packing: bit 0 becomes the high bit of byte 0.
    std::vector<std::uint8_t> to_bytes_msb_first() const;
    static BitVector from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t nbits);

    std::string to_string() const;

    friend bool operator==(const BitVector& a, const BitVector& b) noexcept {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

private:
    void clear_tail() noexcept;

    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

}  // namespace mrtg
