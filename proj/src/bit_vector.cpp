#include "mrtg/bit_vector.hpp"

#include <bit>

#include "mrtg/error.hpp"

namespace mrtg {

BitVector::BitVector(std::size_t size, bool value) : words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0), size_(size) {
    clear_tail();
}

BitVector BitVector::from_string(std::string_view ones_and_zeros) {
    BitVector v(ones_and_zeros.size());
    for (std::size_t i = 0; i < ones_and_zeros.size(); ++i) {
        const char c = ones_and_zeros[i];
        if (c != '0' && c != '1') {
            throw InvalidArgument("bit string may only contain '0' and '1'");
        }
        v.set(i, c == '1');
    }
    return v;
}

void BitVector::push_back(bool v) {
    if ((size_ & 63) == 0) {
        words_.push_back(0);
    }
    ++size_;
    set(size_ - 1, v);
}

void BitVector::append(const BitVector& other) {
    if ((size_ & 63) == 0) {
        words_.insert(words_.end(), other.words_.begin(), other.words_.end());
        size_ += other.size_;
        return;
    }
    const std::size_t base = size_;
    resize(size_ + other.size_);
    for (std::size_t i = 0; i < other.size_; ++i) {
        set(base + i, other.get(i));
    }
}

void BitVector::resize(std::size_t size, bool value) {
    const std::size_t old = size_;
    words_.resize((size + 63) / 64, 0);
    size_ = size;
    if (value) {
        for (std::size_t i = old; i < size; ++i) {
            set(i, true);
        }
    }
    clear_tail();
}

void BitVector::fill(bool value) noexcept {
    for (auto& w : words_) {
        w = value ? ~std::uint64_t{0} : 0;
    }
    clear_tail();
}

std::size_t BitVector::popcount() const noexcept {
    std::size_t n = 0;
    for (const auto w : words_) {
        n += static_cast<std::size_t>(std::popcount(w));
    }
    return n;
}

BitVector BitVector::slice(std::size_t first, std::size_t count) const {
    if (first > size_ || count > size_ - first) {
        throw OutOfRange("BitVector::slice out of range");
    }
    BitVector out(count);
    if ((first & 63) == 0) {
        for (std::size_t w = 0; w < out.words_.size(); ++w) {
            out.words_[w] = words_[(first >> 6) + w];
        }
        out.clear_tail();
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        out.set(i, get(first + i));
    }
    return out;
}

std::vector<std::uint8_t> BitVector::to_bytes_msb_first() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
    for (std::size_t i = 0; i < size_; ++i) {
        if (get(i)) {
            out[i >> 3] |= static_cast<std::uint8_t>(0x80U >> (i & 7));
        }
    }
    return out;
}

BitVector BitVector::from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (nbits > bytes.size() * 8) {
        throw InvalidArgument("not enough bytes for requested bit count");
    }
    BitVector v(nbits);
    for (std::size_t i = 0; i < nbits; ++i) {
        v.set(i, (bytes[i >> 3] >> (7 - (i & 7))) & 1U);
    }
    return v;
}

std::string BitVector::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
        if (get(i)) {
            s[i] = '1';
        }
    }
    return s;
}

void BitVector::clear_tail() noexcept {
    if (const std::size_t r = size_ & 63; r != 0) {
        words_.back() &= (std::uint64_t{1} << r) - 1;
    }
}

}  // namespace mrtg
