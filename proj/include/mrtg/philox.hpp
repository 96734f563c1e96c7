#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mrtg {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A pure function of (counter, key): any draw can be reproduced without
/// replaying earlier ones, so parallel evaluation order does not matter.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    static constexpr Key key_from_seed(std::uint64_t seed) noexcept {
        return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

// Uniform in (0, 1) from 32 random bits; never returns 0 or 1.
inline double to_open_unit(std::uint32_t x) noexcept { return (static_cast<double>(x) + 0.5) * 0x1p-32; }

/// Sequential draws from a fixed (key, stream) pair. Each block of four
/// 32-bit outputs comes from one Philox call with the block index in ctr[3].
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint32_t cell, std::uint64_t stream, std::uint32_t domain) noexcept
        : key_(Philox4x32::key_from_seed(seed)),
          base_{cell, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), domain} {}

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) {
            Philox4x32::Counter ctr = base_;
            ctr[3] += block_++ << 8;
            buf_ = Philox4x32::apply(ctr, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    double uniform() noexcept { return to_open_unit(next_u32()); }

    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Marsaglia-Tsang; shape > 0.
    double gamma(double shape) noexcept {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v;
            }
        }
    }

    double beta(double a, double b) noexcept {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

private:
    Philox4x32::Key key_;
    Philox4x32::Counter base_;
    std::array<std::uint32_t, 4> buf_{};
    std::uint32_t block_ = 0;
    int pos_ = 4;
};

}  // namespace mrtg
