#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mrtg {

/// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
public:
    using Digest = std::array<std::uint8_t, 32>;

    Sha256() noexcept { reset(); }

    void reset() noexcept;
    Sha256& update(std::span<const std::uint8_t> data) noexcept;
    Sha256& update(std::string_view text) noexcept;
    Digest finish() noexcept;

    static Digest hash(std::span<const std::uint8_t> data) noexcept;
    static Digest hash(std::string_view text) noexcept;

private:
    void compress(const std::uint8_t* block) noexcept;

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_bytes_ = 0;
    std::size_t buffered_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace mrtg
