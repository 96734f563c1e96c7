#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "mrtg/bit_vector.hpp"
#include "mrtg/characterization.hpp"
#include "mrtg/device.hpp"

namespace mrtg::extraction {

// Harvest rounds draw from measurement streams at or above this index so they
// never repeat the randomness used during characterization.
inline constexpr std::uint64_t kHarvestStreamBase = std::uint64_t{1} << 63;

enum class StreamKind : std::uint8_t { Raw, Conditioned };

struct Provenance {
    std::string chip_id;
    double t_w = 0.0;
    device::Environment env;
    std::string selection_digest;  // hex SHA-256 of the serialized selection
    std::size_t measurement_count = 0;
};

struct Bitstream {
    BitVector bits;
    StreamKind kind = StreamKind::Raw;
    Provenance provenance;
};

struct BlockParams {
    std::size_t b_len = 512;
    std::size_t d_len = 256;

    void validate() const;
};

std::string selection_digest(const characterization::CellSelection& sel);

/// Repeats reset -> reduced write -> read `rounds` times, appending the
/// selected cells' readouts in ascending (address, bit) order each round.
Bitstream harvest(device::ChipModel& chip, const characterization::CellSelection& sel,
                  const device::DataPattern& pattern, double t_w, const device::Environment& env, std::size_t rounds);

/// Smallest round count whose raw output fills enough whole blocks for
/// `target_bits` conditioned bits.
std::size_t required_rounds(std::size_t target_bits, const characterization::CellSelection& sel,
                            const BlockParams& params = {});

/// SHA-256 of each full b_len-bit block (MSB-first byte packing), digests
/// concatenated in order. A trailing partial block is dropped.
Bitstream condition(const Bitstream& raw, const BlockParams& params = {});

// Raw binary: u64 little-endian bit count, then MSB-first packed bytes.
std::vector<std::uint8_t> encode_binary(const BitVector& bits);
BitVector decode_binary(std::span<const std::uint8_t> bytes);
void save_binary(const BitVector& bits, const std::filesystem::path& path);
BitVector load_binary(const std::filesystem::path& path);

// ASCII '0'/'1', no separators.
void save_ascii(const BitVector& bits, const std::filesystem::path& path);
BitVector load_ascii(const std::filesystem::path& path);

/// JSON sidecar describing where a stream came from.
std::string provenance_json(const Bitstream& stream);

}  // namespace mrtg::extraction
