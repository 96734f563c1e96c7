#include "mrtg/extraction.hpp"

#include <json.hpp>

#include "mrtg/binary_io.hpp"
#include "mrtg/error.hpp"
#include "mrtg/parallel.hpp"
#include "mrtg/sha256.hpp"

namespace mrtg::extraction {

void BlockParams::validate() const {
    if (b_len != 512 || d_len != 256) {
        throw InvalidArgument("SHA-256 conditioning needs b_len = 512 and d_len = 256");
    }
}

std::string selection_digest(const characterization::CellSelection& sel) {
    const auto bytes = characterization::serialize_selection(sel);
    const auto d = Sha256::hash(bytes);
    return to_hex(d);
}

Bitstream harvest(device::ChipModel& chip, const characterization::CellSelection& sel,
                  const device::DataPattern& pattern, double t_w, const device::Environment& env, std::size_t rounds) {
    if (sel.num_randcell == 0) {
        throw EmptySelection("selection holds no random cells");
    }
    if (rounds == 0) {
        throw InvalidArgument("harvest needs at least one round");
    }
    if (sel.mask.size() != chip.num_cells()) {
        throw InvalidArgument("selection does not match the chip geometry");
    }
    const auto timing = device::TimingParams::reduced(t_w);
    const auto cells = sel.cells();
    const auto readouts = device::simulate_cells(chip, cells, pattern, timing, env, kHarvestStreamBase, rounds);

    Bitstream out;
    out.kind = StreamKind::Raw;
    out.bits = BitVector(rounds * cells.size());
    std::size_t pos = 0;
    for (const auto& r : readouts) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            out.bits.set(pos++, r.get(k));
        }
    }
    // Leave the array as the last physical round would.
    device::reset(chip);
    device::write(chip, pattern, timing, env, kHarvestStreamBase + rounds - 1);

    out.provenance = {chip.chip_id, t_w, env, selection_digest(sel), rounds};
    return out;
}

std::size_t required_rounds(std::size_t target_bits, const characterization::CellSelection& sel,
                            const BlockParams& params) {
    params.validate();
    if (sel.num_randcell == 0) {
        throw EmptySelection("selection holds no random cells");
    }
    if (target_bits < params.d_len) {
        throw InvalidArgument("target length must be at least one digest");
    }
    const std::size_t blocks = (target_bits + params.d_len - 1) / params.d_len;
    const std::size_t raw_bits = blocks * params.b_len;
    return (raw_bits + sel.num_randcell - 1) / sel.num_randcell;
}

Bitstream condition(const Bitstream& raw, const BlockParams& params) {
    params.validate();
    if (raw.bits.size() < params.b_len) {
        throw InvalidArgument("raw stream shorter than one input block");
    }
    const std::size_t blocks = raw.bits.size() / params.b_len;
    const auto bytes = raw.bits.to_bytes_msb_first();
    const std::size_t block_bytes = params.b_len / 8;
    std::vector<Sha256::Digest> digests(blocks);
    parallel_for(blocks, 256, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            digests[b] = Sha256::hash(std::span(bytes).subspan(b * block_bytes, block_bytes));
        }
    });
    std::vector<std::uint8_t> out_bytes;
    out_bytes.reserve(blocks * 32);
    for (const auto& d : digests) {
        out_bytes.insert(out_bytes.end(), d.begin(), d.end());
    }
    Bitstream out;
    out.kind = StreamKind::Conditioned;
    out.bits = BitVector::from_bytes_msb_first(out_bytes, blocks * params.d_len);
    out.provenance = raw.provenance;
    return out;
}

std::vector<std::uint8_t> encode_binary(const BitVector& bits) {
    io::ByteWriter w;
    w.u64(bits.size());
    w.bytes(bits.to_bytes_msb_first());
    return w.take();
}

BitVector decode_binary(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    const auto n = r.u64();
    if ((n + 7) / 8 != r.remaining()) {
        throw IoError("bitstream length prefix does not match payload size");
    }
    return BitVector::from_bytes_msb_first(r.bytes(r.remaining()), n);
}

void save_binary(const BitVector& bits, const std::filesystem::path& path) { io::write_file(path, encode_binary(bits)); }

BitVector load_binary(const std::filesystem::path& path) { return decode_binary(io::read_file(path)); }

void save_ascii(const BitVector& bits, const std::filesystem::path& path) { io::write_text(path, bits.to_string()); }

BitVector load_ascii(const std::filesystem::path& path) {
    try {
        return BitVector::from_string(io::read_text(path));
    } catch (const InvalidArgument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string provenance_json(const Bitstream& stream) {
    const auto& p = stream.provenance;
    const nlohmann::json j = {{"kind", stream.kind == StreamKind::Raw ? "raw" : "conditioned"},
                              {"bits", stream.bits.size()},
                              {"chip_id", p.chip_id},
                              {"t_w_ns", p.t_w},
                              {"temperature_c", p.env.temperature_c},
                              {"field_mt", p.env.field_mt},
                              {"field_axis", device::to_string(p.env.field_axis)},
                              {"selection_digest", p.selection_digest},
                              {"measurement_count", p.measurement_count}};
    return j.dump(2) + "\n";
}

}  // namespace mrtg::extraction
