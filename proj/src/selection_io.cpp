#include <fmt/format.h>

#include "mrtg/binary_io.hpp"
#include "mrtg/characterization.hpp"

namespace mrtg::characterization {

std::vector<std::uint8_t> serialize_selection(const CellSelection& sel) {
    io::ByteWriter w;
    w.magic("MRSL");
    w.u16(kSelectionFileVersion);
    w.u64(sel.num_addresses);
    w.u64(sel.num_rand_addresses);
    const auto words = sel.mask.words();
    for (std::size_t a = 0; a < sel.num_addresses; ++a) {
        const auto m = static_cast<std::uint16_t>(words[a >> 2] >> (16 * (a & 3)));
        if (m != 0) {
            w.u32(static_cast<std::uint32_t>(a));
            w.u16(m);
        }
    }
    return w.take();
}

CellSelection deserialize_selection(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    r.expect_magic("MRSL");
    if (const auto v = r.u16(); v != kSelectionFileVersion) {
        throw IoError("unsupported selection file version " + std::to_string(v));
    }
    const auto num_addresses = r.u64();
    const auto entries = r.u64();
    if (num_addresses == 0 || num_addresses > (std::uint64_t{1} << 28) || entries > num_addresses ||
        entries * 6 != r.remaining()) {
        throw IoError("selection file header is inconsistent");
    }
    BitVector mask(num_addresses * device::kWordWidth);
    auto words = mask.words();
    std::int64_t prev = -1;
    for (std::uint64_t i = 0; i < entries; ++i) {
        const auto a = r.u32();
        const auto m = r.u16();
        if (static_cast<std::int64_t>(a) <= prev || a >= num_addresses || m == 0) {
            throw IoError("selection file entries must be ascending, in range and non-empty");
        }
        prev = a;
        words[a >> 2] |= std::uint64_t{m} << (16 * (a & 3));
    }
    r.expect_end();
    return CellSelection::from_mask(std::move(mask), num_addresses);
}

void save_selection(const CellSelection& sel, const std::filesystem::path& path) {
    io::write_file(path, serialize_selection(sel));
}

CellSelection load_selection(const std::filesystem::path& path) { return deserialize_selection(io::read_file(path)); }

std::string selection_csv(const CellSelection& sel, const FlipCountVector& fc) {
    if (fc.counts.size() != sel.mask.size()) {
        throw InvalidArgument("flip counts and selection cover different cell counts");
    }
    std::string out = "address,bitmask";
    for (int b = 0; b < 16; ++b) {
        out += fmt::format(",fc{}", b);
    }
    out += '\n';
    const auto words = sel.mask.words();
    for (std::size_t a = 0; a < sel.num_addresses; ++a) {
        const auto m = static_cast<std::uint16_t>(words[a >> 2] >> (16 * (a & 3)));
        if (m == 0) {
            continue;
        }
        out += fmt::format("{},0x{:04X}", a, m);
        for (std::size_t b = 0; b < device::kWordWidth; ++b) {
            out += fmt::format(",{}", fc.counts[a * device::kWordWidth + b]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace mrtg::characterization
