#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrtg/bit_vector.hpp"
#include "mrtg/device.hpp"

namespace mrtg::characterization {

struct SweepPoint {
    double t_w = 0.0;
    double error_fraction = 0.0;
};

/// Mean fraction of cells reading back different from the written pattern,
/// one entry per requested write pulse width.
std::vector<SweepPoint> sweep_tw(device::ChipModel& chip, const device::DataPattern& pattern,
                                 const std::vector<double>& tw_list, const device::Environment& env, std::size_t n);

/// Pulse width with the largest error fraction; ties go to the larger t_w.
double choose_tw(const std::vector<SweepPoint>& sweep);

/// Mean over rows of the per-row error fraction against written_bits.
double mean_error_fraction(const MeasurementMatrix& m);

struct FlipCountVector {
    std::vector<std::uint16_t> counts;
    std::size_t n_measurements = 0;
};

/// Per-cell number of readout changes between consecutive measurements.
FlipCountVector count_flips(const MeasurementMatrix& m);

struct SelectionThresholds {
    int th_l = 0;
    int th_u = 0;

    /// th_u defaults to N - 1. Throws if th_l is outside [1, N - 1] or th_u < th_l.
    static SelectionThresholds make(int th_l, std::optional<int> th_u, std::size_t n_measurements);
};

struct CellSelection {
    BitVector mask;
    std::size_t num_addresses = 0;
    std::size_t num_randcell = 0;
    std::size_t num_rand_addresses = 0;
    double rand_addr_fraction = 0.0;  // percent of addresses with >= 1 selected cell
    std::optional<double> bits_per_rand_addr;  // absent when no address qualifies

    /// Selected cell indices in ascending (address, bit) order.
    std::vector<std::size_t> cells() const;
    /// Recomputes the derived statistics from `mask`.
    static CellSelection from_mask(BitVector mask, std::size_t num_addresses);
};

CellSelection select_cells(const FlipCountVector& fc, const SelectionThresholds& th);

enum class CellLabel : std::uint8_t { PersistentCorrect, PersistentError, NoiseProne };

struct CellTaxonomy {
    std::vector<CellLabel> labels;
    std::size_t persistent_correct = 0;
    std::size_t persistent_error = 0;
    std::size_t noise_prone = 0;

    double invariant_fraction() const noexcept {
        return labels.empty() ? 0.0
                              : static_cast<double>(persistent_correct + persistent_error) /
                                    static_cast<double>(labels.size());
    }
};

CellTaxonomy classify_cells(const MeasurementMatrix& m);

/// p * (n - 1): expected flip count of a cell that flips with probability p.
double expected_threshold(std::size_t n, double p);

/// Starting point for an operator-chosen th_l: round(0.6 * (n - 1) / 2).
int suggest_lower_threshold(std::size_t n);

// Compact selection file: "MRSL", u16 version, u64 num_addresses, u64 entry
// count, then (u32 address, u16 mask) per address holding a selected cell.
inline constexpr std::uint16_t kSelectionFileVersion = 1;
std::vector<std::uint8_t> serialize_selection(const CellSelection& sel);
CellSelection deserialize_selection(std::span<const std::uint8_t> bytes);
void save_selection(const CellSelection& sel, const std::filesystem::path& path);
CellSelection load_selection(const std::filesystem::path& path);

/// CSV: address,bitmask,fc0..fc15 for each address holding a selected cell.
std::string selection_csv(const CellSelection& sel, const FlipCountVector& fc);

}  // namespace mrtg::characterization
