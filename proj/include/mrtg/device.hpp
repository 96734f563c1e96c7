#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrtg/bit_vector.hpp"

namespace mrtg::device {

inline constexpr std::size_t kWordWidth = 16;
// Words per physical row; used only by the checkerboard and striped patterns.
inline constexpr std::size_t kRowWords = 64;
// Room temperature at which tau_ns is specified.
inline constexpr double kReferenceTempC = 26.0;
// Manufacturer-recommended write pulse width.
inline constexpr double kNominalWritePulseNs = 15.0;

/// Write-cycle timing (write-enable controlled cycle). All values in ns.
struct TimingParams {
    double t_wc = 35.0;  // write cycle
    double t_w = kNominalWritePulseNs;  // write pulse width
    double t_wr = 5.0;  // write recovery
    double t_dv = 10.0;  // data valid to end of write

    static TimingParams nominal() { return {}; }
    /// Nominal cycle with the write pulse shortened to `t_w`; t_dv is capped at t_w.
    static TimingParams reduced(double t_w);

    void validate() const;
};

enum class FieldAxis : std::uint8_t { PlusX, MinusX, PlusY, MinusY, PlusZ, MinusZ };

struct Environment {
    double temperature_c = kReferenceTempC;
    double field_mt = 0.0;
    FieldAxis field_axis = FieldAxis::PlusX;

    static Environment room() { return {}; }
};

const char* to_string(FieldAxis axis);
FieldAxis parse_field_axis(const std::string& text);

struct CellParams {
    double tau_ns = 1.0;
    double steepness = 1.0;  // 1/ns
    double metastable_frac = 0.0;
    double metastable_bias = 0.5;

    void validate() const;

    friend bool operator==(const CellParams&, const CellParams&) = default;
};

struct EnvCoeffs {
    double temp_tau_slope = 0.05;  // ns per degC below the reference
    double temp_tau_slope_hot = 0.005;  // ns per degC above the reference
    double field_threshold_mt = 10.0;
    double field_tau_slope = 0.02;  // ns per mT above the threshold, in-plane axes only
    double temp_min_c = 0.0;
    double temp_max_c = 70.0;

    void validate() const;

    friend bool operator==(const EnvCoeffs&, const EnvCoeffs&) = default;
};

/// Per-class latent parameter distribution.
struct CellClassDist {
    double tau_mean = 1.0;
    double tau_sd = 0.1;
    double tau_min = 0.05;
    double tau_max = 10.0;
    double steepness_median = 2.0;
    double steepness_log_sd = 0.05;
    double metastable_mean = 0.3;
    // Beta concentration for metastable_frac; 0 makes it the constant mean.
    double metastable_concentration = 0.0;

    void validate(const char* name) const;
};

/// Process-variation population. Each word is "marginal" with probability
/// marginal_word_fraction; inside a marginal word each cell is drawn from the
/// marginal class with probability marginal_cell_fraction. Every other cell is
/// slow with probability slow_weight, otherwise fast.
struct Population {
    CellClassDist fast{0.45, 0.12, 0.05, 1.0, 2.0, 0.05, 0.3, 0.0};
    CellClassDist slow{3.6, 0.2, 3.2, 4.4, 8.0, 0.1, 0.02, 40.0};
    CellClassDist marginal{2.52, 0.05, 2.3, 2.75, 2.0, 0.05, 0.0, 0.0};
    double slow_weight = 0.31;
    double marginal_word_fraction = 0.0105;
    double marginal_cell_fraction = 0.85;
    double bias_alpha = 2.0;
    double bias_beta = 2.0;

    void validate() const;
};

struct ChipConfig {
    std::string chip_id = "sim-chip";
    std::size_t num_addresses = 65536;
    Population population;
    EnvCoeffs env_coeffs;
    std::uint64_t seed = 1;  // used when no explicit seed is supplied

    void validate() const;
};

ChipConfig load_config(const std::filesystem::path& path);
ChipConfig parse_config(const std::string& json_text);
std::string config_to_json(const ChipConfig& config);

struct ChipModel {
    std::string chip_id;
    std::size_t num_addresses = 0;
    std::size_t word_width = kWordWidth;
    std::vector<CellParams> cells;
    BitVector stored;
    EnvCoeffs env_coeffs;
    std::uint64_t seed = 0;

    std::size_t num_cells() const noexcept { return cells.size(); }

    friend bool operator==(const ChipModel&, const ChipModel&) = default;
};

struct DataPattern {
    struct Solid {
        std::uint16_t word;
    };
    struct Checkerboard {
        std::uint16_t word_a;
        std::uint16_t word_b;
    };
    struct Striped {
        std::uint16_t word_a;
        std::uint16_t word_b;
    };
    struct Random {
        std::uint64_t seed;
    };

    std::variant<Solid, Checkerboard, Striped, Random> kind;

    static DataPattern solid(std::uint16_t w) { return {Solid{w}}; }
    static DataPattern checkerboard(std::uint16_t a, std::uint16_t b) { return {Checkerboard{a, b}}; }
    static DataPattern striped(std::uint16_t a, std::uint16_t b) { return {Striped{a, b}}; }
    static DataPattern random(std::uint64_t seed) { return {Random{seed}}; }

    std::uint16_t word_at(std::size_t address) const;
    /// Per-cell bits for addresses [0, num_addresses): cell = address * 16 + bit.
    BitVector expand(std::size_t num_addresses) const;

    std::string describe() const;
};

/// Parses "solid:0x0000", "checkerboard:0xAAAA:0x5555", "striped:0xFFFF:0x0000", "random:<seed>".
DataPattern parse_pattern(const std::string& text);

/// Instantiates the cell population. Deterministic in (config, seed); all bits
/// start in the reset (all-ones) state.
ChipModel create_chip(const ChipConfig& config, std::uint64_t seed);

/// Per-cell toggle success probability for the given timing and environment.
double toggle_probability(const CellParams& cell, const EnvCoeffs& coeffs, double t_w, const Environment& env);

/// tau shifted by temperature and (above threshold) external field.
double effective_tau(const CellParams& cell, const EnvCoeffs& coeffs, const Environment& env);

void validate_environment(const Environment& env, const EnvCoeffs& coeffs);

/// Toggle-write of `pattern` over the whole array. Bits already equal to their
/// target are never touched. Randomness is keyed by (seed, cell, stream).
void write(ChipModel& chip, const DataPattern& pattern, const TimingParams& timing, const Environment& env,
           std::uint64_t stream);

std::vector<std::uint16_t> read(const ChipModel& chip, std::size_t first_address, std::size_t count);

/// Unconditional nominal-timing write of 0xFFFF everywhere.
void reset(ChipModel& chip);

/// Fraction of cells whose stored bit differs from `pattern`.
double error_fraction(const ChipModel& chip, const DataPattern& pattern);

}  // namespace mrtg::device

namespace mrtg {

/// N x M readout matrix from repeated reset -> reduced write -> read cycles.
struct MeasurementMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> data;  // row-major, words_per_row() words each
    BitVector written_bits;
    device::DataPattern pattern = device::DataPattern::solid(0);
    double t_w = 0.0;
    device::Environment env;

    std::size_t words_per_row() const noexcept { return (cols + 63) / 64; }
    bool get(std::size_t row, std::size_t col) const noexcept {
        return (data[row * words_per_row() + (col >> 6)] >> (col & 63)) & 1U;
    }
    void set(std::size_t row, std::size_t col, bool v) noexcept {
        auto& w = data[row * words_per_row() + (col >> 6)];
        const std::uint64_t m = std::uint64_t{1} << (col & 63);
        w = v ? (w | m) : (w & ~m);
    }
    BitVector row(std::size_t r) const;

    /// Builds a matrix from explicit rows (used by tests and tools).
    static MeasurementMatrix from_rows(const std::vector<BitVector>& rows, BitVector written);

    friend bool operator==(const MeasurementMatrix& a, const MeasurementMatrix& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data && a.written_bits == b.written_bits;
    }
};

}  // namespace mrtg

namespace mrtg::device {

/// Row i = reset, write(pattern, timing, stream i), read. Leaves the chip in
/// the state of the last row.
MeasurementMatrix measure(ChipModel& chip, const DataPattern& pattern, const TimingParams& timing,
                          const Environment& env, std::size_t n);

/// Readouts of the listed cells after reset -> write(stream) for each stream
/// in [first_stream, first_stream + count). Equivalent to the full
/// reset/write/read loop restricted to `cells`; the chip itself is not touched.
std::vector<BitVector> simulate_cells(const ChipModel& chip, std::span<const std::size_t> cells,
                                      const DataPattern& pattern, const TimingParams& timing,
                                      const Environment& env, std::uint64_t first_stream, std::size_t count);

// Binary chip file: "MRTG", u16 version, then little-endian fields.
inline constexpr std::uint16_t kChipFileVersion = 1;
void save_chip(const ChipModel& chip, const std::filesystem::path& path);
ChipModel load_chip(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_chip(const ChipModel& chip);
ChipModel deserialize_chip(std::span<const std::uint8_t> bytes);

}  // namespace mrtg::device
