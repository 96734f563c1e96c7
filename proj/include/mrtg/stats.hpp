#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrtg/bit_vector.hpp"

namespace mrtg::stats {

inline constexpr double kDefaultAlpha = 0.01;
// Uniformity-of-p-values floor applied at battery level.
inline constexpr double kUniformityFloor = 0.0001;

struct BitSequence {
    std::vector<std::uint8_t> bits;  // each element 0 or 1

    BitSequence() = default;
    explicit BitSequence(std::vector<std::uint8_t> b);
    explicit BitSequence(const BitVector& v);
    static BitSequence from_string(std::string_view s);

    std::size_t size() const noexcept { return bits.size(); }
    BitSequence complement() const;
};

struct TestResult {
    std::string test_name;
    double p_value = 0.0;
    bool passed = false;
    double statistic = 0.0;
    // Serial reports a second p-value (and its statistic).
    std::optional<double> p_value2;
    std::optional<double> statistic2;
    std::string warning;
};

enum class CusumMode { Forward, Reverse };

TestResult frequency_monobit(const BitSequence& seq, double alpha = kDefaultAlpha);
TestResult block_frequency(const BitSequence& seq, std::size_t m_block, double alpha = kDefaultAlpha);
TestResult runs(const BitSequence& seq, double alpha = kDefaultAlpha);
TestResult longest_run(const BitSequence& seq, double alpha = kDefaultAlpha);
TestResult cumulative_sums(const BitSequence& seq, CusumMode mode, double alpha = kDefaultAlpha);
TestResult serial(const BitSequence& seq, std::size_t m, double alpha = kDefaultAlpha);
TestResult approximate_entropy(const BitSequence& seq, std::size_t m, double alpha = kDefaultAlpha);

/// Serial psi-squared statistic over wrapped m-bit templates (psi^2_0 = 0).
double serial_psi_sq(const BitSequence& seq, std::size_t m);
/// Approximate-entropy phi(m) over wrapped m-bit templates (phi(0) = 0).
double apen_phi(const BitSequence& seq, std::size_t m);

// Longest-run category layout for a sequence length.
struct LongestRunTable {
    std::size_t block_len;
    int min_category;  // run lengths <= this fall in category 0
    std::vector<double> probabilities;
};
LongestRunTable longest_run_table(std::size_t n);

struct BatteryConfig {
    double alpha = kDefaultAlpha;
    std::size_t block_frequency_m = 128;
    std::size_t serial_m = 16;
    std::size_t apen_m = 10;
    // Clamp serial_m / apen_m to the recommended limits for the sequence length.
    bool clamp_template_lengths = true;
};

struct BatteryRow {
    std::string test_name;
    std::vector<double> p_values;  // one per sequence
    std::size_t passed = 0;
    std::size_t total = 0;
    double p_uniformity = 0.0;
    std::array<std::size_t, 10> histogram{};
    bool proportion_ok = false;
    bool uniformity_ok = false;

    bool ok() const noexcept { return proportion_ok && uniformity_ok; }
};

struct BatterySummary {
    std::vector<BatteryRow> rows;
    std::size_t num_sequences = 0;
    std::size_t sequence_length = 0;
    double alpha = kDefaultAlpha;
    double proportion_threshold = 0.0;
    std::size_t min_pass = 0;
    bool verdict = false;
};

/// (1 - alpha) - 3 sqrt(alpha (1 - alpha) / s).
double proportion_threshold(double alpha, std::size_t s);
/// Minimum number of passing sequences out of s: floor(s * threshold).
std::size_t min_pass_count(double alpha, std::size_t s);
/// Chi-squared uniformity p-value of p-values over 10 equal bins.
double uniformity_p_value(const std::vector<double>& p_values);

BatterySummary run_battery(const std::vector<BitSequence>& seqs, const BatteryConfig& config = {});

std::string battery_csv(const BatterySummary& s);
std::string battery_table(const BatterySummary& s);

void export_sts(const BitSequence& seq, const std::filesystem::path& destination);
BitSequence import_sts(const std::filesystem::path& source);

}  // namespace mrtg::stats
