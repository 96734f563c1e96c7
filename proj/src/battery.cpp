#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>

#include "mrtg/binary_io.hpp"
#include "mrtg/error.hpp"
#include "mrtg/parallel.hpp"
#include "mrtg/special_functions.hpp"
#include "mrtg/stats.hpp"

namespace mrtg::stats {
namespace {

const std::array<const char*, 9> kRowNames = {
    "Frequency", "BlockFrequency", "CumulativeSums(fwd)", "CumulativeSums(rev)", "Runs",
    "LongestRun", "ApproximateEntropy", "Serial(p1)", "Serial(p2)"};

std::size_t log2_floor(std::size_t n) { return static_cast<std::size_t>(std::bit_width(n) - 1); }

}  // namespace

double proportion_threshold(double alpha, std::size_t s) {
    if (s == 0) {
        throw InvalidArgument("proportion threshold needs at least one sequence");
    }
    const double p = 1.0 - alpha;
    return p - 3.0 * std::sqrt(alpha * p / static_cast<double>(s));
}

std::size_t min_pass_count(double alpha, std::size_t s) {
    const double t = proportion_threshold(alpha, s) * static_cast<double>(s);
    return t <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(t));
}

double uniformity_p_value(const std::vector<double>& p_values) {
    if (p_values.empty()) {
        throw InvalidArgument("uniformity needs at least one p-value");
    }
    std::array<std::size_t, 10> bins{};
    for (const double p : p_values) {
        const auto idx = std::min<std::size_t>(9, static_cast<std::size_t>(std::max(0.0, p) * 10.0));
        ++bins[idx];
    }
    const double expected = static_cast<double>(p_values.size()) / 10.0;
    double chi2 = 0.0;
    for (const auto b : bins) {
        const double d = static_cast<double>(b) - expected;
        chi2 += d * d / expected;
    }
    return special::igamc(9.0 / 2.0, chi2 / 2.0);
}

BatterySummary run_battery(const std::vector<BitSequence>& seqs, const BatteryConfig& config) {
    if (seqs.empty()) {
        throw InvalidArgument("battery needs at least one sequence");
    }
    const std::size_t n = seqs.front().size();
    for (const auto& s : seqs) {
        if (s.size() != n) {
            throw InvalidArgument("battery sequences must all have the same length");
        }
    }
    if (n < 128) {
        throw InvalidArgument("battery sequences need at least 128 bits");
    }
    std::size_t serial_m = config.serial_m;
    std::size_t apen_m = config.apen_m;
    const std::size_t block_m = std::min(config.block_frequency_m, n);
    if (config.clamp_template_lengths) {
        const std::size_t lg = log2_floor(n);
        serial_m = std::clamp<std::size_t>(serial_m, 2, std::max<std::size_t>(2, lg - 3));
        apen_m = std::clamp<std::size_t>(apen_m, 1, std::max<std::size_t>(1, lg - 6));
    }

    const std::size_t s = seqs.size();
    std::vector<std::array<double, 9>> p(s);
    parallel_for(s, 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto& q = seqs[i];
            const auto ser = serial(q, serial_m, config.alpha);
            p[i] = {frequency_monobit(q, config.alpha).p_value,
                    block_frequency(q, block_m, config.alpha).p_value,
                    cumulative_sums(q, CusumMode::Forward, config.alpha).p_value,
                    cumulative_sums(q, CusumMode::Reverse, config.alpha).p_value,
                    runs(q, config.alpha).p_value,
                    longest_run(q, config.alpha).p_value,
                    approximate_entropy(q, apen_m, config.alpha).p_value,
                    ser.p_value,
                    *ser.p_value2};
        }
    });

    BatterySummary sum;
    sum.num_sequences = s;
    sum.sequence_length = n;
    sum.alpha = config.alpha;
    sum.proportion_threshold = proportion_threshold(config.alpha, s);
    sum.min_pass = min_pass_count(config.alpha, s);
    sum.verdict = true;
    for (std::size_t t = 0; t < kRowNames.size(); ++t) {
        BatteryRow row;
        row.test_name = kRowNames[t];
        row.total = s;
        for (std::size_t i = 0; i < s; ++i) {
            const double pv = p[i][t];
            row.p_values.push_back(pv);
            row.histogram[std::min<std::size_t>(9, static_cast<std::size_t>(pv * 10.0))]++;
            if (pv >= config.alpha) {
                ++row.passed;
            }
        }
        row.p_uniformity = uniformity_p_value(row.p_values);
        row.proportion_ok = row.passed >= sum.min_pass;
        row.uniformity_ok = row.p_uniformity >= kUniformityFloor;
        sum.verdict = sum.verdict && row.ok();
        sum.rows.push_back(std::move(row));
    }
    return sum;
}

std::string battery_csv(const BatterySummary& s) {
    std::string out = "test,p_uniformity,proportion,pass\n";
    for (const auto& r : s.rows) {
        out += fmt::format("{},{:.6f},{}/{},{}\n", r.test_name, r.p_uniformity, r.passed, r.total,
                           r.ok() ? "PASS" : "FAIL");
    }
    return out;
}

std::string battery_table(const BatterySummary& s) {
    std::string out;
    out += fmt::format("{} sequences x {} bits, alpha = {}\n", s.num_sequences, s.sequence_length, s.alpha);
    out += std::string(78, '-') + "\n";
    out += " C1  C2  C3  C4  C5  C6  C7  C8  C9 C10   P-VALUE  PROPORTION  STATISTICAL TEST\n";
    out += std::string(78, '-') + "\n";
    for (const auto& r : s.rows) {
        for (const auto h : r.histogram) {
            out += fmt::format("{:3} ", h);
        }
        out += fmt::format("{:9.6f}{}  {:>6}/{:<3}{}  {}\n", r.p_uniformity, r.uniformity_ok ? " " : "*", r.passed,
                           r.total, r.proportion_ok ? " " : "*", r.test_name);
    }
    out += std::string(78, '-') + "\n";
    out += fmt::format("Minimum pass count: {} of {} (proportion threshold {:.4f}); uniformity floor {}\n", s.min_pass,
                       s.num_sequences, s.proportion_threshold, kUniformityFloor);
    out += fmt::format("Verdict: {}\n", s.verdict ? "PASS" : "FAIL");
    return out;
}

void export_sts(const BitSequence& seq, const std::filesystem::path& destination) {
    if (seq.size() == 0) {
        throw InvalidArgument("cannot export an empty sequence");
    }
    std::string text(seq.size(), '0');
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq.bits[i]) {
            text[i] = '1';
        }
    }
    io::write_text(destination, text);
}

BitSequence import_sts(const std::filesystem::path& source) {
    try {
        return BitSequence::from_string(io::read_text(source));
    } catch (const InvalidArgument& e) {
        throw IoError(source.string() + ": " + e.what());
    }
}

}  // namespace mrtg::stats
