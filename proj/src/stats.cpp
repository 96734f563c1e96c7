#include "mrtg/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "mrtg/error.hpp"
#include "mrtg/special_functions.hpp"

namespace mrtg::stats {
namespace {

constexpr std::size_t kMaxTemplateBits = 24;

void require_nonempty(const BitSequence& seq, const char* test) {
    if (seq.size() == 0) {
        throw InvalidArgument(std::string(test) + ": empty sequence");
    }
}

TestResult make_result(const char* name, double p, double statistic, double alpha) {
    TestResult r;
    r.test_name = name;
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.statistic = statistic;
    r.passed = r.p_value >= alpha;
    return r;
}

std::size_t floor_log2(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(std::bit_width(n) - 1); }

// Counts of each wrapped m-bit template starting at every position.
std::vector<std::uint32_t> template_counts(const BitSequence& seq, std::size_t m) {
    const std::size_t n = seq.size();
    std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
    const std::uint32_t mask = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
    std::uint32_t window = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        window = (window << 1) | seq.bits[i % n];
    }
    for (std::size_t i = 0; i < n; ++i) {
        window = ((window << 1) | seq.bits[(i + m - 1) % n]) & mask;
        ++counts[window];
    }
    return counts;
}

}  // namespace

BitSequence::BitSequence(std::vector<std::uint8_t> b) : bits(std::move(b)) {
    for (const auto x : bits) {
        if (x > 1) {
            throw InvalidArgument("bit sequence elements must be 0 or 1");
        }
    }
}

BitSequence::BitSequence(const BitVector& v) : bits(v.size()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        bits[i] = v.get(i) ? 1 : 0;
    }
}

BitSequence BitSequence::from_string(std::string_view s) {
    std::vector<std::uint8_t> b;
    b.reserve(s.size());
    for (const char c : s) {
        if (c == '0' || c == '1') {
            b.push_back(static_cast<std::uint8_t>(c - '0'));
        } else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
            throw InvalidArgument("bit sequence text may only contain '0', '1' and whitespace");
        }
    }
    return BitSequence(std::move(b));
}

BitSequence BitSequence::complement() const {
    BitSequence c;
    c.bits.resize(bits.size());
    std::transform(bits.begin(), bits.end(), c.bits.begin(), [](std::uint8_t b) { return std::uint8_t(b ^ 1U); });
    return c;
}

TestResult frequency_monobit(const BitSequence& seq, double alpha) {
    require_nonempty(seq, "frequency");
    const double n = static_cast<double>(seq.size());
    long long s = 0;
    for (const auto b : seq.bits) {
        s += b ? 1 : -1;
    }
    const double s_obs = std::fabs(static_cast<double>(s)) / std::sqrt(n);
    auto r = make_result("Frequency", special::erfc(s_obs / std::numbers::sqrt2), s_obs, alpha);
    if (seq.size() < 100) {
        r.warning = "sequence shorter than the recommended 100 bits";
    }
    return r;
}

TestResult block_frequency(const BitSequence& seq, std::size_t m_block, double alpha) {
    require_nonempty(seq, "block frequency");
    if (m_block < 2) {
        throw InvalidArgument("block frequency: block length must be at least 2");
    }
    if (seq.size() < m_block) {
        throw InvalidArgument("block frequency: sequence shorter than one block");
    }
    const std::size_t blocks = seq.size() / m_block;
    double sum = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < m_block; ++j) {
            ones += seq.bits[b * m_block + j];
        }
        const double pi = static_cast<double>(ones) / static_cast<double>(m_block) - 0.5;
        sum += pi * pi;
    }
    const double chi2 = 4.0 * static_cast<double>(m_block) * sum;
    return make_result("BlockFrequency", special::igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0), chi2, alpha);
}

TestResult runs(const BitSequence& seq, double alpha) {
    require_nonempty(seq, "runs");
    const std::size_t n = seq.size();
    const double nd = static_cast<double>(n);
    std::size_t ones = 0;
    std::size_t v = 1;
    for (std::size_t i = 0; i < n; ++i) {
        ones += seq.bits[i];
        if (i + 1 < n && seq.bits[i] != seq.bits[i + 1]) {
            ++v;
        }
    }
    const double pi = static_cast<double>(ones) / nd;
    const double vd = static_cast<double>(v);
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(nd)) {
        auto r = make_result("Runs", 0.0, vd, alpha);
        r.warning = "frequency prerequisite failed";
        return r;
    }
    const double q = pi * (1.0 - pi);
    const double p = special::erfc(std::fabs(vd - 2.0 * nd * q) / (2.0 * std::sqrt(2.0 * nd) * q));
    return make_result("Runs", p, vd, alpha);
}

LongestRunTable longest_run_table(std::size_t n) {
    if (n < 128) {
        throw InvalidArgument("longest run: sequence needs at least 128 bits");
    }
    if (n < 6272) {
        return {8, 1, {0.21484375, 0.3671875, 0.23046875, 0.1875}};
    }
    if (n < 750000) {
        return {128, 4, {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847}};
    }
    return {10000, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
}

TestResult longest_run(const BitSequence& seq, double alpha) {
    const auto table = longest_run_table(seq.size());
    const std::size_t k = table.probabilities.size() - 1;
    const std::size_t blocks = seq.size() / table.block_len;
    std::vector<std::size_t> nu(k + 1, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        int longest = 0;
        int run = 0;
        for (std::size_t j = 0; j < table.block_len; ++j) {
            run = seq.bits[b * table.block_len + j] ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        const int idx = std::clamp(longest - table.min_category, 0, static_cast<int>(k));
        ++nu[static_cast<std::size_t>(idx)];
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double expected = static_cast<double>(blocks) * table.probabilities[i];
        const double d = static_cast<double>(nu[i]) - expected;
        chi2 += d * d / expected;
    }
    return make_result("LongestRun", special::igamc(static_cast<double>(k) / 2.0, chi2 / 2.0), chi2, alpha);
}

TestResult cumulative_sums(const BitSequence& seq, CusumMode mode, double alpha) {
    require_nonempty(seq, "cumulative sums");
    const long long n = static_cast<long long>(seq.size());
    long long s = 0;
    long long z = 0;
    for (long long i = 0; i < n; ++i) {
        const std::size_t idx = static_cast<std::size_t>(mode == CusumMode::Forward ? i : n - 1 - i);
        s += seq.bits[idx] ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    // Integer bounds truncate toward zero, as in the reference implementation.
    double sum1 = 0.0;
    for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
        sum1 += special::normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
        sum1 -= special::normal_cdf(static_cast<double>((4 * k - 1) * z) / sqrt_n);
    }
    double sum2 = 0.0;
    for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
        sum2 += special::normal_cdf(static_cast<double>((4 * k + 3) * z) / sqrt_n);
        sum2 -= special::normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
    }
    auto r = make_result(mode == CusumMode::Forward ? "CumulativeSums" : "CumulativeSums(reverse)", 1.0 - sum1 + sum2,
                         static_cast<double>(z), alpha);
    if (seq.size() < 100) {
        r.warning = "sequence shorter than the recommended 100 bits";
    }
    return r;
}

namespace {

// Sum of squared wrapped-template counts; the single empty template gives n^2.
double square_sum(const BitSequence& seq, std::size_t m) {
    if (m == 0) {
        const double n = static_cast<double>(seq.size());
        return n * n;
    }
    double sum = 0.0;
    for (const auto c : template_counts(seq, m)) {
        sum += static_cast<double>(c) * static_cast<double>(c);
    }
    return sum;
}

}  // namespace

double serial_psi_sq(const BitSequence& seq, std::size_t m) {
    if (m == 0) {
        return 0.0;
    }
    const double n = static_cast<double>(seq.size());
    return std::ldexp(square_sum(seq, m), static_cast<int>(m)) / n - n;
}

TestResult serial(const BitSequence& seq, std::size_t m, double alpha) {
    require_nonempty(seq, "serial");
    if (m < 2 || m > seq.size() || m > kMaxTemplateBits) {
        throw InvalidArgument(fmt::format("serial: template length {} invalid for {} bits", m, seq.size()));
    }
    // Differences of psi^2 taken on the integer square sums, so small inputs
    // give exact statistics instead of cancellation noise.
    const double s0 = std::ldexp(square_sum(seq, m), static_cast<int>(m));
    const double s1 = std::ldexp(square_sum(seq, m - 1), static_cast<int>(m) - 1);
    const double s2 = std::ldexp(square_sum(seq, m - 2), static_cast<int>(m) - 2);
    const double n = static_cast<double>(seq.size());
    const double del1 = (s0 - s1) / n;
    const double del2 = (s0 - 2.0 * s1 + s2) / n;
    const double p1 = special::igamc(std::ldexp(1.0, static_cast<int>(m) - 2), std::max(0.0, del1) / 2.0);
    const double p2 = special::igamc(std::ldexp(1.0, static_cast<int>(m) - 3), std::max(0.0, del2) / 2.0);
    auto r = make_result("Serial", p1, del1, alpha);
    r.p_value2 = std::clamp(p2, 0.0, 1.0);
    r.statistic2 = del2;
    r.passed = r.p_value >= alpha && *r.p_value2 >= alpha;
    if (floor_log2(seq.size()) < 2 || m + 2 >= floor_log2(seq.size())) {
        r.warning = "template length above the recommended floor(log2 n) - 2";
    }
    return r;
}

double apen_phi(const BitSequence& seq, std::size_t m) {
    if (m == 0) {
        return 0.0;
    }
    const auto counts = template_counts(seq, m);
    const double n = static_cast<double>(seq.size());
    double phi = 0.0;
    for (const auto c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            phi += p * std::log(p);
        }
    }
    return phi;
}

TestResult approximate_entropy(const BitSequence& seq, std::size_t m, double alpha) {
    require_nonempty(seq, "approximate entropy");
    if (m < 1 || m + 1 > seq.size() || m + 1 > kMaxTemplateBits) {
        throw InvalidArgument(fmt::format("approximate entropy: block length {} invalid for {} bits", m, seq.size()));
    }
    const double apen = apen_phi(seq, m) - apen_phi(seq, m + 1);
    const double n = static_cast<double>(seq.size());
    const double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
    const double p = special::igamc(std::ldexp(1.0, static_cast<int>(m) - 1), std::max(0.0, chi2) / 2.0);
    auto r = make_result("ApproximateEntropy", p, apen, alpha);
    if (floor_log2(seq.size()) < 5 || m + 5 >= floor_log2(seq.size())) {
        r.warning = "block length above the recommended floor(log2 n) - 5";
    }
    return r;
}

}  // namespace mrtg::stats
