#include "mrtg/device.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "mrtg/error.hpp"
#include "mrtg/parallel.hpp"
#include "mrtg/philox.hpp"

namespace mrtg::device {
namespace {

// Counter domains (ctr[3] base) so generation and write draws never collide.
constexpr std::uint32_t kDomainWrite = 0;
constexpr std::uint32_t kDomainCell = 1;
constexpr std::uint32_t kDomainWord = 2;
constexpr std::uint32_t kDomainPattern = 3;

// Addresses per parallel chunk; 4 words x 16 bits = one 64-bit storage word.
constexpr std::size_t kAddressGrain = 64;

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw InvalidArgument(what);
    }
}

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Probability in [0, 1] as a threshold against a uniform 32-bit draw.
std::uint64_t to_threshold(double p) {
    if (!(p > 0.0)) {
        return 0;
    }
    if (p >= 1.0) {
        return std::uint64_t{1} << 32;
    }
    return static_cast<std::uint64_t>(std::ldexp(p, 32));
}

double truncated_normal(CounterStream& s, double mean, double sd, double lo, double hi) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        const double x = mean + sd * s.normal();
        if (x >= lo && x <= hi) {
            return x;
        }
    }
    return std::clamp(mean, lo, hi);
}

CellParams draw_cell(CounterStream& s, const CellClassDist& d, const Population& pop) {
    CellParams c;
    c.tau_ns = truncated_normal(s, d.tau_mean, d.tau_sd, d.tau_min, d.tau_max);
    c.steepness = d.steepness_median * std::exp(d.steepness_log_sd * s.normal());
    if (d.metastable_concentration > 0.0 && d.metastable_mean > 0.0 && d.metastable_mean < 1.0) {
        c.metastable_frac = s.beta(d.metastable_mean * d.metastable_concentration,
                                   (1.0 - d.metastable_mean) * d.metastable_concentration);
    } else {
        c.metastable_frac = d.metastable_mean;
    }
    c.metastable_bias = s.beta(pop.bias_alpha, pop.bias_beta);
    return c;
}

/// Per-cell thresholds for one (timing, env) pair.
struct SwitchTable {
    std::vector<std::uint64_t> success;
    std::vector<std::uint64_t> metastable;
    std::vector<std::uint64_t> bias;
};

SwitchTable build_table(const ChipModel& chip, double t_w, const Environment& env) {
    SwitchTable t;
    const std::size_t m = chip.num_cells();
    t.success.resize(m);
    t.metastable.resize(m);
    t.bias.resize(m);
    parallel_for(m, 4096, [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
            const auto& cell = chip.cells[c];
            t.success[c] = to_threshold(toggle_probability(cell, chip.env_coeffs, t_w, env));
            t.metastable[c] = to_threshold(cell.metastable_frac);
            t.bias[c] = to_threshold(cell.metastable_bias);
        }
    });
    return t;
}

/// One toggle-write attempt for cell `c` currently holding `stored`.
inline bool toggle_outcome(const SwitchTable& t, const Philox4x32::Key& key, std::size_t c, bool stored, bool target,
                           std::uint64_t stream) {
    if (stored == target) {
        return stored;
    }
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(stream),
                                  static_cast<std::uint32_t>(stream >> 32), kDomainWrite};
    const auto r = Philox4x32::apply(ctr, key);
    if (r[0] < t.success[c]) {
        return target;
    }
    if (r[1] < t.metastable[c]) {
        return r[2] < t.bias[c];
    }
    return stored;
}

void check_chip(const ChipModel& chip) {
    if (chip.num_addresses == 0 || chip.cells.size() != chip.num_addresses * kWordWidth ||
        chip.stored.size() != chip.cells.size()) {
        throw InvalidArgument("chip is not initialized");
    }
}

}  // namespace

TimingParams TimingParams::reduced(double t_w) {
    TimingParams t;
    t.t_w = t_w;
    t.t_dv = std::min(t.t_dv, t_w);
    return t;
}

void TimingParams::validate() const {
    require(finite_all({t_wc, t_w, t_wr, t_dv}), "timing values must be finite");
    require(t_wc > 0 && t_w > 0 && t_wr > 0 && t_dv > 0, "timing durations must be positive");
    require(t_w <= t_wc, "t_w must not exceed t_wc");
    require(t_dv <= t_w, "t_dv must not exceed t_w");
}

const char* to_string(FieldAxis axis) {
    switch (axis) {
        case FieldAxis::PlusX: return "+x";
        case FieldAxis::MinusX: return "-x";
        case FieldAxis::PlusY: return "+y";
        case FieldAxis::MinusY: return "-y";
        case FieldAxis::PlusZ: return "+z";
        case FieldAxis::MinusZ: return "-z";
    }
    return "?";
}

FieldAxis parse_field_axis(const std::string& text) {
    for (auto a : {FieldAxis::PlusX, FieldAxis::MinusX, FieldAxis::PlusY, FieldAxis::MinusY, FieldAxis::PlusZ,
                   FieldAxis::MinusZ}) {
        if (text == to_string(a)) {
            return a;
        }
    }
    throw InvalidArgument("unknown field axis '" + text + "' (expected +x, -x, +y, -y, +z or -z)");
}

void CellParams::validate() const {
    require(finite_all({tau_ns, steepness, metastable_frac, metastable_bias}), "cell parameters must be finite");
    require(tau_ns > 0 && steepness > 0, "cell tau and steepness must be positive");
    require(metastable_frac >= 0 && metastable_frac <= 1, "metastable_frac must lie in [0, 1]");
    require(metastable_bias >= 0 && metastable_bias <= 1, "metastable_bias must lie in [0, 1]");
}

void EnvCoeffs::validate() const {
    require(finite_all({temp_tau_slope, temp_tau_slope_hot, field_threshold_mt, field_tau_slope, temp_min_c, temp_max_c}),
            "env coefficients must be finite");
    require(temp_tau_slope >= 0 && temp_tau_slope_hot >= 0, "temperature slopes must be non-negative");
    require(field_threshold_mt >= 0, "field_threshold_mt must be non-negative");
    require(temp_min_c < temp_max_c, "operating temperature window is empty");
}

void CellClassDist::validate(const char* name) const {
    const std::string n(name);
    require(finite_all({tau_mean, tau_sd, tau_min, tau_max, steepness_median, steepness_log_sd, metastable_mean,
                        metastable_concentration}),
            n + ": distribution parameters must be finite");
    require(tau_mean > 0, n + ": tau_mean must be positive");
    require(tau_sd > 0, n + ": tau_sd must be positive");
    require(tau_min > 0 && tau_min < tau_max, n + ": need 0 < tau_min < tau_max");
    require(steepness_median > 0, n + ": steepness_median must be positive");
    require(steepness_log_sd > 0, n + ": steepness_log_sd must be positive");
    require(metastable_mean >= 0 && metastable_mean <= 1, n + ": metastable_mean must lie in [0, 1]");
    require(metastable_concentration >= 0, n + ": metastable_concentration must be non-negative");
}

void Population::validate() const {
    fast.validate("fast");
    slow.validate("slow");
    marginal.validate("marginal");
    auto unit = [](double x) { return x >= 0 && x <= 1; };
    require(unit(slow_weight), "slow_weight must lie in [0, 1]");
    require(unit(marginal_word_fraction), "marginal_word_fraction must lie in [0, 1]");
    require(unit(marginal_cell_fraction), "marginal_cell_fraction must lie in [0, 1]");
    require(bias_alpha > 0 && bias_beta > 0, "bias Beta parameters must be positive");
}

void ChipConfig::validate() const {
    require(num_addresses > 0, "num_addresses must be positive");
    require(num_addresses <= (std::size_t{1} << 28), "num_addresses too large (max 2^28)");
    population.validate();
    env_coeffs.validate();
}

std::uint16_t DataPattern::word_at(std::size_t address) const {
    const std::size_t row = address / kRowWords;
    return std::visit(
        [&](const auto& k) -> std::uint16_t {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Solid>) {
                return k.word;
            } else if constexpr (std::is_same_v<K, Checkerboard>) {
                return ((address + row) % 2 == 0) ? k.word_a : k.word_b;
            } else if constexpr (std::is_same_v<K, Striped>) {
                return (row % 2 == 0) ? k.word_a : k.word_b;
            } else {
                const Philox4x32::Counter ctr{static_cast<std::uint32_t>(address),
                                              static_cast<std::uint32_t>(address >> 32), 0, kDomainPattern};
                return static_cast<std::uint16_t>(Philox4x32::apply(ctr, Philox4x32::key_from_seed(k.seed))[0]);
            }
        },
        kind);
}

BitVector DataPattern::expand(std::size_t num_addresses) const {
    BitVector bits(num_addresses * kWordWidth);
    auto words = bits.words();
    for (std::size_t a = 0; a < num_addresses; ++a) {
        words[a >> 2] |= std::uint64_t{word_at(a)} << (16 * (a & 3));
    }
    return bits;
}

std::string DataPattern::describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Solid>) {
                return fmt::format("solid:0x{:04X}", k.word);
            } else if constexpr (std::is_same_v<K, Checkerboard>) {
                return fmt::format("checkerboard:0x{:04X}:0x{:04X}", k.word_a, k.word_b);
            } else if constexpr (std::is_same_v<K, Striped>) {
                return fmt::format("striped:0x{:04X}:0x{:04X}", k.word_a, k.word_b);
            } else {
                return fmt::format("random:{}", k.seed);
            }
        },
        kind);
}

namespace {

std::uint16_t parse_word(const std::string& s) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &used, 0);
    } catch (const std::exception&) {
        throw InvalidArgument("bad pattern word '" + s + "'");
    }
    if (used != s.size() || v > 0xFFFF) {
        throw InvalidArgument("bad pattern word '" + s + "'");
    }
    return static_cast<std::uint16_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

}  // namespace

DataPattern parse_pattern(const std::string& text) {
    const auto p = split(text, ':');
    if (p[0] == "solid" && p.size() == 2) {
        return DataPattern::solid(parse_word(p[1]));
    }
    if (p[0] == "checkerboard" && p.size() == 3) {
        return DataPattern::checkerboard(parse_word(p[1]), parse_word(p[2]));
    }
    if (p[0] == "striped" && p.size() == 3) {
        return DataPattern::striped(parse_word(p[1]), parse_word(p[2]));
    }
    if (p[0] == "random" && p.size() == 2) {
        try {
            std::size_t used = 0;
            const auto seed = std::stoull(p[1], &used, 0);
            if (used == p[1].size()) {
                return DataPattern::random(seed);
            }
        } catch (const std::exception&) {
        }
    }
    throw InvalidArgument("unrecognized data pattern '" + text + "'");
}

ChipModel create_chip(const ChipConfig& config, std::uint64_t seed) {
    config.validate();
    ChipModel chip;
    chip.chip_id = config.chip_id;
    chip.num_addresses = config.num_addresses;
    chip.word_width = kWordWidth;
    chip.env_coeffs = config.env_coeffs;
    chip.seed = seed;
    chip.cells.resize(config.num_addresses * kWordWidth);
    chip.stored = BitVector(chip.cells.size(), true);

    const auto& pop = config.population;
    parallel_for(config.num_addresses, kAddressGrain, [&](std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
            CounterStream word_stream(seed, static_cast<std::uint32_t>(a), 0, kDomainWord);
            const bool marginal_word = word_stream.uniform() < pop.marginal_word_fraction;
            for (std::size_t b = 0; b < kWordWidth; ++b) {
                const std::size_t c = a * kWordWidth + b;
                CounterStream s(seed, static_cast<std::uint32_t>(c), 0, kDomainCell);
                const double u_marginal = s.uniform();
                const double u_slow = s.uniform();
                const CellClassDist* dist = &pop.fast;
                if (marginal_word && u_marginal < pop.marginal_cell_fraction) {
                    dist = &pop.marginal;
                } else if (u_slow < pop.slow_weight) {
                    dist = &pop.slow;
                }
                chip.cells[c] = draw_cell(s, *dist, pop);
            }
        }
    });
    return chip;
}

double effective_tau(const CellParams& cell, const EnvCoeffs& coeffs, const Environment& env) {
    const double below = kReferenceTempC - env.temperature_c;
    const double slope = below >= 0.0 ? coeffs.temp_tau_slope : coeffs.temp_tau_slope_hot;
    double tau = cell.tau_ns + slope * below;
    const bool in_plane = env.field_axis != FieldAxis::PlusZ && env.field_axis != FieldAxis::MinusZ;
    if (in_plane && env.field_mt > coeffs.field_threshold_mt) {
        tau += coeffs.field_tau_slope * (env.field_mt - coeffs.field_threshold_mt);
    }
    return tau;
}

double toggle_probability(const CellParams& cell, const EnvCoeffs& coeffs, double t_w, const Environment& env) {
    const double x = cell.steepness * (t_w - effective_tau(cell, coeffs, env));
    return 1.0 / (1.0 + std::exp(-x));
}

void validate_environment(const Environment& env, const EnvCoeffs& coeffs) {
    require(std::isfinite(env.temperature_c) && std::isfinite(env.field_mt), "environment values must be finite");
    require(env.temperature_c >= coeffs.temp_min_c && env.temperature_c <= coeffs.temp_max_c,
            fmt::format("temperature {} C outside operating window [{}, {}]", env.temperature_c, coeffs.temp_min_c,
                        coeffs.temp_max_c));
    require(env.field_mt >= 0, "field_mt must be non-negative");
}

void write(ChipModel& chip, const DataPattern& pattern, const TimingParams& timing, const Environment& env,
           std::uint64_t stream) {
    check_chip(chip);
    timing.validate();
    validate_environment(env, chip.env_coeffs);
    const auto key = Philox4x32::key_from_seed(chip.seed);
    const BitVector target = pattern.expand(chip.num_addresses);
    parallel_for(chip.num_addresses, kAddressGrain, [&](std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
            for (std::size_t b = 0; b < kWordWidth; ++b) {
                const std::size_t c = a * kWordWidth + b;
                const bool s = chip.stored.get(c);
                const bool t = target.get(c);
                if (s == t) {
                    continue;
                }
                const Philox4x32::Counter ctr{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(stream),
                                              static_cast<std::uint32_t>(stream >> 32), kDomainWrite};
                const auto r = Philox4x32::apply(ctr, key);
                const auto& cell = chip.cells[c];
                bool next = s;
                if (r[0] < to_threshold(toggle_probability(cell, chip.env_coeffs, timing.t_w, env))) {
                    next = t;
                } else if (r[1] < to_threshold(cell.metastable_frac)) {
                    next = r[2] < to_threshold(cell.metastable_bias);
                }
                chip.stored.set(c, next);
            }
        }
    });
}

std::vector<std::uint16_t> read(const ChipModel& chip, std::size_t first_address, std::size_t count) {
    check_chip(chip);
    if (first_address > chip.num_addresses || count > chip.num_addresses - first_address) {
        throw OutOfRange(fmt::format("read of [{}, {}) outside chip with {} addresses", first_address,
                                     first_address + count, chip.num_addresses));
    }
    std::vector<std::uint16_t> out(count);
    const auto words = chip.stored.words();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t a = first_address + i;
        out[i] = static_cast<std::uint16_t>(words[a >> 2] >> (16 * (a & 3)));
    }
    return out;
}

void reset(ChipModel& chip) {
    check_chip(chip);
    chip.stored.fill(true);
}

double error_fraction(const ChipModel& chip, const DataPattern& pattern) {
    check_chip(chip);
    const BitVector target = pattern.expand(chip.num_addresses);
    std::size_t errors = 0;
    const auto a = chip.stored.words();
    const auto b = target.words();
    for (std::size_t i = 0; i < a.size(); ++i) {
        errors += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    }
    return static_cast<double>(errors) / static_cast<double>(chip.num_cells());
}

MeasurementMatrix measure(ChipModel& chip, const DataPattern& pattern, const TimingParams& timing,
                          const Environment& env, std::size_t n) {
    check_chip(chip);
    if (n < 2) {
        throw InvalidArgument("measure needs n >= 2 measurements");
    }
    timing.validate();
    validate_environment(env, chip.env_coeffs);

    MeasurementMatrix m;
    m.rows = n;
    m.cols = chip.num_cells();
    m.data.assign(n * m.words_per_row(), 0);
    m.written_bits = pattern.expand(chip.num_addresses);
    m.pattern = pattern;
    m.t_w = timing.t_w;
    m.env = env;

    const SwitchTable table = build_table(chip, timing.t_w, env);
    const auto key = Philox4x32::key_from_seed(chip.seed);
    const std::size_t wpr = m.words_per_row();
    const auto target_words = m.written_bits.words();

    // Every row starts from the all-ones reset state.
    parallel_for(wpr, 16, [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            const std::size_t c0 = w * 64;
            const std::size_t c1 = std::min(c0 + 64, m.cols);
            const std::uint64_t target = target_words[w];
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t word = 0;
                for (std::size_t c = c0; c < c1; ++c) {
                    const bool t = (target >> (c - c0)) & 1U;
                    if (toggle_outcome(table, key, c, true, t, i)) {
                        word |= std::uint64_t{1} << (c - c0);
                    }
                }
                m.data[i * wpr + w] = word;
            }
        }
    });

    auto stored = chip.stored.words();
    std::copy_n(m.data.begin() + static_cast<std::ptrdiff_t>((n - 1) * wpr), wpr, stored.begin());
    return m;
}

std::vector<BitVector> simulate_cells(const ChipModel& chip, std::span<const std::size_t> cells,
                                      const DataPattern& pattern, const TimingParams& timing, const Environment& env,
                                      std::uint64_t first_stream, std::size_t count) {
    check_chip(chip);
    timing.validate();
    validate_environment(env, chip.env_coeffs);
    for (const auto c : cells) {
        if (c >= chip.num_cells()) {
            throw OutOfRange("cell index outside chip");
        }
    }
    const auto key = Philox4x32::key_from_seed(chip.seed);
    std::vector<std::uint64_t> success(cells.size());
    std::vector<std::uint64_t> meta(cells.size());
    std::vector<std::uint64_t> bias(cells.size());
    std::vector<bool> target(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& cell = chip.cells[cells[k]];
        success[k] = to_threshold(toggle_probability(cell, chip.env_coeffs, timing.t_w, env));
        meta[k] = to_threshold(cell.metastable_frac);
        bias[k] = to_threshold(cell.metastable_bias);
        const std::size_t a = cells[k] / kWordWidth;
        target[k] = (pattern.word_at(a) >> (cells[k] % kWordWidth)) & 1U;
    }

    std::vector<BitVector> out(count, BitVector(cells.size()));
    parallel_for(count, 1, [&](std::size_t rb, std::size_t re) {
        for (std::size_t r = rb; r < re; ++r) {
            const std::uint64_t stream = first_stream + r;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                bool v = true;
                if (!target[k]) {
                    const std::size_t c = cells[k];
                    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(stream),
                                                  static_cast<std::uint32_t>(stream >> 32), kDomainWrite};
                    const auto u = Philox4x32::apply(ctr, key);
                    if (u[0] < success[k]) {
                        v = false;
                    } else if (u[1] < meta[k]) {
                        v = u[2] < bias[k];
                    }
                }
                out[r].set(k, v);
            }
        }
    });
    return out;
}

}  // namespace mrtg::device

namespace mrtg {

BitVector MeasurementMatrix::row(std::size_t r) const {
    BitVector v(cols);
    const std::size_t wpr = words_per_row();
    auto w = v.words();
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * wpr), wpr, w.begin());
    return v;
}

MeasurementMatrix MeasurementMatrix::from_rows(const std::vector<BitVector>& rows, BitVector written) {
    MeasurementMatrix m;
    m.rows = rows.size();
    m.cols = written.size();
    m.data.assign(m.rows * m.words_per_row(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols) {
            throw InvalidArgument("measurement rows must all match the written bit count");
        }
        const auto w = rows[r].words();
        std::copy(w.begin(), w.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.words_per_row()));
    }
    m.written_bits = std::move(written);
    return m;
}

}  // namespace mrtg
