#include "mrtg/characterization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>

#include "mrtg/error.hpp"
#include "mrtg/parallel.hpp"

namespace mrtg::characterization {

std::vector<SweepPoint> sweep_tw(device::ChipModel& chip, const device::DataPattern& pattern,
                                 const std::vector<double>& tw_list, const device::Environment& env, std::size_t n) {
    if (tw_list.empty()) {
        throw InvalidArgument("sweep needs at least one t_w value");
    }
    for (const double tw : tw_list) {
        if (!(tw > 0.0)) {
            throw InvalidArgument("sweep t_w values must be positive");
        }
    }
    std::vector<SweepPoint> out;
    out.reserve(tw_list.size());
    for (const double tw : tw_list) {
        const auto m = device::measure(chip, pattern, device::TimingParams::reduced(tw), env, n);
        out.push_back({tw, mean_error_fraction(m)});
    }
    return out;
}

double choose_tw(const std::vector<SweepPoint>& sweep) {
    if (sweep.empty()) {
        throw InvalidArgument("cannot choose t_w from an empty sweep");
    }
    const SweepPoint* best = &sweep.front();
    for (const auto& p : sweep) {
        if (p.error_fraction > best->error_fraction ||
            (p.error_fraction == best->error_fraction && p.t_w > best->t_w)) {
            best = &p;
        }
    }
    return best->t_w;
}

double mean_error_fraction(const MeasurementMatrix& m) {
    if (m.rows == 0 || m.cols == 0) {
        throw InvalidArgument("empty measurement matrix");
    }
    const std::size_t wpr = m.words_per_row();
    const auto written = m.written_bits.words();
    std::size_t errors = 0;
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t w = 0; w < wpr; ++w) {
            errors += static_cast<std::size_t>(std::popcount(m.data[r * wpr + w] ^ written[w]));
        }
    }
    return static_cast<double>(errors) / (static_cast<double>(m.rows) * static_cast<double>(m.cols));
}

FlipCountVector count_flips(const MeasurementMatrix& m) {
    if (m.rows < 2) {
        throw InvalidArgument("flip counting needs at least two measurements");
    }
    if (m.rows - 1 > 0xFFFF) {
        throw InvalidArgument("too many measurements for 16-bit flip counts");
    }
    FlipCountVector fc;
    fc.n_measurements = m.rows;
    fc.counts.assign(m.cols, 0);
    const std::size_t wpr = m.words_per_row();
    parallel_for(wpr, 64, [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            for (std::size_t i = 0; i + 1 < m.rows; ++i) {
                std::uint64_t x = m.data[i * wpr + w] ^ m.data[(i + 1) * wpr + w];
                while (x != 0) {
                    const int b = std::countr_zero(x);
                    ++fc.counts[w * 64 + static_cast<std::size_t>(b)];
                    x &= x - 1;
                }
            }
        }
    });
    return fc;
}

SelectionThresholds SelectionThresholds::make(int th_l, std::optional<int> th_u, std::size_t n_measurements) {
    if (n_measurements < 2) {
        throw InvalidArgument("thresholds need at least two measurements");
    }
    const int max_count = static_cast<int>(n_measurements - 1);
    const int upper = th_u.value_or(max_count);
    if (th_l < 1 || th_l > max_count) {
        throw InvalidArgument(fmt::format("th_l = {} outside [1, {}]", th_l, max_count));
    }
    if (upper < th_l || upper > max_count) {
        throw InvalidArgument(fmt::format("th_u = {} outside [{}, {}]", upper, th_l, max_count));
    }
    return {th_l, upper};
}

std::vector<std::size_t> CellSelection::cells() const {
    std::vector<std::size_t> out;
    out.reserve(num_randcell);
    const auto words = mask.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t x = words[w];
        while (x != 0) {
            out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(x)));
            x &= x - 1;
        }
    }
    return out;
}

CellSelection CellSelection::from_mask(BitVector mask, std::size_t num_addresses) {
    if (mask.size() != num_addresses * device::kWordWidth) {
        throw InvalidArgument("selection mask does not match the address count");
    }
    CellSelection sel;
    sel.num_addresses = num_addresses;
    sel.num_randcell = mask.popcount();
    const auto words = mask.words();
    for (std::size_t a = 0; a < num_addresses; ++a) {
        if (((words[a >> 2] >> (16 * (a & 3))) & 0xFFFF) != 0) {
            ++sel.num_rand_addresses;
        }
    }
    sel.rand_addr_fraction =
        num_addresses == 0 ? 0.0 : 100.0 * static_cast<double>(sel.num_rand_addresses) / static_cast<double>(num_addresses);
    if (sel.num_rand_addresses > 0) {
        sel.bits_per_rand_addr = static_cast<double>(sel.num_randcell) / static_cast<double>(sel.num_rand_addresses);
    }
    sel.mask = std::move(mask);
    return sel;
}

CellSelection select_cells(const FlipCountVector& fc, const SelectionThresholds& th) {
    const auto checked = SelectionThresholds::make(th.th_l, th.th_u, fc.n_measurements);
    if (fc.counts.size() % device::kWordWidth != 0) {
        throw InvalidArgument("flip-count vector is not a whole number of 16-bit words");
    }
    BitVector mask(fc.counts.size());
    for (std::size_t c = 0; c < fc.counts.size(); ++c) {
        const int v = fc.counts[c];
        if (v >= checked.th_l && v <= checked.th_u) {
            mask.set(c, true);
        }
    }
    return CellSelection::from_mask(std::move(mask), fc.counts.size() / device::kWordWidth);
}

CellTaxonomy classify_cells(const MeasurementMatrix& m) {
    if (m.rows < 2) {
        throw InvalidArgument("classification needs at least two measurements");
    }
    CellTaxonomy tax;
    tax.labels.assign(m.cols, CellLabel::NoiseProne);
    const std::size_t wpr = m.words_per_row();
    const auto written = m.written_bits.words();
    for (std::size_t w = 0; w < wpr; ++w) {
        std::uint64_t all = ~std::uint64_t{0};
        std::uint64_t any = 0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            all &= m.data[r * wpr + w];
            any |= m.data[r * wpr + w];
        }
        const std::uint64_t correct = (all & written[w]) | (~any & ~written[w]);
        const std::uint64_t error = (all & ~written[w]) | (~any & written[w]);
        const std::size_t c1 = std::min(m.cols, (w + 1) * 64);
        for (std::size_t c = w * 64; c < c1; ++c) {
            const std::size_t b = c - w * 64;
            if ((correct >> b) & 1U) {
                tax.labels[c] = CellLabel::PersistentCorrect;
                ++tax.persistent_correct;
            } else if ((error >> b) & 1U) {
                tax.labels[c] = CellLabel::PersistentError;
                ++tax.persistent_error;
            } else {
                ++tax.noise_prone;
            }
        }
    }
    return tax;
}

double expected_threshold(std::size_t n, double p) {
    if (n < 2) {
        throw InvalidArgument("expected_threshold needs n >= 2");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("probability must lie in [0, 1]");
    }
    return p * static_cast<double>(n - 1);
}

int suggest_lower_threshold(std::size_t n) {
    if (n < 2) {
        throw InvalidArgument("suggest_lower_threshold needs n >= 2");
    }
    return std::max(1, static_cast<int>(std::lround(0.6 * static_cast<double>(n - 1) / 2.0)));
}

}  // namespace mrtg::characterization
