#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "mrtg/characterization.hpp"
#include "mrtg/device.hpp"
#include "mrtg/error.hpp"
#include "oracles.hpp"

using namespace mrtg;
using namespace mrtg::characterization;

namespace {

MeasurementMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t m, double p_one = 0.5) {
    std::bernoulli_distribution bit(p_one);
    std::vector<BitVector> rows(n, BitVector(m));
    for (auto& r : rows) {
        for (std::size_t c = 0; c < m; ++c) {
            r.set(c, bit(rng));
        }
    }
    BitVector written(m);
    for (std::size_t c = 0; c < m; ++c) {
        written.set(c, bit(rng));
    }
    return MeasurementMatrix::from_rows(rows, written);
}

MeasurementMatrix from_columns(const std::vector<std::vector<int>>& columns, const std::vector<int>& written) {
    const std::size_t n = columns.front().size();
    std::vector<BitVector> rows(n, BitVector(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            rows[i].set(c, columns[c][i] != 0);
        }
    }
    BitVector w(written.size());
    for (std::size_t c = 0; c < written.size(); ++c) {
        w.set(c, written[c] != 0);
    }
    return MeasurementMatrix::from_rows(rows, w);
}

FlipCountVector counts_of(std::vector<std::uint16_t> c, std::size_t n) {
    c.resize((c.size() + 15) / 16 * 16, 0);
    return {c, n};
}

}  // namespace

TEST_CASE("count_flips on hand-built columns") {
    const auto m = from_columns({{0, 0, 0, 0, 0}, {0, 1, 0, 1, 0}, {1, 1, 0, 0, 1}}, {0, 0, 0});
    const auto fc = count_flips(m);
    CHECK(fc.n_measurements == 5);
    CHECK(fc.counts == std::vector<std::uint16_t>{0, 4, 2});
}

TEST_CASE("count_flips equals per-column transition enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 49;
        const std::size_t m = 1 + rng() % 1100;
        const auto mat = random_matrix(rng, n, m, 0.1 + 0.8 * (trial % 5) / 4.0);
        const auto fc = count_flips(mat);
        REQUIRE(fc.counts.size() == m);
        for (std::size_t c = 0; c < m; ++c) {
            std::vector<int> column(n);
            for (std::size_t i = 0; i < n; ++i) {
                column[i] = mat.get(i, c);
            }
            REQUIRE(fc.counts[c] == oracle::column_transitions(column));
            REQUIRE(fc.counts[c] <= n - 1);
        }
    }
    CHECK_THROWS_AS(count_flips(from_columns({{1}}, {1})), InvalidArgument);
}

TEST_CASE("flip count of an i.i.d. Bernoulli cell is Binomial(N-1, 2q(1-q))") {
    std::mt19937_64 rng(5);
    for (double q : {0.5, 0.2}) {
        const std::size_t n = 50;
        const std::size_t cells = 4000;
        const auto mat = random_matrix(rng, n, cells, q);
        const auto fc = count_flips(mat);
        double sum = 0.0;
        for (auto c : fc.counts) {
            sum += c;
        }
        const double mean = sum / cells;
        const double p = 2 * q * (1 - q);
        const double expect = p * (n - 1);
        const double se = std::sqrt((n - 1) * p * (1 - p) / cells);
        CAPTURE(q);
        CHECK(std::fabs(mean - expect) < 3 * se);
        if (q == 0.5) {
            CHECK(expect == doctest::Approx(24.5));
        }
    }
}

TEST_CASE("SelectionThresholds validation") {
    const auto th = SelectionThresholds::make(16, std::nullopt, 50);
    CHECK(th.th_l == 16);
    CHECK(th.th_u == 49);
    CHECK_THROWS_AS(SelectionThresholds::make(50, std::nullopt, 50), InvalidArgument);
    CHECK_THROWS_AS(SelectionThresholds::make(0, std::nullopt, 50), InvalidArgument);
    CHECK_THROWS_AS(SelectionThresholds::make(20, 19, 50), InvalidArgument);
    CHECK_THROWS_AS(SelectionThresholds::make(20, 50, 50), InvalidArgument);
    CHECK_NOTHROW(SelectionThresholds::make(49, 49, 50));
}

TEST_CASE("select_cells applies the inclusive threshold rule") {
    const auto fc = counts_of({0, 24, 49, 10}, 50);
    const auto sel = select_cells(fc, SelectionThresholds::make(16, 49, 50));
    CHECK(sel.mask.get(0) == false);
    CHECK(sel.mask.get(1) == true);
    CHECK(sel.mask.get(2) == true);
    CHECK(sel.mask.get(3) == false);
    CHECK(sel.num_randcell == 2);
    CHECK(sel.num_rand_addresses == 1);
    CHECK(*sel.bits_per_rand_addr == 2.0);
    CHECK(sel.rand_addr_fraction == 100.0);
    CHECK(sel.cells() == std::vector<std::size_t>{1, 2});

    const auto narrow = select_cells(fc, SelectionThresholds::make(16, 30, 50));
    CHECK(narrow.num_randcell == 1);

    const auto none = select_cells(counts_of({0, 1, 2}, 50), SelectionThresholds::make(16, std::nullopt, 50));
    CHECK(none.num_randcell == 0);
    CHECK(none.num_rand_addresses == 0);
    CHECK_FALSE(none.bits_per_rand_addr.has_value());
}

TEST_CASE("selection statistics count addresses with any selected cell") {
    std::vector<std::uint16_t> c(16 * 4, 0);
    c[0] = 20;
    c[1] = 20;
    c[2] = 20;
    c[16 * 3 + 15] = 30;
    const auto sel = select_cells({c, 50}, SelectionThresholds::make(15, std::nullopt, 50));
    CHECK(sel.num_addresses == 4);
    CHECK(sel.num_randcell == 4);
    CHECK(sel.num_rand_addresses == 2);
    CHECK(sel.rand_addr_fraction == doctest::Approx(50.0));
    CHECK(*sel.bits_per_rand_addr == doctest::Approx(2.0));
}

TEST_CASE("raising th_l never adds cells") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const auto mat = random_matrix(rng, 30, 16 * 64, 0.3);
        const auto fc = count_flips(mat);
        BitVector prev = select_cells(fc, SelectionThresholds::make(1, std::nullopt, 30)).mask;
        for (int th = 2; th <= 29; ++th) {
            const auto cur = select_cells(fc, SelectionThresholds::make(th, std::nullopt, 30)).mask;
            for (std::size_t c = 0; c < cur.size(); ++c) {
                if (cur.get(c)) {
                    REQUIRE(prev.get(c));
                }
            }
            prev = cur;
        }
    }
}

TEST_CASE("classify_cells labels and consistency with flip counts") {
    const auto m = from_columns({{0, 0, 0}, {1, 1, 1}, {0, 1, 1}, {1, 1, 1}}, {0, 0, 0, 1});
    const auto tax = classify_cells(m);
    REQUIRE(tax.labels.size() == 4);
    CHECK(tax.labels[0] == CellLabel::PersistentCorrect);
    CHECK(tax.labels[1] == CellLabel::PersistentError);
    CHECK(tax.labels[2] == CellLabel::NoiseProne);
    CHECK(tax.labels[3] == CellLabel::PersistentCorrect);
    CHECK(tax.persistent_correct == 2);
    CHECK(tax.persistent_error == 1);
    CHECK(tax.noise_prone == 1);
    CHECK(tax.invariant_fraction() == doctest::Approx(0.75));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mat = random_matrix(rng, 5, 16 * 32, 0.1);
        const auto fc = count_flips(mat);
        const auto t = classify_cells(mat);
        CHECK(t.persistent_correct + t.persistent_error + t.noise_prone == mat.cols);
        const auto sel = select_cells(fc, SelectionThresholds::make(1, std::nullopt, 5));
        for (std::size_t c = 0; c < mat.cols; ++c) {
            const bool persistent = t.labels[c] != CellLabel::NoiseProne;
            CHECK(persistent == (fc.counts[c] == 0));
            if (sel.mask.get(c)) {
                CHECK(t.labels[c] == CellLabel::NoiseProne);
            }
        }
    }
}

TEST_CASE("expected_threshold and the threshold helper") {
    CHECK(expected_threshold(50, 0.5) == doctest::Approx(24.5));
    CHECK(expected_threshold(2, 0.5) == doctest::Approx(0.5));
    CHECK(expected_threshold(11, 0.3) == doctest::Approx(3.0));
    CHECK_THROWS_AS(expected_threshold(1, 0.5), InvalidArgument);
    CHECK_THROWS_AS(expected_threshold(10, 1.5), InvalidArgument);
    CHECK(suggest_lower_threshold(50) == 15);
}

TEST_CASE("choose_tw picks the largest error fraction, ties to larger t_w") {
    CHECK(choose_tw({{15, 0.0}, {10, 0.008}, {5, 0.04}, {2.5, 0.31}}) == 2.5);
    CHECK(choose_tw({{5, 0.2}, {2.5, 0.2}}) == 5.0);
    CHECK(choose_tw({{2.5, 0.2}, {5, 0.2}}) == 5.0);
    CHECK_THROWS_AS(choose_tw({}), InvalidArgument);
}

TEST_CASE("sweep_tw on a small chip") {
    device::ChipConfig cfg;
    cfg.num_addresses = 512;
    auto chip = device::create_chip(cfg, 1);
    const auto ones = sweep_tw(chip, device::DataPattern::solid(0xFFFF), {15, 10, 5, 2.5}, {}, 10);
    for (const auto& p : ones) {
        CHECK(p.error_fraction == 0.0);
    }
    const auto a = sweep_tw(chip, device::DataPattern::solid(0), {15, 10, 5, 2.5}, {}, 10);
    const auto b = sweep_tw(chip, device::DataPattern::solid(0), {15, 10, 5, 2.5}, {}, 10);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a[i].t_w == b[i].t_w);
        CHECK(a[i].error_fraction == b[i].error_fraction);
    }
    CHECK(a[3].error_fraction > a[2].error_fraction);
    CHECK(choose_tw(a) == 2.5);
    CHECK_THROWS_AS(sweep_tw(chip, device::DataPattern::solid(0), {}, {}, 10), InvalidArgument);
    CHECK_THROWS_AS(sweep_tw(chip, device::DataPattern::solid(0), {2.5, -1}, {}, 10), InvalidArgument);
    CHECK_THROWS_AS(sweep_tw(chip, device::DataPattern::solid(0), {2.5}, {}, 1), InvalidArgument);
}

TEST_CASE("mean_error_fraction against direct counting") {
    std::mt19937_64 rng(12);
    const auto m = random_matrix(rng, 7, 300, 0.3);
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        std::size_t e = 0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            e += m.get(i, c) != m.written_bits.get(c);
        }
        total += static_cast<double>(e) / static_cast<double>(m.cols);
    }
    CHECK(mean_error_fraction(m) == doctest::Approx(total / 7).epsilon(1e-12));
}

TEST_CASE("selection file and CSV") {
    std::vector<std::uint16_t> c(16 * 6, 0);
    c[3] = 17;
    c[16 * 2 + 0] = 20;
    c[16 * 2 + 15] = 49;
    c[16 * 5 + 7] = 16;
    const FlipCountVector fc{c, 50};
    const auto sel = select_cells(fc, SelectionThresholds::make(16, std::nullopt, 50));
    const auto bytes = serialize_selection(sel);
    const auto back = deserialize_selection(bytes);
    CHECK(back.mask == sel.mask);
    CHECK(back.num_randcell == 4);
    CHECK(back.num_rand_addresses == 3);
    CHECK(back.bits_per_rand_addr == sel.bits_per_rand_addr);
    // header (4 + 2 + 8 + 8) plus three (u32, u16) entries
    CHECK(bytes.size() == 22 + 3 * 6);

    const auto csv = selection_csv(sel, fc);
    CHECK(csv.rfind("address,bitmask,fc0,fc1,", 0) == 0);
    CHECK(csv.find("\n0,0x0008,0,0,0,17,") != std::string::npos);
    CHECK(csv.find("\n2,0x8001,20,") != std::string::npos);
    CHECK(csv.find("\n5,0x0080,") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    auto bad = bytes;
    bad[0] = 'Z';
    CHECK_THROWS_AS(deserialize_selection(bad), IoError);
    auto trunc = bytes;
    trunc.pop_back();
    CHECK_THROWS_AS(deserialize_selection(trunc), IoError);

    const auto path = std::filesystem::temp_directory_path() / "mrtg_test_selection.bin";
    save_selection(sel, path);
    CHECK(load_selection(path).mask == sel.mask);
    std::filesystem::remove(path);
}

TEST_CASE("reduced-temperature operation selects fewer cells") {
    device::ChipConfig cfg;
    cfg.num_addresses = 16384;
    auto chip = device::create_chip(cfg, 1);
    const auto pattern = device::DataPattern::solid(0);
    const auto timing = device::TimingParams::reduced(2.5);
    device::Environment cold;
    cold.temperature_c = 20.0;
    const auto th = SelectionThresholds::make(16, std::nullopt, 50);
    const auto warm_sel = select_cells(count_flips(device::measure(chip, pattern, timing, {}, 50)), th);
    const auto cold_sel = select_cells(count_flips(device::measure(chip, pattern, timing, cold, 50)), th);
    CHECK(cold_sel.num_randcell < warm_sel.num_randcell);
}
