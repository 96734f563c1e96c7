#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mrtg/error.hpp"
#include "mrtg/sha256.hpp"
#include "mrtg/throughput.hpp"

using mrtg::InvalidArgument;
using mrtg::Sha256;
namespace tp = mrtg::throughput;
using mrtg::throughput::PipelineProbes;
using mrtg::throughput::ThroughputInputs;
using mrtg::throughput::measure_pipeline_times;
using mrtg::throughput::t_rw_avg;
using mrtg::throughput::throughput_csv_header;
using mrtg::throughput::throughput_csv_row;

namespace {

ThroughputInputs reference(double bits_per_addr) {
    ThroughputInputs in;
    in.bits_per_rand_addr = bits_per_addr;
    return in;
}

// Direct evaluation with independent unit handling: bits/ns scaled to bits/s, then to 10^6.
double formula(double t_rw, double t_hash, double b_len, double d_len, double bpa) {
    const double seconds = (t_rw * b_len / bpa + t_hash) * 1e-9;
    return d_len / seconds / 1e6;
}

}  // namespace

TEST_CASE("t_rw_avg") {
    CHECK(t_rw_avg(reference(13.19)) == doctest::Approx(239.76 * 512 / 13.19).epsilon(1e-12));
    CHECK(t_rw_avg(reference(13.19)) == doctest::Approx(9306.8).epsilon(1e-5));
    CHECK(t_rw_avg(reference(512)) == doctest::Approx(239.76));
    CHECK(t_rw_avg(reference(20.0)) == doctest::Approx(t_rw_avg(reference(10.0)) / 2));
}

TEST_CASE("reference per-chip inputs reproduce the reference throughputs within 10%") {
    const double bpa[] = {9.71, 10.71, 13.19, 11.39, 12.76};
    const double expected[] = {18.17, 19.95, 24.12, 21.10, 23.47};
    double lowest = 1e9;
    std::size_t lowest_i = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const auto est = tp::throughput(reference(bpa[i]));
        CAPTURE(i);
        CHECK(est.mbit_per_s == doctest::Approx(formula(239.76, 802.6, 512, 256, bpa[i])).epsilon(1e-12));
        CHECK(std::fabs(est.mbit_per_s - expected[i]) / expected[i] <= 0.10);
        if (est.mbit_per_s < lowest) {
            lowest = est.mbit_per_s;
            lowest_i = i;
        }
    }
    CHECK(lowest_i == 0);
    CHECK(lowest >= 18.0);
    CHECK(tp::throughput(reference(13.19)).mbit_per_s == doctest::Approx(25.3).epsilon(0.005));
}

TEST_CASE("limit of vanishing read/write time") {
    ThroughputInputs in = reference(1.0);
    in.t_rw_ns = 1e-9;
    CHECK(tp::throughput(in).mbit_per_s == doctest::Approx(256.0 / 802.6 * 1e3).epsilon(1e-9));
    CHECK(tp::throughput(in).mbit_per_s == doctest::Approx(319.0).epsilon(0.001));
}

TEST_CASE("throughput monotonicity over random inputs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        ThroughputInputs in;
        in.t_rw_ns = 1.0 + 1000.0 * u(rng);
        in.t_hash_ns = 1.0 + 5000.0 * u(rng);
        in.b_len = 512;
        in.d_len = 1.0 + 255.0 * u(rng);
        in.bits_per_rand_addr = 0.5 + 16.0 * u(rng);
        const double base = tp::throughput(in).mbit_per_s;
        REQUIRE(base > 0.0);
        const double f = 1.0 + 0.5 * u(rng) + 1e-3;
        auto with = [&](auto mutate) {
            auto x = in;
            mutate(x);
            return tp::throughput(x).mbit_per_s;
        };
        CHECK(with([&](ThroughputInputs& x) { x.t_rw_ns *= f; }) < base);
        CHECK(with([&](ThroughputInputs& x) { x.t_hash_ns *= f; }) < base);
        CHECK(with([&](ThroughputInputs& x) { x.bits_per_rand_addr *= f; }) > base);
        CHECK(with([&](ThroughputInputs& x) { x.d_len = std::min(512.0, x.d_len * f); }) > base);
    }
}

TEST_CASE("input validation") {
    for (double bad : {0.0, -1.0, static_cast<double>(NAN), static_cast<double>(INFINITY)}) {
        auto in = reference(10.0);
        in.bits_per_rand_addr = bad;
        CHECK_THROWS_AS(tp::throughput(in), InvalidArgument);
        in = reference(10.0);
        in.t_hash_ns = bad;
        CHECK_THROWS_AS(tp::throughput(in), InvalidArgument);
    }
    auto in = reference(10.0);
    in.d_len = 1024;
    CHECK_THROWS_AS(tp::throughput(in), InvalidArgument);
}

TEST_CASE("CSV report") {
    const auto in = reference(13.19);
    const auto row = throughput_csv_row("C3", in, tp::throughput(in));
    CHECK(throughput_csv_header() == "chip_id,t_rw_ns,t_hash_ns,bits_per_addr,mbit_per_s\n");
    CHECK(row.rfind("C3,239.76,802.60,13.1900,", 0) == 0);
}

TEST_CASE("pipeline timing probes") {
    const std::vector<std::uint8_t> block(64, 0xA5);
    std::size_t rounds = 0;
    std::size_t hashes = 0;
    PipelineProbes p;
    p.addresses_per_round = 1000;
    p.harvest_round = [&] {
        ++rounds;
        volatile std::uint64_t acc = 0;
        for (int i = 0; i < 1000; ++i) {
            acc = acc + static_cast<std::uint64_t>(i);
        }
    };
    p.hash_block = [&] {
        ++hashes;
        static_cast<void>(Sha256::hash(block));
    };
    const auto a = measure_pipeline_times(p);
    CHECK(rounds == 110);
    CHECK(hashes == 110);
    CHECK(a.t_rw_ns > 0.0);
    CHECK(a.t_hash_ns > 0.0);
    // Same order of magnitude as a hardware hash core: between 10 ns and 100 us.
    CHECK(a.t_hash_ns > 10.0);
    CHECK(a.t_hash_ns < 1e5);

    auto filled = a;
    filled.bits_per_rand_addr = 12.0;
    const auto est = tp::throughput(filled);
    CHECK(est.t_rw_avg_ns > 0.0);
    CHECK(est.mbit_per_s > 0.0);

    PipelineProbes few = p;
    few.repetitions = 50;
    CHECK_THROWS_AS(measure_pipeline_times(few), InvalidArgument);
    PipelineProbes missing = p;
    missing.hash_block = nullptr;
    CHECK_THROWS_AS(measure_pipeline_times(missing), InvalidArgument);
}
