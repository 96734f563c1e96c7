#include "mrtg/throughput.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <ratio>

#include "mrtg/error.hpp"

namespace mrtg::throughput {

void ThroughputInputs::validate() const {
    for (const double v : {t_rw_ns, t_hash_ns, b_len, d_len, bits_per_rand_addr}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("throughput inputs must be finite and strictly positive");
        }
    }
    if (b_len < d_len) {
        throw InvalidArgument("b_len must be at least d_len");
    }
}

double t_rw_avg(const ThroughputInputs& in) {
    in.validate();
    return in.t_rw_ns * in.b_len / in.bits_per_rand_addr;
}

ThroughputEstimate throughput(const ThroughputInputs& in) {
    ThroughputEstimate e;
    e.t_rw_avg_ns = t_rw_avg(in);
    // bits per ns -> 10^6 bits per s
    e.mbit_per_s = in.d_len / (e.t_rw_avg_ns + in.t_hash_ns) * 1e3;
    return e;
}

namespace {

using Clock = std::chrono::steady_clock;

double time_per_call_ns(const std::function<void()>& fn, std::size_t reps, std::size_t warmup) {
    for (std::size_t i = 0; i < warmup; ++i) {
        fn();
    }
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < reps; ++i) {
        fn();
    }
    const auto t1 = Clock::now();
    const double total = std::chrono::duration<double, std::nano>(t1 - t0).count();
    if (!(total > 0.0)) {
        throw InvalidArgument("timer resolution insufficient for the requested measurement");
    }
    return total / static_cast<double>(reps);
}

}  // namespace

ThroughputInputs measure_pipeline_times(const PipelineProbes& probes) {
    if (!probes.harvest_round || !probes.hash_block || probes.addresses_per_round == 0) {
        throw InvalidArgument("pipeline probes are incomplete");
    }
    if (probes.repetitions < 100) {
        throw InvalidArgument("timing needs at least 100 repetitions");
    }
    // A clock coarser than a microsecond cannot resolve per-block hash times.
    if (std::ratio_greater_v<Clock::period, std::micro>) {
        throw InvalidArgument("timer resolution insufficient (steady_clock coarser than 1 us)");
    }
    ThroughputInputs in;
    in.t_rw_ns = time_per_call_ns(probes.harvest_round, probes.repetitions, probes.warmup) /
                 static_cast<double>(probes.addresses_per_round);
    in.t_hash_ns = time_per_call_ns(probes.hash_block, probes.repetitions, probes.warmup);
    return in;
}

std::string throughput_csv_header() { return "chip_id,t_rw_ns,t_hash_ns,bits_per_addr,mbit_per_s\n"; }

std::string throughput_csv_row(const std::string& chip_id, const ThroughputInputs& in, const ThroughputEstimate& est) {
    return fmt::format("{},{:.2f},{:.2f},{:.4f},{:.4f}\n", chip_id, in.t_rw_ns, in.t_hash_ns, in.bits_per_rand_addr,
                       est.mbit_per_s);
}

}  // namespace mrtg::throughput
