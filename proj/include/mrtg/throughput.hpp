#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace mrtg::throughput {

// Published reference timings of the FPGA evaluation setup.
inline constexpr double kReferenceTrwNs = 239.76;
inline constexpr double kReferenceThashNs = 802.6;

struct ThroughputInputs {
    double t_rw_ns = kReferenceTrwNs;  // full read/write of one address
    double t_hash_ns = kReferenceThashNs;  // hashing one input block
    double b_len = 512;
    double d_len = 256;
    double bits_per_rand_addr = 1.0;

    void validate() const;
};

struct ThroughputEstimate {
    double t_rw_avg_ns = 0.0;
    double mbit_per_s = 0.0;
};

/// Time to gather one input block of raw bits: t_rw * b_len / bits_per_rand_addr.
double t_rw_avg(const ThroughputInputs& in);

/// d_len / (t_rw_avg + t_hash), reported in 10^6 bits per second.
ThroughputEstimate throughput(const ThroughputInputs& in);

/// Pipeline probes for wall-clock timing. `harvest_round` performs one full
/// reset/write/read pass touching `addresses_per_round` addresses;
/// `hash_block` conditions one b_len-bit block.
struct PipelineProbes {
    std::function<void()> harvest_round;
    std::size_t addresses_per_round = 0;
    std::function<void()> hash_block;
    std::size_t repetitions = 100;
    std::size_t warmup = 10;
};

/// Averages the probes over `repetitions` runs after discarding `warmup`
/// runs. bits_per_rand_addr is left for the caller to fill in.
ThroughputInputs measure_pipeline_times(const PipelineProbes& probes);

std::string throughput_csv_header();
std::string throughput_csv_row(const std::string& chip_id, const ThroughputInputs& in, const ThroughputEstimate& est);

}  // namespace mrtg::throughput
