#include <json.hpp>

#include "mrtg/binary_io.hpp"
#include "mrtg/device.hpp"
#include "mrtg/error.hpp"

namespace mrtg::device {
namespace {

using nlohmann::json;

void read_class(const json& j, const char* key, CellClassDist& d) {
    if (!j.contains(key)) {
        return;
    }
    const json& c = j.at(key);
    d.tau_mean = c.value("tau_mean", d.tau_mean);
    d.tau_sd = c.value("tau_sd", d.tau_sd);
    d.tau_min = c.value("tau_min", d.tau_min);
    d.tau_max = c.value("tau_max", d.tau_max);
    d.steepness_median = c.value("steepness_median", d.steepness_median);
    d.steepness_log_sd = c.value("steepness_log_sd", d.steepness_log_sd);
    d.metastable_mean = c.value("metastable_mean", d.metastable_mean);
    d.metastable_concentration = c.value("metastable_concentration", d.metastable_concentration);
}

json write_class(const CellClassDist& d) {
    return {{"tau_mean", d.tau_mean},
            {"tau_sd", d.tau_sd},
            {"tau_min", d.tau_min},
            {"tau_max", d.tau_max},
            {"steepness_median", d.steepness_median},
            {"steepness_log_sd", d.steepness_log_sd},
            {"metastable_mean", d.metastable_mean},
            {"metastable_concentration", d.metastable_concentration}};
}

}  // namespace

ChipConfig parse_config(const std::string& json_text) {
    ChipConfig cfg;
    try {
        const json j = json::parse(json_text);
        cfg.chip_id = j.value("chip_id", cfg.chip_id);
        if (j.contains("num_addresses")) {
            const auto n = j.at("num_addresses").get<std::int64_t>();
            if (n <= 0) {
                throw InvalidArgument("num_addresses must be positive");
            }
            cfg.num_addresses = static_cast<std::size_t>(n);
        }
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("population")) {
            const json& p = j.at("population");
            read_class(p, "fast", cfg.population.fast);
            read_class(p, "slow", cfg.population.slow);
            read_class(p, "marginal", cfg.population.marginal);
            cfg.population.slow_weight = p.value("slow_weight", cfg.population.slow_weight);
            cfg.population.marginal_word_fraction =
                p.value("marginal_word_fraction", cfg.population.marginal_word_fraction);
            cfg.population.marginal_cell_fraction =
                p.value("marginal_cell_fraction", cfg.population.marginal_cell_fraction);
            cfg.population.bias_alpha = p.value("bias_alpha", cfg.population.bias_alpha);
            cfg.population.bias_beta = p.value("bias_beta", cfg.population.bias_beta);
        }
        if (j.contains("env_coeffs")) {
            const json& e = j.at("env_coeffs");
            auto& ec = cfg.env_coeffs;
            ec.temp_tau_slope = e.value("temp_tau_slope", ec.temp_tau_slope);
            ec.temp_tau_slope_hot = e.value("temp_tau_slope_hot", ec.temp_tau_slope_hot);
            ec.field_threshold_mt = e.value("field_threshold_mt", ec.field_threshold_mt);
            ec.field_tau_slope = e.value("field_tau_slope", ec.field_tau_slope);
            ec.temp_min_c = e.value("temp_min_c", ec.temp_min_c);
            ec.temp_max_c = e.value("temp_max_c", ec.temp_max_c);
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed chip configuration: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ChipConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_text(path)); }

std::string config_to_json(const ChipConfig& config) {
    const auto& p = config.population;
    const auto& e = config.env_coeffs;
    const json j = {{"chip_id", config.chip_id},
                    {"num_addresses", config.num_addresses},
                    {"seed", config.seed},
                    {"population",
                     {{"fast", write_class(p.fast)},
                      {"slow", write_class(p.slow)},
                      {"marginal", write_class(p.marginal)},
                      {"slow_weight", p.slow_weight},
                      {"marginal_word_fraction", p.marginal_word_fraction},
                      {"marginal_cell_fraction", p.marginal_cell_fraction},
                      {"bias_alpha", p.bias_alpha},
                      {"bias_beta", p.bias_beta}}},
                    {"env_coeffs",
                     {{"temp_tau_slope", e.temp_tau_slope},
                      {"temp_tau_slope_hot", e.temp_tau_slope_hot},
                      {"field_threshold_mt", e.field_threshold_mt},
                      {"field_tau_slope", e.field_tau_slope},
                      {"temp_min_c", e.temp_min_c},
                      {"temp_max_c", e.temp_max_c}}}};
    return j.dump(2) + "\n";
}

std::vector<std::uint8_t> serialize_chip(const ChipModel& chip) {
    io::ByteWriter w;
    w.magic("MRTG");
    w.u16(kChipFileVersion);
    w.str(chip.chip_id);
    w.u64(chip.num_addresses);
    w.u16(static_cast<std::uint16_t>(chip.word_width));
    w.u64(chip.cells.size());
    for (const auto& c : chip.cells) {
        w.f64(c.tau_ns);
        w.f64(c.steepness);
        w.f64(c.metastable_frac);
        w.f64(c.metastable_bias);
    }
    w.u64(chip.stored.size());
    for (const auto word : chip.stored.words()) {
        w.u64(word);
    }
    w.f64(chip.env_coeffs.temp_tau_slope);
    w.f64(chip.env_coeffs.field_threshold_mt);
    w.f64(chip.env_coeffs.temp_tau_slope_hot);
    w.f64(chip.env_coeffs.field_tau_slope);
    w.f64(chip.env_coeffs.temp_min_c);
    w.f64(chip.env_coeffs.temp_max_c);
    w.u64(chip.seed);
    return w.take();
}

ChipModel deserialize_chip(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    r.expect_magic("MRTG");
    if (const auto version = r.u16(); version != kChipFileVersion) {
        throw IoError("unsupported chip file version " + std::to_string(version));
    }
    ChipModel chip;
    chip.chip_id = r.str();
    chip.num_addresses = r.u64();
    chip.word_width = r.u16();
    if (chip.word_width != kWordWidth || chip.num_addresses == 0 || chip.num_addresses > (std::uint64_t{1} << 28)) {
        throw IoError("chip file has invalid geometry");
    }
    const auto ncells = r.u64();
    if (ncells != chip.num_addresses * kWordWidth || ncells * 32 > r.remaining()) {
        throw IoError("chip file cell count does not match geometry");
    }
    chip.cells.resize(ncells);
    for (auto& c : chip.cells) {
        c.tau_ns = r.f64();
        c.steepness = r.f64();
        c.metastable_frac = r.f64();
        c.metastable_bias = r.f64();
    }
    const auto nbits = r.u64();
    if (nbits != ncells) {
        throw IoError("chip file stored-bit count does not match geometry");
    }
    chip.stored = BitVector(nbits);
    for (auto& word : chip.stored.words()) {
        word = r.u64();
    }
    if (const std::size_t rem = nbits & 63; rem != 0 && (chip.stored.words().back() >> rem) != 0) {
        throw IoError("chip file has garbage past the last stored bit");
    }
    chip.env_coeffs.temp_tau_slope = r.f64();
    chip.env_coeffs.field_threshold_mt = r.f64();
    chip.env_coeffs.temp_tau_slope_hot = r.f64();
    chip.env_coeffs.field_tau_slope = r.f64();
    chip.env_coeffs.temp_min_c = r.f64();
    chip.env_coeffs.temp_max_c = r.f64();
    chip.seed = r.u64();
    r.expect_end();
    try {
        chip.env_coeffs.validate();
        for (const auto& c : chip.cells) {
            c.validate();
        }
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("chip file holds invalid parameters: ") + e.what());
    }
    return chip;
}

void save_chip(const ChipModel& chip, const std::filesystem::path& path) { io::write_file(path, serialize_chip(chip)); }

ChipModel load_chip(const std::filesystem::path& path) { return deserialize_chip(io::read_file(path)); }

}  // namespace mrtg::device
