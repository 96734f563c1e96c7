// mrtg: command-line front end for the reduced-write-pulse MRAM TRNG simulator.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrtg/binary_io.hpp"
#include "mrtg/characterization.hpp"
#include "mrtg/device.hpp"
#include "mrtg/error.hpp"
#include "mrtg/extraction.hpp"
#include "mrtg/parallel.hpp"
#include "mrtg/sha256.hpp"
#include "mrtg/stats.hpp"
#include "mrtg/throughput.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrtg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEmptySelection = 3;
constexpr int kExitBatteryFail = 4;
constexpr int kExitIo = 5;

constexpr const char* kVersion = "1.0.0";

struct Options {
    std::string config_path;
    std::string chip_path;
    std::optional<std::uint64_t> seed;
    std::string pattern = "solid:0x0000";
    std::optional<double> tw;
    std::vector<double> tw_list{15.0, 10.0, 5.0, 2.5};
    std::size_t n = 50;
    std::optional<int> th_l;
    std::optional<int> th_u;
    double temp = device::kReferenceTempC;
    double field = 0.0;
    std::string field_axis = "+x";
    std::string out;
    std::string format = "text";
    unsigned threads = 0;

    std::string selection_path;
    std::string input_path;
    std::size_t sequences = 20;
    std::size_t seq_bits = 100000;
    std::optional<std::size_t> bits;
    std::optional<double> bits_per_addr;
    double t_rw = throughput::kReferenceTrwNs;
    double t_hash = throughput::kReferenceThashNs;
    std::string chip_id = "sim-chip";
    bool measure_timing = false;
};

struct ChipSource {
    device::ChipModel chip;
    std::string digest;  // SHA-256 of the serialized chip
};

device::Environment environment(const Options& o) {
    device::Environment env;
    env.temperature_c = o.temp;
    env.field_mt = o.field;
    env.field_axis = device::parse_field_axis(o.field_axis);
    return env;
}

// --chip loads a saved chip; otherwise one is created from --config (or the
// defaults) and --seed. With --chip, --seed replaces the stored noise seed.
ChipSource obtain_chip(const Options& o) {
    ChipSource src;
    if (!o.chip_path.empty()) {
        src.chip = device::load_chip(o.chip_path);
        if (o.seed) {
            src.chip.seed = *o.seed;
        }
    } else {
        const auto cfg = o.config_path.empty() ? device::ChipConfig{} : device::load_config(o.config_path);
        src.chip = device::create_chip(cfg, o.seed.value_or(cfg.seed));
    }
    src.digest = to_hex(Sha256::hash(device::serialize_chip(src.chip)));
    return src;
}

fs::path output_dir(const Options& o) {
    if (o.out.empty()) {
        return {};
    }
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) {
        throw IoError("cannot create output directory " + o.out + ": " + ec.message());
    }
    return o.out;
}

std::string file_digest(const fs::path& p) { return to_hex(Sha256::hash(io::read_file(p))); }

std::string sweep_csv(const std::vector<characterization::SweepPoint>& sweep) {
    std::string s = "t_w_ns,error_fraction\n";
    for (const auto& pt : sweep) {
        s += fmt::format("{},{:.8f}\n", pt.t_w, pt.error_fraction);
    }
    return s;
}

std::string sweep_text(const std::vector<characterization::SweepPoint>& sweep, double chosen) {
    std::string s = "  t_w (ns)   error fraction\n";
    for (const auto& pt : sweep) {
        s += fmt::format("{:10.3f}   {:8.4f} %{}\n", pt.t_w, 100.0 * pt.error_fraction, pt.t_w == chosen ? "  <" : "");
    }
    s += fmt::format("chosen t_w = {} ns\n", chosen);
    return s;
}

json selection_json(const characterization::CellSelection& sel, const characterization::SelectionThresholds& th) {
    json j = {{"th_l", th.th_l},
              {"th_u", th.th_u},
              {"num_addresses", sel.num_addresses},
              {"num_randcell", sel.num_randcell},
              {"num_rand_addresses", sel.num_rand_addresses},
              {"rand_addr_percent", sel.rand_addr_fraction}};
    j["bits_per_rand_addr"] = sel.bits_per_rand_addr ? json(*sel.bits_per_rand_addr) : json(nullptr);
    return j;
}

std::string selection_text(const characterization::CellSelection& sel, const characterization::SelectionThresholds& th,
                           const characterization::CellTaxonomy* tax) {
    std::string s;
    s += fmt::format("thresholds          : {} <= flips <= {}\n", th.th_l, th.th_u);
    s += fmt::format("selected cells      : {}\n", sel.num_randcell);
    s += fmt::format("random addresses    : {} ({:.3f} %)\n", sel.num_rand_addresses, sel.rand_addr_fraction);
    if (sel.bits_per_rand_addr) {
        s += fmt::format("bits per rand addr  : {:.3f}\n", *sel.bits_per_rand_addr);
    } else {
        s += "bits per rand addr  : n/a\n";
    }
    if (tax != nullptr) {
        s += fmt::format("invariant cells     : {:.3f} % ({} correct, {} error, {} noise-prone)\n",
                         100.0 * tax->invariant_fraction(), tax->persistent_correct, tax->persistent_error,
                         tax->noise_prone);
    }
    return s;
}

std::vector<stats::BitSequence> split_sequences(const BitVector& bits, std::size_t count, std::size_t len) {
    if (count == 0 || len == 0) {
        throw InvalidArgument("sequence count and length must be positive");
    }
    if (bits.size() / len < count) {
        throw InvalidArgument(fmt::format("stream holds {} bits, {} sequences of {} bits need {}", bits.size(), count,
                                          len, count * len));
    }
    std::vector<stats::BitSequence> seqs;
    seqs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        seqs.emplace_back(bits.slice(i * len, len));
    }
    return seqs;
}

BitVector load_stream(const fs::path& path) {
    const auto bytes = io::read_file(path);
    const bool ascii = !bytes.empty() && std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t c) {
        return c == '0' || c == '1' || c == '\n' || c == '\r' || c == ' ' || c == '\t';
    });
    if (ascii) {
        std::string text(bytes.begin(), bytes.end());
        std::erase_if(text, [](char c) { return c != '0' && c != '1'; });
        return BitVector::from_string(text);
    }
    return extraction::decode_binary(bytes);
}

throughput::ThroughputInputs timing_inputs(const Options& o, device::ChipModel* chip, double t_w,
                                           const device::DataPattern& pattern, const device::Environment& env) {
    throughput::ThroughputInputs in;
    in.t_rw_ns = o.t_rw;
    in.t_hash_ns = o.t_hash;
    if (o.measure_timing) {
        if (chip == nullptr) {
            throw InvalidArgument("--measure-timing needs a chip (--chip or --config)");
        }
        const auto timing = device::TimingParams::reduced(t_w);
        const std::vector<std::uint8_t> block(64, 0x5a);
        std::uint64_t stream = 0;
        throughput::PipelineProbes probes;
        probes.addresses_per_round = chip->num_addresses;
        probes.harvest_round = [&] {
            device::reset(*chip);
            device::write(*chip, pattern, timing, env, stream++);
            static_cast<void>(device::read(*chip, 0, chip->num_addresses));
        };
        probes.hash_block = [&] { static_cast<void>(Sha256::hash(block)); };
        const auto measured = throughput::measure_pipeline_times(probes);
        in.t_rw_ns = measured.t_rw_ns;
        in.t_hash_ns = measured.t_hash_ns;
    }
    return in;
}

std::string throughput_text(const std::string& chip_id, const throughput::ThroughputInputs& in,
                            const throughput::ThroughputEstimate& est) {
    return fmt::format(
        "chip            : {}\nt_rw            : {:.2f} ns\nt_hash          : {:.2f} ns\nbits per addr   : {:.4f}\n"
        "t_rw_avg        : {:.2f} ns\nthroughput      : {:.4f} Mbit/s\n",
        chip_id, in.t_rw_ns, in.t_hash_ns, in.bits_per_rand_addr, est.t_rw_avg_ns, est.mbit_per_s);
}

void emit(const Options& o, const std::string& text, const std::string& csv) {
    std::fputs((o.format == "csv" ? csv : text).c_str(), stdout);
}

// ---------------------------------------------------------------------------

int cmd_chip(const Options& o) {
    const auto cfg = o.config_path.empty() ? device::ChipConfig{} : device::load_config(o.config_path);
    const auto seed = o.seed.value_or(cfg.seed);
    const auto chip = device::create_chip(cfg, seed);
    const auto dir = output_dir(o);
    const fs::path chip_file = (dir.empty() ? fs::path(".") : dir) / "chip.mrtg";
    device::save_chip(chip, chip_file);
    io::write_text(chip_file.parent_path() / "chip_config.json", device::config_to_json(cfg));
    const auto digest = file_digest(chip_file);
    emit(o,
         fmt::format("chip {} ({} addresses, seed {}) -> {}\nsha256 {}\n", chip.chip_id, chip.num_addresses, seed,
                     chip_file.string(), digest),
         fmt::format("chip_id,num_addresses,seed,path,sha256\n{},{},{},{},{}\n", chip.chip_id, chip.num_addresses, seed,
                     chip_file.string(), digest));
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    auto src = obtain_chip(o);
    const auto pattern = device::parse_pattern(o.pattern);
    const auto sweep = characterization::sweep_tw(src.chip, pattern, o.tw_list, environment(o), o.n);
    const double chosen = characterization::choose_tw(sweep);
    if (const auto dir = output_dir(o); !dir.empty()) {
        io::write_text(dir / "sweep.csv", sweep_csv(sweep));
    }
    emit(o, sweep_text(sweep, chosen), sweep_csv(sweep));
    return kExitOk;
}

int cmd_characterize(const Options& o) {
    auto src = obtain_chip(o);
    const auto pattern = device::parse_pattern(o.pattern);
    const double t_w = o.tw.value_or(2.5);
    const auto m = device::measure(src.chip, pattern, device::TimingParams::reduced(t_w), environment(o), o.n);
    const auto fc = characterization::count_flips(m);
    const auto th = characterization::SelectionThresholds::make(
        o.th_l.value_or(characterization::suggest_lower_threshold(o.n)), o.th_u, o.n);
    const auto sel = characterization::select_cells(fc, th);
    const auto tax = characterization::classify_cells(m);
    if (const auto dir = output_dir(o); !dir.empty()) {
        characterization::save_selection(sel, dir / "selection.bin");
        io::write_text(dir / "selection.csv", characterization::selection_csv(sel, fc));
    }
    auto j = selection_json(sel, th);
    j["invariant_fraction"] = tax.invariant_fraction();
    const std::string csv = fmt::format(
        "th_l,th_u,num_randcell,num_rand_addresses,rand_addr_percent,bits_per_rand_addr,invariant_fraction\n"
        "{},{},{},{},{:.6f},{},{:.6f}\n",
        th.th_l, th.th_u, sel.num_randcell, sel.num_rand_addresses, sel.rand_addr_fraction,
        sel.bits_per_rand_addr ? fmt::format("{:.6f}", *sel.bits_per_rand_addr) : std::string(),
        tax.invariant_fraction());
    emit(o, selection_text(sel, th, &tax), csv);
    if (sel.num_randcell == 0) {
        throw EmptySelection("no cell met the selection thresholds");
    }
    return kExitOk;
}

int cmd_generate(const Options& o) {
    if (o.selection_path.empty()) {
        throw InvalidArgument("generate needs --selection");
    }
    auto src = obtain_chip(o);
    const auto sel = characterization::load_selection(o.selection_path);
    const auto pattern = device::parse_pattern(o.pattern);
    const double t_w = o.tw.value_or(2.5);
    const std::size_t target = o.bits.value_or(o.sequences * o.seq_bits);
    const auto rounds = extraction::required_rounds(target, sel);
    const auto raw = extraction::harvest(src.chip, sel, pattern, t_w, environment(o), rounds);
    const auto cond = extraction::condition(raw);
    const auto dir = output_dir(o);
    const fs::path base = dir.empty() ? fs::path(".") : dir;
    extraction::save_binary(raw.bits, base / "raw.bin");
    extraction::save_binary(cond.bits, base / "conditioned.bin");
    extraction::save_ascii(cond.bits, base / "conditioned.txt");
    io::write_text(base / "raw.json", extraction::provenance_json(raw));
    io::write_text(base / "conditioned.json", extraction::provenance_json(cond));
    emit(o, fmt::format("{} rounds, {} raw bits, {} conditioned bits -> {}\n", rounds, raw.bits.size(),
                        cond.bits.size(), base.string()),
         fmt::format("rounds,raw_bits,conditioned_bits\n{},{},{}\n", rounds, raw.bits.size(), cond.bits.size()));
    return kExitOk;
}

int cmd_test(const Options& o) {
    if (o.input_path.empty()) {
        throw InvalidArgument("test needs --input");
    }
    const auto bits = load_stream(o.input_path);
    const auto summary = stats::run_battery(split_sequences(bits, o.sequences, o.seq_bits));
    if (const auto dir = output_dir(o); !dir.empty()) {
        io::write_text(dir / "battery.csv", stats::battery_csv(summary));
        io::write_text(dir / "battery.txt", stats::battery_table(summary));
    }
    emit(o, stats::battery_table(summary), stats::battery_csv(summary));
    return summary.verdict ? kExitOk : kExitBatteryFail;
}

int cmd_throughput(const Options& o) {
    std::optional<ChipSource> src;
    if (o.measure_timing) {
        src = obtain_chip(o);
    }
    double bpa = 0.0;
    std::string chip_id = o.chip_id;
    if (o.bits_per_addr) {
        bpa = *o.bits_per_addr;
    } else if (!o.selection_path.empty()) {
        const auto sel = characterization::load_selection(o.selection_path);
        if (!sel.bits_per_rand_addr) {
            throw EmptySelection("selection holds no random cells");
        }
        bpa = *sel.bits_per_rand_addr;
    } else {
        throw InvalidArgument("throughput needs --bits-per-addr or --selection");
    }
    if (src) {
        chip_id = src->chip.chip_id;
    }
    const auto pattern = device::parse_pattern(o.pattern);
    auto in = timing_inputs(o, src ? &src->chip : nullptr, o.tw.value_or(2.5), pattern, environment(o));
    in.bits_per_rand_addr = bpa;
    const auto est = throughput::throughput(in);
    const std::string csv = throughput::throughput_csv_header() + throughput::throughput_csv_row(chip_id, in, est);
    if (const auto dir = output_dir(o); !dir.empty()) {
        io::write_text(dir / "throughput.csv", csv);
    }
    emit(o, throughput_text(chip_id, in, est), csv);
    return kExitOk;
}

json run_config_json(const Options& o, const ChipSource& src) {
    json j = {{"chip_sha256", src.digest},
              {"chip_id", src.chip.chip_id},
              {"seed", src.chip.seed},
              {"pattern", device::parse_pattern(o.pattern).describe()},
              {"tw_list_ns", o.tw_list},
              {"n", o.n},
              {"th_l", o.th_l.value_or(characterization::suggest_lower_threshold(o.n))},
              {"temperature_c", o.temp},
              {"field_mt", o.field},
              {"field_axis", device::to_string(device::parse_field_axis(o.field_axis))},
              {"sequences", o.sequences},
              {"seq_bits", o.seq_bits},
              {"measure_timing", o.measure_timing}};
    j["tw_ns"] = o.tw ? json(*o.tw) : json(nullptr);
    j["th_u"] = o.th_u ? json(*o.th_u) : json(nullptr);
    if (!o.measure_timing) {
        j["t_rw_ns"] = o.t_rw;
        j["t_hash_ns"] = o.t_hash;
    }
    return j;
}

int cmd_pipeline(const Options& o) {
    if (o.out.empty()) {
        throw InvalidArgument("pipeline needs --out");
    }
    const auto dir = output_dir(o);
    auto src = obtain_chip(o);
    auto& chip = src.chip;
    const auto pattern = device::parse_pattern(o.pattern);
    const auto env = environment(o);
    const json run_cfg = run_config_json(o, src);
    const std::string cfg_digest = to_hex(Sha256::hash(run_cfg.dump()));

    json run = {{"tool", "mrtg"}, {"version", kVersion}, {"config", run_cfg}, {"config_digest", cfg_digest}};
    std::string log;

    const auto sweep = characterization::sweep_tw(chip, pattern, o.tw_list, env, o.n);
    io::write_text(dir / "sweep.csv", sweep_csv(sweep));
    const double t_w = o.tw.value_or(characterization::choose_tw(sweep));
    log += sweep_text(sweep, t_w);
    run["t_w_ns"] = t_w;

    const auto m = device::measure(chip, pattern, device::TimingParams::reduced(t_w), env, o.n);
    const auto fc = characterization::count_flips(m);
    const auto tax = characterization::classify_cells(m);
    const auto th = characterization::SelectionThresholds::make(
        o.th_l.value_or(characterization::suggest_lower_threshold(o.n)), o.th_u, o.n);
    const auto sel = characterization::select_cells(fc, th);
    characterization::save_selection(sel, dir / "selection.bin");
    io::write_text(dir / "selection.csv", characterization::selection_csv(sel, fc));
    run["selection"] = selection_json(sel, th);
    run["selection"]["invariant_fraction"] = tax.invariant_fraction();
    log += selection_text(sel, th, &tax);

    auto finish = [&](int code) {
        run["exit_code"] = code;
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().filename() != "run.json") {
                names.push_back(e.path().filename().string());
            }
        }
        std::sort(names.begin(), names.end());
        json artifacts = json::object();
        for (const auto& name : names) {
            artifacts[name] = file_digest(dir / name);
        }
        run["artifacts"] = artifacts;
        io::write_text(dir / "run.json", run.dump(2) + "\n");
        return code;
    };

    if (sel.num_randcell == 0) {
        run["error"] = "empty selection";
        std::fputs(log.c_str(), stdout);
        finish(kExitEmptySelection);
        throw EmptySelection("no cell met the selection thresholds");
    }

    const auto rounds = extraction::required_rounds(o.sequences * o.seq_bits, sel);
    const auto raw = extraction::harvest(chip, sel, pattern, t_w, env, rounds);
    const auto cond = extraction::condition(raw);
    extraction::save_binary(raw.bits, dir / "raw.bin");
    extraction::save_binary(cond.bits, dir / "conditioned.bin");
    extraction::save_ascii(cond.bits, dir / "conditioned.txt");
    io::write_text(dir / "raw.json", extraction::provenance_json(raw));
    io::write_text(dir / "conditioned.json", extraction::provenance_json(cond));
    run["harvest"] = {{"rounds", rounds}, {"raw_bits", raw.bits.size()}, {"conditioned_bits", cond.bits.size()}};
    log += fmt::format("harvest             : {} rounds, {} raw bits, {} conditioned bits\n", rounds, raw.bits.size(),
                       cond.bits.size());

    const auto summary = stats::run_battery(split_sequences(cond.bits, o.sequences, o.seq_bits));
    io::write_text(dir / "battery.csv", stats::battery_csv(summary));
    io::write_text(dir / "battery.txt", stats::battery_table(summary));
    run["battery"] = {{"verdict", summary.verdict ? "pass" : "fail"},
                      {"min_pass", summary.min_pass},
                      {"sequences", summary.num_sequences}};
    log += stats::battery_table(summary);

    auto in = timing_inputs(o, &chip, t_w, pattern, env);
    in.bits_per_rand_addr = *sel.bits_per_rand_addr;
    const auto est = throughput::throughput(in);
    io::write_text(dir / "throughput.csv",
                   throughput::throughput_csv_header() + throughput::throughput_csv_row(chip.chip_id, in, est));
    run["throughput_mbit_per_s"] = est.mbit_per_s;
    log += throughput_text(chip.chip_id, in, est);

    io::write_text(dir / "report.txt", log);
    if (o.format == "csv") {
        std::fputs(stats::battery_csv(summary).c_str(), stdout);
    } else {
        std::fputs(log.c_str(), stdout);
    }
    return finish(summary.verdict ? kExitOk : kExitBatteryFail);
}

// ---------------------------------------------------------------------------

void add_chip_source(CLI::App* sub, Options& o) {
    sub->add_option("--chip", o.chip_path, "Chip file")->envname("MRTG_CHIP");
    sub->add_option("--config", o.config_path, "Chip configuration (JSON)")->envname("MRTG_CONFIG");
    sub->add_option("--seed", o.seed, "Seed (chip creation, or noise seed with --chip)")->envname("MRTG_SEED");
}

void add_environment(CLI::App* sub, Options& o) {
    sub->add_option("--pattern", o.pattern, "Data pattern, e.g. solid:0x0000")->envname("MRTG_PATTERN");
    sub->add_option("--temp", o.temp, "Temperature in degC")->envname("MRTG_TEMP");
    sub->add_option("--field", o.field, "External field in mT")->envname("MRTG_FIELD");
    sub->add_option("--field-axis", o.field_axis, "Field axis (+x, -x, +y, -y, +z, -z)")->envname("MRTG_FIELD_AXIS");
}

void add_output(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "Output directory")->envname("MRTG_OUT");
    sub->add_option("--format", o.format, "Console format")
        ->check(CLI::IsMember({"csv", "text"}))
        ->envname("MRTG_FORMAT");
}

void add_characterization(CLI::App* sub, Options& o) {
    sub->add_option("--n", o.n, "Measurements per characterization")->envname("MRTG_N");
    sub->add_option("--th-l", o.th_l, "Lower flip-count threshold")->envname("MRTG_TH_L");
    sub->add_option("--th-u", o.th_u, "Upper flip-count threshold (default N - 1)")->envname("MRTG_TH_U");
}

void add_battery(CLI::App* sub, Options& o) {
    sub->add_option("--sequences", o.sequences, "Battery sequence count")->envname("MRTG_SEQUENCES");
    sub->add_option("--seq-bits", o.seq_bits, "Bits per battery sequence")->envname("MRTG_SEQ_BITS");
}

void add_timing(CLI::App* sub, Options& o) {
    sub->add_option("--t-rw", o.t_rw, "Read/write time per address in ns")->envname("MRTG_T_RW");
    sub->add_option("--t-hash", o.t_hash, "Hash time per block in ns")->envname("MRTG_T_HASH");
    sub->add_flag("--measure-timing", o.measure_timing, "Time this pipeline instead of using --t-rw/--t-hash");
}

int run(int argc, char** argv) {
    CLI::App app{"Reduced write-pulse toggle-MRAM TRNG simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    // Repeated flags override earlier ones, so scripts can append to a base command.
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    Options o;
    app.add_option("--threads", o.threads, "Worker threads (default: MRTG_THREADS or all cores)");

    auto* chip = app.add_subcommand("chip", "Create a simulated chip and save it");
    chip->add_option("--config", o.config_path, "Chip configuration (JSON)")->envname("MRTG_CONFIG");
    chip->add_option("--seed", o.seed, "Process-variation seed")->envname("MRTG_SEED");
    add_output(chip, o);

    auto* sweep = app.add_subcommand("sweep", "Error fraction versus write pulse width");
    add_chip_source(sweep, o);
    add_environment(sweep, o);
    add_output(sweep, o);
    sweep->add_option("--tw", o.tw_list, "Pulse widths in ns")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sweep->add_option("--n", o.n, "Measurements per pulse width")->envname("MRTG_N");

    auto* characterize = app.add_subcommand("characterize", "Flip counting and cell selection");
    add_chip_source(characterize, o);
    add_environment(characterize, o);
    add_output(characterize, o);
    add_characterization(characterize, o);
    characterize->add_option("--tw", o.tw, "Reduced pulse width in ns (default 2.5)")->envname("MRTG_TW");

    auto* generate = app.add_subcommand("generate", "Harvest and condition a bitstream");
    add_chip_source(generate, o);
    add_environment(generate, o);
    add_output(generate, o);
    add_battery(generate, o);
    generate->add_option("--selection", o.selection_path, "Selection file")->required();
    generate->add_option("--tw", o.tw, "Reduced pulse width in ns (default 2.5)")->envname("MRTG_TW");
    generate->add_option("--bits", o.bits, "Conditioned bits wanted (default sequences x seq-bits)");

    auto* test = app.add_subcommand("test", "Run the statistical battery on a bitstream");
    test->add_option("--input", o.input_path, "Bitstream (binary or ASCII)")->required();
    add_output(test, o);
    add_battery(test, o);

    auto* tput = app.add_subcommand("throughput", "Throughput estimate");
    add_chip_source(tput, o);
    add_environment(tput, o);
    add_output(tput, o);
    add_timing(tput, o);
    tput->add_option("--bits-per-addr", o.bits_per_addr, "Random bits per random address");
    tput->add_option("--selection", o.selection_path, "Selection file providing bits per address");
    tput->add_option("--chip-id", o.chip_id, "Chip label for the report");
    tput->add_option("--tw", o.tw, "Reduced pulse width for --measure-timing (default 2.5)");

    auto* pipeline = app.add_subcommand("pipeline", "Sweep, characterize, harvest, condition, test, report");
    add_chip_source(pipeline, o);
    add_environment(pipeline, o);
    add_output(pipeline, o);
    add_characterization(pipeline, o);
    add_battery(pipeline, o);
    add_timing(pipeline, o);
    pipeline->add_option("--tw", o.tw, "Reduced pulse width in ns (default: chosen from the sweep)")
        ->envname("MRTG_TW");
    pipeline->add_option("--tw-list", o.tw_list, "Sweep pulse widths in ns")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (o.threads != 0) {
        set_thread_count(o.threads);
    }

    try {
        if (*chip) return cmd_chip(o);
        if (*sweep) return cmd_sweep(o);
        if (*characterize) return cmd_characterize(o);
        if (*generate) return cmd_generate(o);
        if (*test) return cmd_test(o);
        if (*tput) return cmd_throughput(o);
        if (*pipeline) return cmd_pipeline(o);
    } catch (const EmptySelection& e) {
        fmt::print(stderr, "mrtg: empty selection: {}\n", e.what());
        return kExitEmptySelection;
    } catch (const IoError& e) {
        fmt::print(stderr, "mrtg: I/O error: {}\n", e.what());
        return kExitIo;
    } catch (const InvalidArgument& e) {
        fmt::print(stderr, "mrtg: {}\n", e.what());
        return kExitUsage;
    } catch (const OutOfRange& e) {
        fmt::print(stderr, "mrtg: {}\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        fmt::print(stderr, "mrtg: {}\n", e.what());
        return 1;
    }
}
