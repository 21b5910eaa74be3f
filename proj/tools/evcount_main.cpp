// evcount: count falling objects in DVS event streams, generate synthetic
// streams, and run the closed-loop feeder simulation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evcount/event_io.hpp"
#include "evcount/pipeline.hpp"
#include "evcount/runs.hpp"
#include "evcount/simulator.hpp"

namespace fs = std::filesystem;
using namespace evcount;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitSafetyTrip = 3;

struct GeometryFlags {
    int width = 1280;
    int height = 720;

    SensorGeometry resolve() const { return {std::uint16_t(width), std::uint16_t(height)}; }
};

struct PipelineFlags {
    int filter_radius = 1;
    std::int64_t filter_window_us = 5000;
    bool no_activity_filter = false;
    std::int64_t accumulation_us = 2000;
    int connectivity = 8;
    std::int64_t min_area = 4;
    double iou_threshold = 0.1;
    int max_missed_frames = 0;
    std::vector<int> lines;

    void attach(CLI::App& cmd) {
        cmd.add_option("--filter-radius", filter_radius, "Activity filter Chebyshev radius")
            ->capture_default_str();
        cmd.add_option("--filter-window-us", filter_window_us, "Activity filter time window [us]")
            ->capture_default_str();
        cmd.add_flag("--no-activity-filter", no_activity_filter, "Disable the activity filter");
        cmd.add_option("--accumulation-us", accumulation_us, "Frame accumulation period [us]")
            ->capture_default_str();
        cmd.add_option("--connectivity", connectivity, "Component connectivity")
            ->check(CLI::IsMember({4, 8}))
            ->capture_default_str();
        cmd.add_option("--min-area", min_area, "Minimum component pixel count")->capture_default_str();
        cmd.add_option("--iou-threshold", iou_threshold, "Box match threshold, exclusive")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd.add_option("--max-missed-frames", max_missed_frames,
                       "Frames an unmatched object survives before expiring")
            ->capture_default_str();
        cmd.add_option("--lines", lines, "Count line rows y1,y2,y3 (default 40/50/60% of height)")
            ->delimiter(',');
    }

    PipelineParams resolve(const SensorGeometry& geometry) const {
        PipelineParams params;
        params.geometry = geometry;
        params.use_activity_filter = !no_activity_filter;
        params.activity = {filter_radius, filter_window_us};
        params.accumulation = {accumulation_us};
        params.detection = {connectivity, min_area};
        params.tracker = {iou_threshold, max_missed_frames};
        if (!lines.empty()) {
            if (lines.size() != 3)
                throw CLI::ValidationError("--lines", "expects exactly three rows y1,y2,y3");
            params.lines = {lines[0], lines[1], lines[2]};
        }
        return params;
    }
};

struct SimFlags {
    std::uint64_t seed = 1;
    double emission_rate = 40.0;
    double noise_rate = 0.5;
    double efficiency = 0.9;
    double texture_rate = 1000.0;
    std::vector<double> grain_size;
    std::int64_t micro_step_us = 200;
    int truth_row = -1;
    bool distinct_columns = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--seed", seed, "RNG seed (EVCOUNT_SEED overrides)")->capture_default_str();
        cmd.add_option("--emission-rate", emission_rate, "Grains per second at full duty")
            ->capture_default_str();
        cmd.add_option("--noise-rate", noise_rate, "Noise events per pixel per second")
            ->capture_default_str();
        cmd.add_option("--efficiency", efficiency, "Per-pixel edge event probability")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd.add_option("--texture-rate", texture_rate, "Texture events per covered pixel per second")
            ->capture_default_str();
        cmd.add_option("--grain-size", grain_size, "Grain side range min,max [px]")->delimiter(',');
        cmd.add_option("--micro-step-us", micro_step_us, "Simulation micro step [us]")
            ->capture_default_str();
        cmd.add_option("--truth-row", truth_row, "Ground-truth reference row (default 40% of height)");
        cmd.add_flag("--distinct-columns", distinct_columns,
                     "Pin grains to non-overlapping column slots (disables occlusion)");
    }

    GrainSimParams resolve(const SensorGeometry& geometry) const {
        GrainSimParams params;
        params.geometry = geometry;
        params.emission_rate = emission_rate;
        params.noise_rate = noise_rate;
        params.event_efficiency = efficiency;
        params.texture_rate = texture_rate;
        params.micro_step_us = micro_step_us;
        params.truth_row = truth_row;
        params.distinct_columns = distinct_columns;
        if (!grain_size.empty()) {
            if (grain_size.size() != 2)
                throw CLI::ValidationError("--grain-size", "expects min,max");
            params.grain_side_min = grain_size[0];
            params.grain_side_max = grain_size[1];
        }
        return params;
    }

    std::uint64_t resolve_seed() const {
        if (const char* env = std::getenv("EVCOUNT_SEED")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(env, &end, 10);
            if (end && *end == '\0')
                return v;
            std::cerr << "warning: ignoring unparsable EVCOUNT_SEED=\"" << env << "\"\n";
        }
        return seed;
    }
};

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open \"" + path.string() + "\" for writing");
    out << text;
    if (!out.flush())
        throw IoError("write failure on \"" + path.string() + "\"");
}

void emit_json(const std::optional<std::string>& json_path, const RunReport& report) {
    if (!json_path)
        return;
    if (*json_path == "-")
        std::cout << report.to_json() << "\n";
    else
        write_text_file(*json_path, report.to_json() + "\n");
}

void write_csv_outputs(const RunReport& report, const std::optional<std::string>& counts_csv,
                       const std::optional<std::string>& control_csv) {
    if (counts_csv) {
        std::ofstream out(*counts_csv, std::ios::trunc);
        if (!out)
            throw IoError("cannot open \"" + *counts_csv + "\" for writing");
        report.write_counts_csv(out);
    }
    if (control_csv) {
        std::ofstream out(*control_csv, std::ios::trunc);
        if (!out)
            throw IoError("cannot open \"" + *control_csv + "\" for writing");
        report.write_control_csv(out);
    }
}

// Fans simulated event batches out to the requested stream writers.
class StreamDump {
public:
    StreamDump(const std::optional<std::string>& csv_path, const std::optional<std::string>& bin_path,
               const SensorGeometry& geometry) {
        if (csv_path) {
            csv_file_.emplace(*csv_path, std::ios::trunc);
            if (!*csv_file_)
                throw IoError("cannot open \"" + *csv_path + "\" for writing");
            csv_writer_.emplace(*csv_file_, StreamFormat::csv, geometry);
        }
        if (bin_path) {
            bin_file_.emplace(*bin_path, std::ios::binary | std::ios::trunc);
            if (!*bin_file_)
                throw IoError("cannot open \"" + *bin_path + "\" for writing");
            bin_writer_.emplace(*bin_file_, StreamFormat::binary, geometry);
        }
    }

    bool active() const { return csv_writer_ || bin_writer_; }

    EventObserver observer() {
        return [this](std::span<const Event> batch) {
            if (csv_writer_)
                csv_writer_->write(batch);
            if (bin_writer_)
                bin_writer_->write(batch);
        };
    }

    void flush() {
        if (csv_writer_)
            csv_writer_->flush();
        if (bin_writer_)
            bin_writer_->flush();
    }

private:
    std::optional<std::ofstream> csv_file_, bin_file_;
    std::optional<EventWriter> csv_writer_, bin_writer_;
};

FrameSink make_frame_dumper(const std::string& dir) {
    fs::create_directories(dir);
    return [dir](const BinaryFrame& frame) {
        if (frame.active_pixels().empty())
            return; // all-zero frames are not worth a file
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%08llu.pgm", static_cast<unsigned long long>(frame.index()));
        std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write frame dump in \"" + dir + "\"");
        write_pgm(frame, out);
    };
}

int cmd_count(const std::string& input, const std::optional<std::string>& format_name,
              const GeometryFlags& geo_flags, const PipelineFlags& pipeline_flags, bool concurrent,
              const std::optional<std::string>& csv_out, const std::optional<std::string>& json_out,
              const std::optional<std::string>& dump_dir) {
    std::optional<StreamFormat> format;
    if (format_name)
        format = *format_name == "csv" ? StreamFormat::csv : StreamFormat::binary;
    else
        format = format_from_extension(input);
    if (!format)
        throw IoError("cannot infer stream format of \"" + input + "\"; pass --format");

    const PipelineParams params = pipeline_flags.resolve(geo_flags.resolve());

    std::ifstream in(input, std::ios::binary);
    if (!in)
        throw IoError("cannot open \"" + input + "\" for reading");
    EventReader reader(in, *format, params.geometry);

    FrameSink dumper;
    if (dump_dir)
        dumper = make_frame_dumper(*dump_dir);

    RunReport report = count_events(reader, params,
                                    concurrent ? ExecutionMode::concurrent : ExecutionMode::sequential,
                                    dumper);
    report.parameters["input"] = input;
    report.parameters["mode"] = concurrent ? "concurrent" : "sequential";

    report.write_counts_csv(std::cout);
    std::cout << "total=" << report.pipeline_count << "\n";
    if (csv_out) {
        std::ofstream out(*csv_out, std::ios::trunc);
        if (!out)
            throw IoError("cannot open \"" + *csv_out + "\" for writing");
        report.write_counts_csv(out);
    }
    emit_json(json_out, report);
    return kExitOk;
}

int cmd_sim(const GeometryFlags& geo_flags, const SimFlags& sim_flags, const PipelineFlags& pipeline_flags,
            double setpoint, std::int64_t duration_s, double kp, double ki, double kd, double actuation_scale,
            int congestion_window_s, std::int64_t fixed_count, double duty,
            const std::optional<std::string>& counts_csv, const std::optional<std::string>& control_csv,
            const std::optional<std::string>& out_csv, const std::optional<std::string>& out_bin,
            const std::optional<std::string>& truth_out, const std::optional<std::string>& json_out) {
    const SensorGeometry geometry = geo_flags.resolve();
    const GrainSimParams sim_params = sim_flags.resolve(geometry);
    const PipelineParams pipeline_params = pipeline_flags.resolve(geometry);
    const std::uint64_t seed = sim_flags.resolve_seed();

    StreamDump dump(out_csv, out_bin, geometry);
    std::vector<GroundTruthRecord> truth_records;
    RunReport report;

    if (fixed_count > 0) {
        FixedCountConfig config;
        config.sim = sim_params;
        config.pipeline = pipeline_params;
        config.duty = duty;
        config.stop_after = fixed_count;
        config.seed = seed;
        report = run_fixed_count(config, &truth_records);
    } else {
        ClosedLoopConfig config;
        config.sim = sim_params;
        config.pipeline = pipeline_params;
        config.setpoint = FlowSetpoint{setpoint};
        config.gains = PidGains{kp, ki, kd};
        config.actuation_scale = actuation_scale;
        config.safety.congestion_window_s = congestion_window_s;
        config.duration_s = duration_s;
        config.seed = seed;
        report = run_closed_loop(config, dump.active() ? dump.observer() : EventObserver{}, &truth_records);
    }
    dump.flush();

    if (truth_out) {
        std::ofstream out(*truth_out, std::ios::trunc);
        if (!out)
            throw IoError("cannot open \"" + *truth_out + "\" for writing");
        write_ground_truth_csv(truth_records, out);
    }

    write_csv_outputs(report, counts_csv, control_csv);
    emit_json(json_out ? json_out : std::optional<std::string>("-"), report);
    return report.safety_tripped ? kExitSafetyTrip : kExitOk;
}

int cmd_gen(const GeometryFlags& geo_flags, const SimFlags& sim_flags, double duty, std::int64_t duration_s,
            const std::optional<std::string>& out_csv, const std::optional<std::string>& out_bin,
            const std::optional<std::string>& truth_out) {
    const SensorGeometry geometry = geo_flags.resolve();
    StreamDump dump(out_csv, out_bin, geometry);
    if (!dump.active())
        throw CLI::ValidationError("gen", "needs --out-csv and/or --out-bin");

    OpenLoopConfig config;
    config.sim = sim_flags.resolve(geometry);
    config.duty = duty;
    config.duration_s = duration_s;
    config.seed = sim_flags.resolve_seed();

    const GenResult result = run_open_loop(config, dump.observer());
    dump.flush();

    if (truth_out) {
        std::ofstream out(*truth_out, std::ios::trunc);
        if (!out)
            throw IoError("cannot open \"" + *truth_out + "\" for writing");
        write_ground_truth_csv(result.exited, out);
    }

    std::cout << "{\n"
              << "  \"events\": " << result.events << ",\n"
              << "  \"spawned\": " << result.spawned << ",\n"
              << "  \"truth_crossed\": " << result.truth_crossed << ",\n"
              << "  \"duration_us\": " << result.duration_us << "\n"
              << "}\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera object counting and feeder flow regulation"};
    app.require_subcommand(1);

    GeometryFlags geo;
    const auto attach_geometry = [&geo](CLI::App& cmd) {
        cmd.add_option("--width", geo.width, "Sensor width [px]")->check(CLI::Range(1, 65535))
            ->capture_default_str();
        cmd.add_option("--height", geo.height, "Sensor height [px]")->check(CLI::Range(1, 65535))
            ->capture_default_str();
    };

    // count
    auto* count = app.add_subcommand("count", "Count objects in a recorded event stream");
    std::string input;
    std::optional<std::string> format_name, csv_out, json_out, dump_dir;
    bool concurrent = false;
    PipelineFlags count_pipeline;
    count->add_option("input", input, "Event stream file (.csv, .evb/.bin)")->required();
    count->add_option("--format", format_name, "Stream format")->check(CLI::IsMember({"csv", "binary"}));
    attach_geometry(*count);
    count_pipeline.attach(*count);
    count->add_flag("--concurrent", concurrent, "Run filter and counting stages on separate threads");
    count->add_option("--csv-out", csv_out, "Write the per-second CSV here as well");
    count->add_option("--json", json_out, "Write a JSON summary ('-' for stdout)");
    count->add_option("--dump-frames", dump_dir, "Dump non-empty frames as PGM into this directory");

    // sim / closed-loop
    auto* sim = app.add_subcommand("sim", "Closed-loop feeder simulation (alias: closed-loop)");
    sim->alias("closed-loop");
    SimFlags sim_flags;
    PipelineFlags sim_pipeline;
    double setpoint = 0.0;
    std::int64_t duration_s = 300;
    double kp = 2.0, ki = 0.2, kd = 0.1, actuation_scale = 0.01;
    int congestion_window_s = 10;
    std::int64_t fixed_count = 0;
    double duty = 0.1;
    std::optional<std::string> counts_csv, control_csv, sim_out_csv, sim_out_bin, sim_truth_out, sim_json;
    auto* setpoint_opt = sim->add_option("--setpoint", setpoint, "Target flow [grains/minute]")
                             ->check(CLI::PositiveNumber);
    sim->add_option("--duration-s", duration_s, "Simulated run length [s]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    attach_geometry(*sim);
    sim_flags.attach(*sim);
    sim_pipeline.attach(*sim);
    sim->add_option("--kp", kp, "Proportional gain")->capture_default_str();
    sim->add_option("--ki", ki, "Integral gain")->capture_default_str();
    sim->add_option("--kd", kd, "Derivative gain")->capture_default_str();
    sim->add_option("--actuation-scale", actuation_scale, "Duty per control unit")->capture_default_str();
    sim->add_option("--congestion-window-s", congestion_window_s, "Safety window [s]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* fixed_opt = sim->add_option("--fixed-count", fixed_count,
                                      "Run at constant --duty until this count is reached")
                          ->excludes(setpoint_opt);
    sim->add_option("--duty", duty, "Constant duty for --fixed-count runs")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sim->add_option("--counts-csv", counts_csv, "Write per-second counting CSV here");
    sim->add_option("--control-csv", control_csv, "Write per-tick controller CSV here");
    sim->add_option("--out-csv", sim_out_csv, "Dump the event stream as CSV here");
    sim->add_option("--out-bin", sim_out_bin, "Dump the event stream as binary here");
    sim->add_option("--truth-out", sim_truth_out, "Write the ground-truth CSV here");
    sim->add_option("--json", sim_json, "Write the JSON summary here ('-' for stdout, the default)");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic recording at constant duty");
    SimFlags gen_flags;
    double gen_duty = 0.1;
    std::int64_t gen_duration_s = 60;
    std::optional<std::string> gen_out_csv, gen_out_bin, gen_truth_out;
    attach_geometry(*gen);
    gen_flags.attach(*gen);
    gen->add_option("--duty", gen_duty, "Constant feeder duty")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen->add_option("--duration-s", gen_duration_s, "Recording length [s]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--out-csv", gen_out_csv, "Write the stream as CSV here");
    gen->add_option("--out-bin", gen_out_bin, "Write the stream as binary here");
    gen->add_option("--truth-out", gen_truth_out, "Write the ground-truth CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage; // every usage problem maps to 1
    }

    try {
        if (count->parsed())
            return cmd_count(input, format_name, geo, count_pipeline, concurrent, csv_out, json_out,
                             dump_dir);
        if (sim->parsed()) {
            if (fixed_opt->count() == 0 && setpoint_opt->count() == 0) {
                std::cerr << "sim: either --setpoint or --fixed-count is required\n";
                return kExitUsage;
            }
            return cmd_sim(geo, sim_flags, sim_pipeline, setpoint, duration_s, kp, ki, kd, actuation_scale,
                           congestion_window_s, fixed_count, duty, counts_csv, control_csv, sim_out_csv,
                           sim_out_bin, sim_truth_out, sim_json);
        }
        if (gen->parsed())
            return cmd_gen(geo, gen_flags, gen_duty, gen_duration_s, gen_out_csv, gen_out_bin,
                           gen_truth_out);
    } catch (const CLI::ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const StreamError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
