#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "evcount/detection.hpp"
#include "evcount/event_io.hpp"
#include "evcount/filtering.hpp"
#include "evcount/flow_control.hpp"
#include "evcount/frame_builder.hpp"
#include "evcount/pipeline.hpp"
#include "evcount/runs.hpp"
#include "evcount/simulator.hpp"
#include "evcount/tracking.hpp"

namespace py = pybind11;
using namespace evcount;

namespace {

py::dict report_to_dict(const RunReport& report) {
    py::dict d;
    d["pipeline_count"] = report.pipeline_count;
    if (report.ground_truth)
        d["ground_truth"] = *report.ground_truth;
    if (report.expected)
        d["expected"] = *report.expected;
    d["events_processed"] = report.events_processed;
    d["wall_seconds"] = report.wall_seconds;
    d["events_per_second"] = report.events_per_second;
    d["safety_tripped"] = report.safety_tripped;
    py::list seconds;
    for (const SecondStat& s : report.seconds) {
        py::dict row;
        row["second"] = s.second;
        row["count_delta"] = s.count_delta;
        row["count_total"] = s.count_total;
        if (s.has_control) {
            row["error"] = s.error;
            row["u"] = s.u;
            row["on_fraction"] = s.on_fraction;
            row["tripped"] = s.tripped;
        }
        seconds.append(row);
    }
    d["seconds"] = seconds;
    py::dict params;
    for (const auto& [key, value] : report.parameters)
        params[py::str(key)] = value;
    d["parameters"] = params;
    return d;
}

GrainSimParams sim_params_from_kwargs(const SensorGeometry& geometry, double emission_rate,
                                      double noise_rate, double efficiency, double texture_rate,
                                      std::int64_t micro_step_us, int truth_row, bool distinct_columns,
                                      std::pair<double, double> grain_size) {
    GrainSimParams p;
    p.geometry = geometry;
    p.emission_rate = emission_rate;
    p.noise_rate = noise_rate;
    p.event_efficiency = efficiency;
    p.texture_rate = texture_rate;
    p.micro_step_us = micro_step_us;
    p.truth_row = truth_row;
    p.distinct_columns = distinct_columns;
    p.grain_side_min = grain_size.first;
    p.grain_side_max = grain_size.second;
    return p;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Event-camera falling-object counting and feeder flow regulation";

    py::register_exception<StreamError>(m, "StreamError");

    py::enum_<Polarity>(m, "Polarity")
        .value("NEGATIVE", Polarity::negative)
        .value("POSITIVE", Polarity::positive);

    py::class_<Event>(m, "Event")
        .def(py::init([](std::int64_t t, std::uint16_t x, std::uint16_t y, int polarity) {
                 return Event{t, x, y, polarity ? Polarity::positive : Polarity::negative};
             }),
             py::arg("t"), py::arg("x"), py::arg("y"), py::arg("polarity"))
        .def_readonly("t", &Event::t)
        .def_readonly("x", &Event::x)
        .def_readonly("y", &Event::y)
        .def_property_readonly("polarity",
                               [](const Event& ev) { return ev.polarity == Polarity::positive ? 1 : 0; })
        .def("__repr__", [](const Event& ev) {
            std::ostringstream s;
            s << "Event(t=" << ev.t << ", x=" << ev.x << ", y=" << ev.y << ", polarity="
              << (ev.polarity == Polarity::positive ? 1 : 0) << ")";
            return s.str();
        });

    py::class_<SensorGeometry>(m, "SensorGeometry")
        .def(py::init<std::uint16_t, std::uint16_t>(), py::arg("width") = 1280, py::arg("height") = 720)
        .def_readwrite("width", &SensorGeometry::width)
        .def_readwrite("height", &SensorGeometry::height)
        .def("__repr__", [](const SensorGeometry& g) {
            return "SensorGeometry(" + std::to_string(g.width) + ", " + std::to_string(g.height) + ")";
        });

    py::class_<EventStream>(m, "EventStream")
        .def(py::init([](const SensorGeometry& geometry) {
                 EventStream s;
                 s.geometry = geometry;
                 return s;
             }),
             py::arg("geometry") = SensorGeometry{})
        .def_readwrite("geometry", &EventStream::geometry)
        .def("append",
             [](EventStream& s, std::int64_t t, std::uint16_t x, std::uint16_t y, int polarity) {
                 s.events.push_back(Event{t, x, y, polarity ? Polarity::positive : Polarity::negative});
             },
             py::arg("t"), py::arg("x"), py::arg("y"), py::arg("polarity"))
        .def("__len__", [](const EventStream& s) { return s.size(); })
        .def("__getitem__",
             [](const EventStream& s, std::size_t i) {
                 if (i >= s.size())
                     throw py::index_error();
                 return s.events[i];
             })
        .def("validate", [](const EventStream& s) { validate_stream(s); });

    m.def("read_events", [](const std::string& path) { return read_events_file(path); }, py::arg("path"),
          "Read a .csv/.evb/.bin event file (format from the extension)");
    m.def("read_events",
          [](const std::string& path, const SensorGeometry& geometry) {
              return read_events_file(path, std::nullopt, geometry);
          },
          py::arg("path"), py::arg("geometry"));
    m.def("write_events", [](const std::string& path, const EventStream& s) { write_events_file(path, s); },
          py::arg("path"), py::arg("stream"));

    // filtering
    py::class_<ActivityFilterParams>(m, "ActivityFilterParams")
        .def(py::init<int, std::int64_t>(), py::arg("neighborhood_radius") = 1,
             py::arg("time_window_us") = 5000)
        .def_readwrite("neighborhood_radius", &ActivityFilterParams::neighborhood_radius)
        .def_readwrite("time_window_us", &ActivityFilterParams::time_window_us);

    m.def("polarity_filter",
          [](const EventStream& s, int keep) {
              return polarity_filter(s, keep ? Polarity::positive : Polarity::negative);
          },
          py::arg("stream"), py::arg("keep") = 1);
    m.def("activity_filter", &activity_filter, py::arg("stream"),
          py::arg("params") = ActivityFilterParams{});

    // frames
    py::class_<BinaryFrame>(m, "BinaryFrame")
        .def_property_readonly("index", &BinaryFrame::index)
        .def_property_readonly("window_start_us", &BinaryFrame::window_start_us)
        .def_property_readonly("window_end_us", &BinaryFrame::window_end_us)
        .def("at", &BinaryFrame::at, py::arg("x"), py::arg("y"))
        .def("active_pixels",
             [](const BinaryFrame& f) {
                 py::list out;
                 for (const PixelCoord& p : f.active_pixels())
                     out.append(py::make_tuple(p.x, p.y));
                 return out;
             })
        .def("to_numpy", [](const BinaryFrame& f) {
            const auto dense = f.to_dense();
            py::array_t<std::uint8_t> arr({int(f.geometry().height), int(f.geometry().width)});
            std::memcpy(arr.mutable_data(), dense.data(), dense.size());
            return arr;
        });

    m.def("accumulate",
          [](const EventStream& s, std::int64_t period_us) {
              return accumulate(s, AccumulationParams{period_us});
          },
          py::arg("stream"), py::arg("period_us") = 2000);

    // detection
    py::class_<BoundingBox>(m, "BoundingBox")
        .def(py::init<int, int, int, int>(), py::arg("x_min"), py::arg("y_min"), py::arg("x_max"),
             py::arg("y_max"))
        .def_readwrite("x_min", &BoundingBox::x_min)
        .def_readwrite("y_min", &BoundingBox::y_min)
        .def_readwrite("x_max", &BoundingBox::x_max)
        .def_readwrite("y_max", &BoundingBox::y_max)
        .def("area", &BoundingBox::area)
        .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
        .def("__repr__", [](const BoundingBox& b) {
            std::ostringstream s;
            s << "BoundingBox(" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << ")";
            return s.str();
        });

    m.def("detect",
          [](const BinaryFrame& frame, int connectivity, std::int64_t min_area) {
              return detect(frame, DetectionParams{connectivity, min_area});
          },
          py::arg("frame"), py::arg("connectivity") = 8, py::arg("min_area") = 4);
    m.def("box_center_y", &box_center_y, py::arg("box"));

    // tracking
    m.def("iou", &iou, py::arg("a"), py::arg("b"), "Jaccard index of two boxes (inclusive pixel areas)");
    m.def("iou_ratio",
          [](const BoundingBox& a, const BoundingBox& b) {
              const IouRatio r = iou_ratio(a, b);
              return py::make_tuple(r.intersection, r.union_area);
          },
          py::arg("a"), py::arg("b"), "Exact (intersection, union) pixel areas");

    py::class_<Tracker>(m, "Tracker")
        .def(py::init([](const SensorGeometry& geometry, std::optional<std::array<int, 3>> lines,
                         double iou_threshold, int max_missed_frames) {
                 const auto rows = lines ? *lines : CountLines::default_rows(geometry);
                 return Tracker(TrackerParams{iou_threshold, max_missed_frames},
                                CountLines(rows, geometry));
             }),
             py::arg("geometry"), py::arg("lines") = std::nullopt, py::arg("iou_threshold") = 0.1,
             py::arg("max_missed_frames") = 0)
        .def("update", &Tracker::update, py::arg("frame_index"), py::arg("boxes"))
        .def_property_readonly("count", &Tracker::count)
        .def_property_readonly("per_line_counts",
                               [](const Tracker& t) { return t.lines().counts; })
        .def_property_readonly("line_rows", [](const Tracker& t) { return t.lines().rows; });

    // flow control
    py::class_<PidController>(m, "PidController")
        .def(py::init([](double kp, double ki, double kd) { return PidController(PidGains{kp, ki, kd}); }),
             py::arg("kp") = 2.0, py::arg("ki") = 0.2, py::arg("kd") = 0.1)
        .def("step", &PidController::step, py::arg("error"))
        .def("reset", &PidController::reset)
        .def_property_readonly("error_sum", &PidController::error_sum)
        .def_property_readonly("prev_error", &PidController::prev_error)
        .def_property_readonly("step_count", &PidController::step_count);

    m.def("compute_error",
          [](double setpoint_gpm, double total_counted, double elapsed_s) {
              return compute_error(FlowSetpoint{setpoint_gpm}, total_counted, elapsed_s);
          },
          py::arg("setpoint_grains_per_minute"), py::arg("total_counted"), py::arg("elapsed_s"));
    m.def("to_actuation", [](double u, double scale) { return to_actuation(u, scale).on_fraction; },
          py::arg("u"), py::arg("scale") = 0.01);

    // whole-pipeline entry points
    m.def("count_file",
          [](const std::string& path, const SensorGeometry& geometry, bool concurrent,
             bool use_activity_filter, std::int64_t accumulation_us, double iou_threshold,
             std::optional<std::array<int, 3>> lines) {
              PipelineParams params;
              params.geometry = geometry;
              params.use_activity_filter = use_activity_filter;
              params.accumulation.period_us = accumulation_us;
              params.tracker.iou_threshold = iou_threshold;
              if (lines)
                  params.lines = *lines;
              const auto format = format_from_extension(path);
              if (!format)
                  throw IoError("cannot infer stream format of \"" + path + "\"");
              std::ifstream in(path, std::ios::binary);
              if (!in)
                  throw IoError("cannot open \"" + path + "\" for reading");
              EventReader reader(in, *format, geometry);
              return report_to_dict(count_events(
                  reader, params, concurrent ? ExecutionMode::concurrent : ExecutionMode::sequential));
          },
          py::arg("path"), py::arg("geometry") = SensorGeometry{}, py::arg("concurrent") = false,
          py::arg("use_activity_filter") = true, py::arg("accumulation_us") = 2000,
          py::arg("iou_threshold") = 0.1, py::arg("lines") = std::nullopt);

    m.def("count_stream",
          [](const EventStream& stream, bool concurrent) {
              PipelineParams params;
              params.geometry = stream.geometry;
              return report_to_dict(count_stream(
                  stream, params, concurrent ? ExecutionMode::concurrent : ExecutionMode::sequential));
          },
          py::arg("stream"), py::arg("concurrent") = false);

    m.def("run_closed_loop",
          [](double setpoint_gpm, std::int64_t duration_s, std::uint64_t seed,
             const SensorGeometry& geometry, double emission_rate, double noise_rate, double efficiency,
             double texture_rate, std::int64_t micro_step_us, int truth_row, bool distinct_columns,
             std::pair<double, double> grain_size, double kp, double ki, double kd,
             double actuation_scale) {
              ClosedLoopConfig config;
              config.sim = sim_params_from_kwargs(geometry, emission_rate, noise_rate, efficiency,
                                                  texture_rate, micro_step_us, truth_row,
                                                  distinct_columns, grain_size);
              config.pipeline.geometry = geometry;
              config.setpoint = FlowSetpoint{setpoint_gpm};
              config.gains = PidGains{kp, ki, kd};
              config.actuation_scale = actuation_scale;
              config.duration_s = duration_s;
              config.seed = seed;
              return report_to_dict(run_closed_loop(config));
          },
          py::arg("setpoint_grains_per_minute"), py::arg("duration_s") = 300, py::arg("seed") = 1,
          py::arg("geometry") = SensorGeometry{}, py::arg("emission_rate") = 40.0,
          py::arg("noise_rate") = 0.5, py::arg("efficiency") = 0.9, py::arg("texture_rate") = 1000.0,
          py::arg("micro_step_us") = 200, py::arg("truth_row") = -1, py::arg("distinct_columns") = false,
          py::arg("grain_size") = std::pair<double, double>{6.0, 14.0}, py::arg("kp") = 2.0,
          py::arg("ki") = 0.2, py::arg("kd") = 0.1, py::arg("actuation_scale") = 0.01);

    m.def("run_fixed_count",
          [](std::int64_t stop_after, double duty, std::uint64_t seed, const SensorGeometry& geometry,
             double emission_rate, double noise_rate, double efficiency, double texture_rate,
             std::int64_t micro_step_us, int truth_row, bool distinct_columns,
             std::pair<double, double> grain_size) {
              FixedCountConfig config;
              config.sim = sim_params_from_kwargs(geometry, emission_rate, noise_rate, efficiency,
                                                  texture_rate, micro_step_us, truth_row,
                                                  distinct_columns, grain_size);
              config.pipeline.geometry = geometry;
              config.duty = duty;
              config.stop_after = stop_after;
              config.seed = seed;
              return report_to_dict(run_fixed_count(config));
          },
          py::arg("stop_after"), py::arg("duty") = 0.1, py::arg("seed") = 1,
          py::arg("geometry") = SensorGeometry{}, py::arg("emission_rate") = 40.0,
          py::arg("noise_rate") = 0.5, py::arg("efficiency") = 0.9, py::arg("texture_rate") = 1000.0,
          py::arg("micro_step_us") = 200, py::arg("truth_row") = -1, py::arg("distinct_columns") = false,
          py::arg("grain_size") = std::pair<double, double>{6.0, 14.0});

    m.def("generate_recording",
          [](const std::string& out_path, double duty, std::int64_t duration_s, std::uint64_t seed,
             const SensorGeometry& geometry, double emission_rate, double noise_rate, double efficiency,
             double texture_rate, std::int64_t micro_step_us, int truth_row, bool distinct_columns,
             std::pair<double, double> grain_size, std::optional<std::string> truth_path) {
              OpenLoopConfig config;
              config.sim = sim_params_from_kwargs(geometry, emission_rate, noise_rate, efficiency,
                                                  texture_rate, micro_step_us, truth_row,
                                                  distinct_columns, grain_size);
              config.duty = duty;
              config.duration_s = duration_s;
              config.seed = seed;

              const auto format = format_from_extension(out_path);
              if (!format)
                  throw IoError("cannot infer stream format of \"" + out_path + "\"");
              std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
              if (!out)
                  throw IoError("cannot open \"" + out_path + "\" for writing");
              EventWriter writer(out, *format, geometry);
              const GenResult result =
                  run_open_loop(config, [&writer](std::span<const Event> batch) { writer.write(batch); });
              writer.flush();

              if (truth_path) {
                  std::ofstream truth(*truth_path, std::ios::trunc);
                  if (!truth)
                      throw IoError("cannot open \"" + *truth_path + "\" for writing");
                  write_ground_truth_csv(result.exited, truth);
              }

              py::dict d;
              d["events"] = result.events;
              d["spawned"] = result.spawned;
              d["truth_crossed"] = result.truth_crossed;
              d["duration_us"] = result.duration_us;
              return d;
          },
          py::arg("out_path"), py::arg("duty") = 0.1, py::arg("duration_s") = 60, py::arg("seed") = 1,
          py::arg("geometry") = SensorGeometry{}, py::arg("emission_rate") = 40.0,
          py::arg("noise_rate") = 0.5, py::arg("efficiency") = 0.9, py::arg("texture_rate") = 1000.0,
          py::arg("micro_step_us") = 200, py::arg("truth_row") = -1, py::arg("distinct_columns") = false,
          py::arg("grain_size") = std::pair<double, double>{6.0, 14.0},
          py::arg("truth_path") = std::nullopt);

    m.attr("__version__") = "0.1.0";
}
