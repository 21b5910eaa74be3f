#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evcount/detection.hpp"
#include "evcount/event_io.hpp"
#include "evcount/events.hpp"
#include "evcount/filtering.hpp"
#include "evcount/frame_builder.hpp"
#include "evcount/report.hpp"
#include "evcount/tracking.hpp"

namespace evcount {

struct PipelineParams {
    SensorGeometry geometry;
    bool use_activity_filter = true;
    ActivityFilterParams activity;
    AccumulationParams accumulation;
    DetectionParams detection;
    TrackerParams tracker;
    std::optional<std::array<int, 3>> lines; ///< count line rows; default 40/50/60% of height

    CountLines make_lines() const {
        return CountLines(lines ? *lines : CountLines::default_rows(geometry), geometry);
    }
};

/// Noise reduction ahead of frame building. The activity filter sees both
/// polarities (negative events still vouch for their neighbors); the
/// polarity filter then keeps positives for the frame builder.
class FilterStage {
public:
    explicit FilterStage(const PipelineParams& params);

    /// Appends surviving events to `out`, order preserved.
    void process(std::span<const Event> in, std::vector<Event>& out);

private:
    std::optional<ActivityFilter> activity_;
    PolarityFilter polarity_{Polarity::positive};
};

/// Frames -> boxes -> tracks -> per-second counts. Strictly sequential.
class CountStage {
public:
    explicit CountStage(const PipelineParams& params);

    void push(std::span<const Event> filtered);
    void advance_to(std::int64_t t_us); ///< emit all frames ending at or before t_us
    void finish();                      ///< flush through the last event's window

    std::int64_t count() const { return tracker_.count(); }
    const CountLines& lines() const { return tracker_.lines(); }
    const std::vector<SecondStat>& seconds() const { return seconds_; }
    std::uint64_t frames_emitted() const { return frames_; }

    /// Observer for every completed frame (e.g. PGM dumping).
    void set_frame_observer(FrameSink observer) { observer_ = std::move(observer); }

private:
    void on_frame(const BinaryFrame& frame);
    void finalize_seconds(bool partial);

    DetectionParams detection_;
    FrameAccumulator accumulator_;
    Tracker tracker_;
    FrameSink sink_;
    FrameSink observer_;
    std::vector<SecondStat> seconds_;
    std::uint64_t frames_ = 0;
    std::int64_t last_frame_end_ = 0;
    std::int64_t next_second_ = 0;
    std::int64_t prev_total_ = 0;
};

/// Sequential end-to-end pipeline: filter stage feeding the count stage.
class CountingPipeline {
public:
    explicit CountingPipeline(const PipelineParams& params);

    void push(std::span<const Event> events);
    void advance_to(std::int64_t t_us) { count_.advance_to(t_us); }
    void finish() { count_.finish(); }

    std::int64_t count() const { return count_.count(); }
    const CountLines& lines() const { return count_.lines(); }
    const std::vector<SecondStat>& seconds() const { return count_.seconds(); }
    std::uint64_t events_in() const { return events_in_; }
    std::uint64_t events_kept() const { return events_kept_; }
    CountStage& count_stage() { return count_; }

private:
    FilterStage filter_;
    CountStage count_;
    std::vector<Event> scratch_;
    std::uint64_t events_in_ = 0;
    std::uint64_t events_kept_ = 0;
};

enum class ExecutionMode { sequential, concurrent };

/// Counts a recorded stream. Concurrent mode runs the filter stage on a
/// reader thread behind a bounded channel; both modes produce identical
/// reports. Fills counting fields only; parameter echo is the caller's.
RunReport count_events(EventReader& reader, const PipelineParams& params,
                       ExecutionMode mode = ExecutionMode::sequential,
                       const FrameSink& frame_observer = nullptr);

RunReport count_stream(const EventStream& stream, const PipelineParams& params,
                       ExecutionMode mode = ExecutionMode::sequential);

} // namespace evcount
