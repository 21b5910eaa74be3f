#pragma once

#include <cstdint>
#include <vector>

#include "evcount/events.hpp"

namespace evcount {

struct ActivityFilterParams {
    int neighborhood_radius = 1;      ///< Chebyshev distance
    std::int64_t time_window_us = 5000;
};

/// Keeps only events of one polarity, order preserved.
class PolarityFilter {
public:
    explicit PolarityFilter(Polarity keep) : keep_(keep) {}
    bool accept(const Event& ev) const { return ev.polarity == keep_; }

private:
    Polarity keep_;
};

/// Spatiotemporal background-activity filter. An event survives iff some
/// earlier event (any polarity, including dropped ones) hit a pixel within
/// `neighborhood_radius` of it no more than `time_window_us` earlier.
///
/// State is a dense per-pixel last-timestamp grid, so the first event of any
/// burst is always dropped. Single pass, events must arrive in timestamp
/// order; not safe for concurrent feeding.
class ActivityFilter {
public:
    ActivityFilter(const SensorGeometry& geometry, const ActivityFilterParams& params);

    /// Queries the neighborhood, then records the event. Returns keep/drop.
    bool process(const Event& ev);

    void reset();

private:
    SensorGeometry geometry_;
    ActivityFilterParams params_;
    std::vector<std::int64_t> last_t_; // row-major, kNever when untouched
};

EventStream polarity_filter(const EventStream& stream, Polarity keep);
EventStream activity_filter(const EventStream& stream, const ActivityFilterParams& params);

} // namespace evcount
