#include "evcount/filtering.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace evcount {

namespace {
constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();
}

ActivityFilter::ActivityFilter(const SensorGeometry& geometry, const ActivityFilterParams& params)
    : geometry_(geometry), params_(params) {
    if (params_.neighborhood_radius < 0)
        throw std::invalid_argument("activity filter: radius must be >= 0");
    if (params_.time_window_us <= 0)
        throw std::invalid_argument("activity filter: time window must be positive");
    last_t_.assign(geometry_.pixel_count(), kNever);
}

void ActivityFilter::reset() {
    std::fill(last_t_.begin(), last_t_.end(), kNever);
}

bool ActivityFilter::process(const Event& ev) {
    const int r = params_.neighborhood_radius;
    const int x0 = std::max(0, int(ev.x) - r);
    const int x1 = std::min(int(geometry_.width) - 1, int(ev.x) + r);
    const int y0 = std::max(0, int(ev.y) - r);
    const int y1 = std::min(int(geometry_.height) - 1, int(ev.y) + r);

    bool keep = false;
    for (int y = y0; y <= y1 && !keep; ++y) {
        const std::int64_t* row = last_t_.data() + std::size_t(y) * geometry_.width;
        for (int x = x0; x <= x1; ++x) {
            const std::int64_t last = row[x];
            if (last != kNever && ev.t - last <= params_.time_window_us) {
                keep = true;
                break;
            }
        }
    }

    last_t_[std::size_t(ev.y) * geometry_.width + ev.x] = ev.t;
    return keep;
}

EventStream polarity_filter(const EventStream& stream, Polarity keep) {
    EventStream out;
    out.geometry = stream.geometry;
    const PolarityFilter filter(keep);
    for (const Event& ev : stream.events)
        if (filter.accept(ev))
            out.events.push_back(ev);
    return out;
}

EventStream activity_filter(const EventStream& stream, const ActivityFilterParams& params) {
    EventStream out;
    out.geometry = stream.geometry;
    ActivityFilter filter(stream.geometry, params);
    for (const Event& ev : stream.events)
        if (filter.process(ev))
            out.events.push_back(ev);
    return out;
}

} // namespace evcount
