#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>

namespace oracles {

evcount::EventStream activity_filter_bruteforce(const evcount::EventStream& stream,
                                                const evcount::ActivityFilterParams& params) {
    evcount::EventStream out;
    out.geometry = stream.geometry;
    const auto& events = stream.events;
    for (std::size_t i = 0; i < events.size(); ++i) {
        bool keep = false;
        for (std::size_t j = i; j-- > 0;) {
            if (events[i].t - events[j].t > params.time_window_us)
                break; // ordered stream: everything earlier is older still
            const int dx = std::abs(int(events[i].x) - int(events[j].x));
            const int dy = std::abs(int(events[i].y) - int(events[j].y));
            if (std::max(dx, dy) <= params.neighborhood_radius) {
                keep = true;
                break;
            }
        }
        if (keep)
            out.events.push_back(events[i]);
    }
    return out;
}

std::vector<evcount::BoundingBox> flood_fill_boxes(const std::vector<std::uint8_t>& dense, int width,
                                                   int height, int connectivity, std::int64_t min_area) {
    std::vector<char> visited(std::size_t(width) * std::size_t(height), 0);
    std::vector<evcount::BoundingBox> boxes;
    const auto at = [&](int x, int y) { return dense[std::size_t(y) * std::size_t(width) + std::size_t(x)]; };

    for (int sy = 0; sy < height; ++sy) {
        for (int sx = 0; sx < width; ++sx) {
            const std::size_t start = std::size_t(sy) * std::size_t(width) + std::size_t(sx);
            if (!at(sx, sy) || visited[start])
                continue;
            evcount::BoundingBox box{sx, sy, sx, sy};
            std::int64_t count = 0;
            std::deque<std::pair<int, int>> frontier{{sx, sy}};
            visited[start] = 1;
            while (!frontier.empty()) {
                const auto [x, y] = frontier.front();
                frontier.pop_front();
                ++count;
                box.x_min = std::min(box.x_min, x);
                box.x_max = std::max(box.x_max, x);
                box.y_min = std::min(box.y_min, y);
                box.y_max = std::max(box.y_max, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0)
                            continue;
                        if (connectivity == 4 && dx != 0 && dy != 0)
                            continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || nx >= width || ny < 0 || ny >= height)
                            continue;
                        const std::size_t idx = std::size_t(ny) * std::size_t(width) + std::size_t(nx);
                        if (at(nx, ny) && !visited[idx]) {
                            visited[idx] = 1;
                            frontier.push_back({nx, ny});
                        }
                    }
                }
            }
            if (count >= min_area)
                boxes.push_back(box);
        }
    }
    std::sort(boxes.begin(), boxes.end(), [](const evcount::BoundingBox& a, const evcount::BoundingBox& b) {
        if (a.y_min != b.y_min)
            return a.y_min < b.y_min;
        if (a.x_min != b.x_min)
            return a.x_min < b.x_min;
        if (a.x_max != b.x_max)
            return a.x_max < b.x_max;
        return a.y_max < b.y_max;
    });
    return boxes;
}

std::pair<std::int64_t, std::int64_t> pixel_iou(const evcount::BoundingBox& a, const evcount::BoundingBox& b) {
    const auto member = [](const evcount::BoundingBox& box, int x, int y) {
        return x >= box.x_min && x <= box.x_max && y >= box.y_min && y <= box.y_max;
    };
    const int x_lo = std::min(a.x_min, b.x_min);
    const int x_hi = std::max(a.x_max, b.x_max);
    const int y_lo = std::min(a.y_min, b.y_min);
    const int y_hi = std::max(a.y_max, b.y_max);
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x) {
            const bool in_a = member(a, x, y);
            const bool in_b = member(b, x, y);
            inter += in_a && in_b;
            uni += in_a || in_b;
        }
    return {inter, uni};
}

std::vector<double> pid_direct(const std::vector<double>& errors, const evcount::PidGains& gains) {
    std::vector<double> out;
    out.reserve(errors.size());
    for (std::size_t n = 0; n < errors.size(); ++n) {
        double sum = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            sum += errors[i];
        const double prev = n == 0 ? 0.0 : errors[n - 1];
        out.push_back(gains.kp * errors[n] + gains.ki * sum + gains.kd * (errors[n] - prev));
    }
    return out;
}

std::set<std::pair<int, int>> rasterize_square(double cx, double cy, double half,
                                               const evcount::SensorGeometry& geometry) {
    std::set<std::pair<int, int>> covered;
    for (int y = 0; y < int(geometry.height); ++y)
        for (int x = 0; x < int(geometry.width); ++x) {
            const double px = x + 0.5;
            const double py = y + 0.5;
            if (px >= cx - half && px <= cx + half && py >= cy - half && py <= cy + half)
                covered.insert({x, y});
        }
    return covered;
}

} // namespace oracles
