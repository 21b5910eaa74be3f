#pragma once

#include <cstdint>
#include <vector>

#include "evcount/frame_builder.hpp"

namespace evcount {

/// Axis-aligned rectangle with inclusive pixel bounds.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    std::int64_t area() const {
        return std::int64_t(x_max - x_min + 1) * std::int64_t(y_max - y_min + 1);
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct DetectionParams {
    int connectivity = 8;      ///< 4 or 8
    std::int64_t min_area = 4; ///< components with fewer lit pixels are dropped
};

/// Connected-component labeling over the frame's lit pixels (two-pass
/// union-find). Returns one tight box per component with pixel count
/// >= min_area, sorted by (y_min, x_min, x_max, y_max).
std::vector<BoundingBox> detect(const BinaryFrame& frame, const DetectionParams& params);

/// Fractional row of the box center, (y_min + y_max) / 2.
double box_center_y(const BoundingBox& box);

} // namespace evcount
