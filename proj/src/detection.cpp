#include "evcount/detection.hpp"

#include <algorithm>
#include <stdexcept>

namespace evcount {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i)
            parent_[i] = std::uint32_t(i);
    }

    std::uint32_t find(std::uint32_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]]; // path halving
            i = parent_[i];
        }
        return i;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b)
            parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::uint32_t> parent_;
};

} // namespace

std::vector<BoundingBox> detect(const BinaryFrame& frame, const DetectionParams& params) {
    if (params.connectivity != 4 && params.connectivity != 8)
        throw std::invalid_argument("connectivity must be 4 or 8");
    if (params.min_area < 1)
        throw std::invalid_argument("min_area must be >= 1");

    const std::vector<PixelCoord>& px = frame.active_pixels(); // sorted by (y, x)
    const std::size_t n = px.size();
    if (n == 0)
        return {};

    UnionFind uf(n);
    const int dx = params.connectivity == 8 ? 1 : 0;

    // Pass 1: link each pixel to its west neighbor and to the previous row.
    // prev walks the previous row once per row thanks to the (y, x) order.
    std::size_t row_start = 0; // first index of the current row
    std::size_t prev_start = 0, prev_end = 0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && px[i].y != px[i - 1].y) {
            const bool adjacent_rows = px[i].y == px[i - 1].y + 1;
            prev_start = adjacent_rows ? row_start : i;
            prev_end = adjacent_rows ? i : i;
            prev = prev_start;
            row_start = i;
        }
        if (i > row_start && px[i - 1].x + 1 == px[i].x)
            uf.unite(std::uint32_t(i - 1), std::uint32_t(i));
        while (prev < prev_end && px[prev].x + dx < px[i].x)
            ++prev;
        for (std::size_t j = prev; j < prev_end && px[j].x <= px[i].x + dx; ++j)
            uf.unite(std::uint32_t(j), std::uint32_t(i));
    }

    // Pass 2: gather extents and pixel counts per root.
    struct Component {
        BoundingBox box;
        std::int64_t count = 0;
    };
    std::vector<std::int32_t> slot(n, -1);
    std::vector<Component> components;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t root = uf.find(std::uint32_t(i));
        if (slot[root] < 0) {
            slot[root] = std::int32_t(components.size());
            components.push_back({{px[i].x, px[i].y, px[i].x, px[i].y}, 1});
        } else {
            Component& c = components[std::size_t(slot[root])];
            c.box.x_min = std::min(c.box.x_min, int(px[i].x));
            c.box.x_max = std::max(c.box.x_max, int(px[i].x));
            c.box.y_min = std::min(c.box.y_min, int(px[i].y));
            c.box.y_max = std::max(c.box.y_max, int(px[i].y));
            ++c.count;
        }
    }

    std::vector<BoundingBox> boxes;
    for (const Component& c : components)
        if (c.count >= params.min_area)
            boxes.push_back(c.box);
    std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
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

double box_center_y(const BoundingBox& box) {
    return (box.y_min + box.y_max) / 2.0;
}

} // namespace evcount
