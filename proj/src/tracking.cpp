#include "evcount/tracking.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evcount {

IouRatio iou_ratio(const BoundingBox& a, const BoundingBox& b) {
    const int ix_min = std::max(a.x_min, b.x_min);
    const int ix_max = std::min(a.x_max, b.x_max);
    const int iy_min = std::max(a.y_min, b.y_min);
    const int iy_max = std::min(a.y_max, b.y_max);
    std::int64_t inter = 0;
    if (ix_min <= ix_max && iy_min <= iy_max)
        inter = std::int64_t(ix_max - ix_min + 1) * std::int64_t(iy_max - iy_min + 1);
    const std::int64_t uni = a.area() + b.area() - inter;
    return IouRatio{inter, uni};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    return iou_ratio(a, b).value();
}

std::array<int, 3> CountLines::default_rows(const SensorGeometry& geometry) {
    const int h = geometry.height;
    return {h * 2 / 5, h / 2, h * 3 / 5};
}

CountLines::CountLines(const std::array<int, 3>& line_rows, const SensorGeometry& geometry) : rows(line_rows) {
    if (!(rows[0] < rows[1] && rows[1] < rows[2]))
        throw std::invalid_argument("count lines must satisfy y1 < y2 < y3");
    for (int row : rows)
        if (row < 0 || row >= int(geometry.height))
            throw std::invalid_argument("count line row " + std::to_string(row) + " outside sensor height");
}

std::int64_t frame_count(const CountLines& lines) {
    return *std::max_element(lines.counts.begin(), lines.counts.end());
}

MatchResult match_boxes(const std::vector<TrackedObject>& prev, const std::vector<BoundingBox>& curr,
                        const TrackerParams& params, std::uint64_t frame_index, std::int64_t& next_id) {
    if (!(params.iou_threshold > 0.0 && params.iou_threshold < 1.0))
        throw std::invalid_argument("iou_threshold must lie in (0,1)");

    struct Candidate {
        IouRatio score;
        std::size_t prev_index;
        std::size_t box_index;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < prev.size(); ++i)
        for (std::size_t j = 0; j < curr.size(); ++j) {
            const IouRatio score = iou_ratio(prev[i].box, curr[j]);
            if (score.value() > params.iou_threshold)
                candidates.push_back({score, i, j});
        }

    // Descending IoU, compared exactly by cross-multiplication; index order
    // breaks ties so the assignment is deterministic.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        const std::int64_t lhs = a.score.intersection * b.score.union_area;
        const std::int64_t rhs = b.score.intersection * a.score.union_area;
        if (lhs != rhs)
            return lhs > rhs;
        if (a.prev_index != b.prev_index)
            return a.prev_index < b.prev_index;
        return a.box_index < b.box_index;
    });

    std::vector<bool> prev_taken(prev.size(), false);
    std::vector<std::int64_t> box_owner(curr.size(), -1); // prev index that claimed the box
    for (const Candidate& c : candidates) {
        if (prev_taken[c.prev_index] || box_owner[c.box_index] >= 0)
            continue;
        prev_taken[c.prev_index] = true;
        box_owner[c.box_index] = std::int64_t(c.prev_index);
    }

    MatchResult result;
    // Matched objects carry id and crossed flags, refresh box and center.
    for (std::size_t j = 0; j < curr.size(); ++j) {
        if (box_owner[j] < 0)
            continue;
        const TrackedObject& source = prev[std::size_t(box_owner[j])];
        TrackedObject obj = source;
        obj.box = curr[j];
        obj.center_y = box_center_y(curr[j]);
        obj.last_frame = frame_index;
        obj.missed = 0;
        result.matched.push_back(MatchedPair{result.objects.size(), j, source.center_y, obj.center_y});
        result.objects.push_back(obj);
    }
    // Unmatched current boxes become new objects.
    for (std::size_t j = 0; j < curr.size(); ++j) {
        if (box_owner[j] >= 0)
            continue;
        TrackedObject obj;
        obj.id = next_id++;
        obj.box = curr[j];
        obj.center_y = box_center_y(curr[j]);
        obj.last_frame = frame_index;
        result.objects.push_back(obj);
        ++result.new_count;
    }
    // Unmatched previous objects age out after max_missed_frames.
    for (std::size_t i = 0; i < prev.size(); ++i) {
        if (prev_taken[i])
            continue;
        TrackedObject obj = prev[i];
        obj.missed += 1;
        if (obj.missed > params.max_missed_frames)
            result.expired.push_back(obj);
        else
            result.objects.push_back(obj);
    }
    return result;
}

void update_counts(std::vector<TrackedObject>& objects, const std::vector<MatchedPair>& matched,
                   CountLines& lines) {
    for (const MatchedPair& pair : matched) {
        TrackedObject& obj = objects[pair.object_index];
        for (std::size_t i = 0; i < lines.rows.size(); ++i) {
            if (obj.crossed[i])
                continue;
            const double row = lines.rows[i];
            if (pair.prev_center_y < row && pair.curr_center_y >= row) {
                lines.counts[i] += 1;
                obj.crossed[i] = true;
            }
        }
    }
}

Tracker::Tracker(const TrackerParams& params, const CountLines& lines) : params_(params), lines_(lines) {}

void Tracker::update(std::uint64_t frame_index, const std::vector<BoundingBox>& boxes) {
    MatchResult result = match_boxes(objects_, boxes, params_, frame_index, next_id_);
    update_counts(result.objects, result.matched, lines_);
    objects_ = std::move(result.objects);
}

} // namespace evcount
