#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "evcount/detection.hpp"

namespace evcount {

struct TrackerParams {
    double iou_threshold = 0.1;  ///< match boxes with IoU strictly above this
    int max_missed_frames = 0;   ///< unmatched objects survive this many frames
};

/// Intersection and union pixel areas of two boxes (inclusive bounds); the
/// exact rational form of the Jaccard index.
struct IouRatio {
    std::int64_t intersection = 0;
    std::int64_t union_area = 0;

    double value() const { return union_area == 0 ? 0.0 : double(intersection) / double(union_area); }
};

IouRatio iou_ratio(const BoundingBox& a, const BoundingBox& b);
double iou(const BoundingBox& a, const BoundingBox& b);

/// Three horizontal count lines (rows y1 < y2 < y3) with per-line totals.
struct CountLines {
    std::array<int, 3> rows{};
    std::array<std::int64_t, 3> counts{0, 0, 0};

    static std::array<int, 3> default_rows(const SensorGeometry& geometry); // 40/50/60% of height

    CountLines() = default;
    CountLines(const std::array<int, 3>& line_rows, const SensorGeometry& geometry);
};

/// Per-frame total: the maximum of the three line counters.
std::int64_t frame_count(const CountLines& lines);

struct TrackedObject {
    std::int64_t id = 0;
    BoundingBox box;
    double center_y = 0.0;
    std::uint64_t last_frame = 0;
    std::array<bool, 3> crossed{false, false, false}; // latched per line
    int missed = 0;
};

/// One IoU match between a carried-over object and a current-frame box.
struct MatchedPair {
    std::size_t object_index = 0; ///< into MatchResult::objects
    std::size_t box_index = 0;    ///< into the current detection list
    double prev_center_y = 0.0;
    double curr_center_y = 0.0;
};

struct MatchResult {
    std::vector<TrackedObject> objects; ///< carried forward: matched, new, and still-missed
    std::vector<MatchedPair> matched;
    std::vector<TrackedObject> expired;
    std::size_t new_count = 0;
};

/// Greedy one-to-one assignment in descending IoU order over pairs with
/// IoU > threshold (exact rational comparison, ties broken by indices).
/// Unmatched current boxes become new objects with ids drawn from next_id;
/// unmatched previous objects expire once missed exceeds max_missed_frames.
MatchResult match_boxes(const std::vector<TrackedObject>& prev, const std::vector<BoundingBox>& curr,
                        const TrackerParams& params, std::uint64_t frame_index, std::int64_t& next_id);

/// Applies the crossing rule to every matched pair: a line fires when the
/// center moves from strictly above the row to at-or-below it, once per
/// object per line. Counts never decrement.
void update_counts(std::vector<TrackedObject>& objects, const std::vector<MatchedPair>& matched,
                   CountLines& lines);

/// Streaming wrapper: feed detections frame by frame, read the line counters.
class Tracker {
public:
    Tracker(const TrackerParams& params, const CountLines& lines);

    void update(std::uint64_t frame_index, const std::vector<BoundingBox>& boxes);

    const CountLines& lines() const { return lines_; }
    std::int64_t count() const { return frame_count(lines_); }
    const std::vector<TrackedObject>& objects() const { return objects_; }

private:
    TrackerParams params_;
    CountLines lines_;
    std::vector<TrackedObject> objects_;
    std::int64_t next_id_ = 1;
};

} // namespace evcount
