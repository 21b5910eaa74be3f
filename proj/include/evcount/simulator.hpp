#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evcount/events.hpp"
#include "evcount/rng.hpp"

namespace evcount {

struct GrainSimParams {
    SensorGeometry geometry;

    double emission_rate = 40.0;     ///< grains per second at full duty
    double grain_side_min = 6.0;     ///< px, square silhouette
    double grain_side_max = 14.0;    ///< px
    double pixels_per_meter = 2000.0;
    double gravity_mps2 = 9.81;
    double noise_rate = 0.5;         ///< mean noise events per pixel per second
    double event_efficiency = 0.9;   ///< per-pixel probability for cover/uncover events

    /// Surface-texture event rate per covered pixel per second (positive
    /// polarity). Moving grains fire over their whole silhouette, not just
    /// the swept edges; without this the 2 ms frames of one grain would be
    /// disjoint leading-edge bands and IoU matching could never lock on.
    /// Set to 0 for the pure cover/uncover edge model.
    double texture_rate = 1000.0;

    std::int64_t micro_step_us = 200;
    int truth_row = -1;              ///< reference row for ground truth; <0 = 40% of height
    bool distinct_columns = false;   ///< pin grains to non-overlapping column slots
};

struct GroundTruthRecord {
    std::int64_t grain_id = 0;
    std::int64_t spawn_t_us = 0;
    std::int64_t exit_t_us = 0;
};

/// Synthetic stand: grains drop from a slot at the top of the frame and
/// free-fall through the field of view. Each micro-step emits positive
/// events at newly covered silhouette pixels, negative events at newly
/// uncovered ones, texture events over the covered silhouette, and uniform
/// background noise. All randomness flows from one seeded generator, so a
/// fixed seed and actuation trace reproduce the event stream bit-for-bit.
class GrainSimulator {
public:
    GrainSimulator(const GrainSimParams& params, std::uint64_t seed);

    /// Advances one micro-step; appends that step's events in timestamp
    /// order (the stream stays non-decreasing across calls).
    void step(double on_fraction, std::vector<Event>& out);

    /// Test hook: place a grain directly (cy is the silhouette center row).
    void inject_grain(double cx, double cy, double vy, double side);

    std::int64_t now_us() const { return now_; }

    /// Grains whose center has passed the reference row so far.
    std::int64_t truth_crossed() const { return truth_crossed_; }

    /// Grains that fully left the frame, in exit order.
    const std::vector<GroundTruthRecord>& exited() const { return exited_; }

    std::int64_t spawned() const { return spawned_; }
    std::size_t in_flight() const { return grains_.size(); }
    int truth_row() const { return truth_row_; }

    /// Kinematic state of every grain in flight (oracle tests rasterize
    /// silhouettes straight from these).
    struct GrainState {
        double cx, cy, vy, half;
    };
    std::vector<GrainState> grain_states() const;

    const GrainSimParams& params() const { return params_; }

private:
    struct Grain {
        std::int64_t id;
        std::int64_t spawn_t;
        double cx, cy, vy, half;
        int col_lo, col_hi;
        int slot; // -1 unless distinct-columns mode
    };

    void spawn_grains(double on_fraction, std::int64_t t0, std::int64_t t1);
    void move_grain(Grain& g, std::int64_t t0, std::int64_t t1, std::vector<Event>& out);
    void emit_noise(std::int64_t t0, std::int64_t t1, std::vector<Event>& out);
    std::int64_t draw_timestamp(std::int64_t t0, std::int64_t t1);

    GrainSimParams params_;
    Rng rng_;
    double gravity_px_;
    int truth_row_;
    std::int64_t now_ = 0;
    std::int64_t next_id_ = 1;
    std::int64_t spawned_ = 0;
    std::int64_t truth_crossed_ = 0;
    std::vector<Grain> grains_;
    std::vector<GroundTruthRecord> exited_;
    std::vector<int> free_slots_;
    int slot_pitch_ = 0;
};

/// "grain_id,spawn_t_us,exit_t_us" header plus one row per exited grain.
void write_ground_truth_csv(const std::vector<GroundTruthRecord>& records, std::ostream& out);

} // namespace evcount
