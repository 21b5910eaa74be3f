#include "evcount/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace evcount {

namespace {

// Pixel (c, r) is covered when its center lies inside the square, so the
// covered range along one axis is [ceil(center-half-0.5), floor(center+half-0.5)].
int cover_lo(double center, double half) {
    return int(std::ceil(center - half - 0.5));
}

int cover_hi(double center, double half) {
    return int(std::floor(center + half - 0.5));
}

} // namespace

GrainSimulator::GrainSimulator(const GrainSimParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
    if (params_.micro_step_us <= 0)
        throw std::invalid_argument("micro step must be positive");
    if (params_.grain_side_min < 1.0 || params_.grain_side_max < params_.grain_side_min)
        throw std::invalid_argument("bad grain size range");
    if (params_.geometry.width < 1 || params_.geometry.height < 1)
        throw std::invalid_argument("geometry must be at least 1x1");
    gravity_px_ = params_.gravity_mps2 * params_.pixels_per_meter;
    truth_row_ = params_.truth_row >= 0 ? params_.truth_row : int(params_.geometry.height) * 2 / 5;
    if (truth_row_ >= int(params_.geometry.height))
        throw std::invalid_argument("truth row outside sensor height");

    if (params_.distinct_columns) {
        slot_pitch_ = int(std::ceil(params_.grain_side_max)) + 2;
        const int margin = slot_pitch_ / 2 + 1;
        const int slots = (int(params_.geometry.width) - 2 * margin) / slot_pitch_;
        for (int s = slots; s-- > 0;)
            free_slots_.push_back(s);
    }
}

std::int64_t GrainSimulator::draw_timestamp(std::int64_t t0, std::int64_t t1) {
    return rng_.uniform_int(t0, t1 - 1);
}

void GrainSimulator::spawn_grains(double on_fraction, std::int64_t t0, std::int64_t /*t1*/) {
    const double duty = std::clamp(on_fraction, 0.0, 1.0);
    const double mean = params_.emission_rate * duty * double(params_.micro_step_us) * 1e-6;
    const std::uint64_t n = mean > 0.0 ? rng_.poisson(mean) : 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        Grain g;
        g.id = next_id_++;
        g.spawn_t = t0;
        g.half = rng_.uniform(params_.grain_side_min, params_.grain_side_max) / 2.0;
        g.vy = 0.0;
        g.cy = -g.half; // bottom edge at the slot row, nothing visible yet
        g.slot = -1;
        if (params_.distinct_columns) {
            if (free_slots_.empty())
                continue; // feeder jammed full; skip this grain
            const std::size_t pick = std::size_t(rng_.uniform_int(0, std::int64_t(free_slots_.size()) - 1));
            g.slot = free_slots_[pick];
            free_slots_[pick] = free_slots_.back();
            free_slots_.pop_back();
            const int margin = slot_pitch_ / 2 + 1;
            g.cx = double(margin + g.slot * slot_pitch_) + double(slot_pitch_) / 2.0;
        } else {
            g.cx = rng_.uniform(g.half, double(params_.geometry.width) - g.half);
        }
        g.col_lo = std::max(0, cover_lo(g.cx, g.half));
        g.col_hi = std::min(int(params_.geometry.width) - 1, cover_hi(g.cx, g.half));
        grains_.push_back(g);
        ++spawned_;
    }
}

std::vector<GrainSimulator::GrainState> GrainSimulator::grain_states() const {
    std::vector<GrainState> states;
    states.reserve(grains_.size());
    for (const Grain& g : grains_)
        states.push_back(GrainState{g.cx, g.cy, g.vy, g.half});
    return states;
}

void GrainSimulator::inject_grain(double cx, double cy, double vy, double side) {
    Grain g;
    g.id = next_id_++;
    g.spawn_t = now_;
    g.half = side / 2.0;
    g.cx = cx;
    g.cy = cy;
    g.vy = vy;
    g.slot = -1;
    g.col_lo = std::max(0, cover_lo(cx, g.half));
    g.col_hi = std::min(int(params_.geometry.width) - 1, cover_hi(cx, g.half));
    grains_.push_back(g);
    ++spawned_;
}

void GrainSimulator::move_grain(Grain& g, std::int64_t t0, std::int64_t t1, std::vector<Event>& out) {
    const double dt = double(params_.micro_step_us) * 1e-6;
    const int height = int(params_.geometry.height);

    const int old_lo = cover_lo(g.cy, g.half);
    const int old_hi = cover_hi(g.cy, g.half);
    const double old_cy = g.cy;

    g.vy += gravity_px_ * dt;
    g.cy += g.vy * dt;

    const int new_lo = cover_lo(g.cy, g.half);
    const int new_hi = cover_hi(g.cy, g.half);

    if (g.col_lo <= g.col_hi) {
        // Leading edge: rows covered this step fire positive events.
        for (int r = std::max(old_hi + 1, 0); r <= std::min(new_hi, height - 1); ++r)
            for (int c = g.col_lo; c <= g.col_hi; ++c)
                if (rng_.bernoulli(params_.event_efficiency))
                    out.push_back(Event{draw_timestamp(t0, t1), std::uint16_t(c), std::uint16_t(r),
                                        Polarity::positive});
        // Trailing edge: rows released this step fire negative events.
        for (int r = std::max(old_lo, 0); r <= std::min(new_lo - 1, height - 1); ++r)
            for (int c = g.col_lo; c <= g.col_hi; ++c)
                if (rng_.bernoulli(params_.event_efficiency))
                    out.push_back(Event{draw_timestamp(t0, t1), std::uint16_t(c), std::uint16_t(r),
                                        Polarity::negative});
        // Surface texture keeps the whole moving silhouette visible.
        if (params_.texture_rate > 0.0) {
            const double p = -std::expm1(-params_.texture_rate * dt);
            for (int r = std::max(new_lo, 0); r <= std::min(new_hi, height - 1); ++r)
                for (int c = g.col_lo; c <= g.col_hi; ++c)
                    if (rng_.bernoulli(p))
                        out.push_back(Event{draw_timestamp(t0, t1), std::uint16_t(c), std::uint16_t(r),
                                            Polarity::positive});
        }
    }

    if (old_cy < double(truth_row_) && g.cy >= double(truth_row_))
        ++truth_crossed_;
}

void GrainSimulator::emit_noise(std::int64_t t0, std::int64_t t1, std::vector<Event>& out) {
    if (params_.noise_rate <= 0.0)
        return;
    const double mean =
        params_.noise_rate * double(params_.geometry.pixel_count()) * double(params_.micro_step_us) * 1e-6;
    const std::uint64_t n = rng_.poisson(mean);
    for (std::uint64_t k = 0; k < n; ++k) {
        const auto x = std::uint16_t(rng_.uniform_int(0, params_.geometry.width - 1));
        const auto y = std::uint16_t(rng_.uniform_int(0, params_.geometry.height - 1));
        const Polarity pol = rng_.bernoulli(0.5) ? Polarity::positive : Polarity::negative;
        out.push_back(Event{draw_timestamp(t0, t1), x, y, pol});
    }
}

void GrainSimulator::step(double on_fraction, std::vector<Event>& out) {
    const std::int64_t t0 = now_;
    const std::int64_t t1 = now_ + params_.micro_step_us;
    const std::size_t batch_start = out.size();

    spawn_grains(on_fraction, t0, t1);

    const int height = int(params_.geometry.height);
    std::size_t write = 0;
    for (std::size_t i = 0; i < grains_.size(); ++i) {
        Grain& g = grains_[i];
        move_grain(g, t0, t1, out);
        if (cover_lo(g.cy, g.half) > height - 1) { // fully below the frame
            exited_.push_back(GroundTruthRecord{g.id, g.spawn_t, t1});
            if (g.slot >= 0)
                free_slots_.push_back(g.slot);
        } else {
            grains_[write++] = g;
        }
    }
    grains_.resize(write);

    emit_noise(t0, t1, out);

    std::stable_sort(out.begin() + std::ptrdiff_t(batch_start), out.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    now_ = t1;
}

void write_ground_truth_csv(const std::vector<GroundTruthRecord>& records, std::ostream& out) {
    out << "grain_id,spawn_t_us,exit_t_us\n";
    for (const GroundTruthRecord& r : records)
        out << r.grain_id << ',' << r.spawn_t_us << ',' << r.exit_t_us << '\n';
}

} // namespace evcount
