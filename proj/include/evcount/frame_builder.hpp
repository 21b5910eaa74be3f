#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "evcount/events.hpp"

namespace evcount {

struct AccumulationParams {
    std::int64_t period_us = 2000;
};

struct PixelCoord {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
    friend bool operator<(const PixelCoord& a, const PixelCoord& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// Binary image for one accumulation window: a pixel is 255 iff at least one
/// positive event hit it inside [window_start, window_end). Stored sparsely
/// as the sorted set of lit pixels; at() and to_dense() give the 0/255 view.
class BinaryFrame {
public:
    BinaryFrame(const SensorGeometry& geometry, std::uint64_t index, std::int64_t period_us,
                std::vector<PixelCoord> lit_pixels);

    const SensorGeometry& geometry() const { return geometry_; }
    std::uint64_t index() const { return index_; }
    std::int64_t window_start_us() const { return window_start_; }
    std::int64_t window_end_us() const { return window_end_; }

    /// Lit pixels sorted by (y, x), duplicate-free.
    const std::vector<PixelCoord>& active_pixels() const { return active_; }

    std::uint8_t at(std::uint16_t x, std::uint16_t y) const;
    std::vector<std::uint8_t> to_dense() const; // row-major width*height of {0,255}

private:
    SensorGeometry geometry_;
    std::uint64_t index_;
    std::int64_t window_start_;
    std::int64_t window_end_;
    std::vector<PixelCoord> active_;
};

using FrameSink = std::function<void(const BinaryFrame&)>;

/// Streams timestamp-ordered events into fixed-period frames. Windows are
/// aligned to t=0, window k covering [k*period, (k+1)*period); empty windows
/// emit all-zero frames so the frame index maps linearly to time.
/// Negative-polarity events are ignored.
class FrameAccumulator {
public:
    FrameAccumulator(const SensorGeometry& geometry, const AccumulationParams& params);

    void push(const Event& ev, const FrameSink& sink);

    /// Emits every window that ends at or before t_us.
    void advance_to(std::int64_t t_us, const FrameSink& sink);

    /// Emits pending windows through the one containing the last pushed event.
    void finish(const FrameSink& sink);

    std::uint64_t next_window() const { return next_window_; }

private:
    void emit_until(std::uint64_t window, const FrameSink& sink);

    SensorGeometry geometry_;
    std::int64_t period_;
    std::uint64_t next_window_ = 0;  // first window not yet emitted
    bool any_event_ = false;
    std::int64_t last_event_t_ = 0;
    std::vector<PixelCoord> pending_; // lit pixels of window next_window_, unsorted
};

/// Convenience for whole in-memory streams (tests, bindings). Emits frames
/// 0 .. window(last event); an empty stream yields no frames.
std::vector<BinaryFrame> accumulate(const EventStream& stream, const AccumulationParams& params);

/// P5 (binary) PGM dump, for eyeballing frames.
void write_pgm(const BinaryFrame& frame, std::ostream& out);

} // namespace evcount
