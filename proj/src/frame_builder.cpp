#include "evcount/frame_builder.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace evcount {

BinaryFrame::BinaryFrame(const SensorGeometry& geometry, std::uint64_t index, std::int64_t period_us,
                         std::vector<PixelCoord> lit_pixels)
    : geometry_(geometry), index_(index), window_start_(std::int64_t(index) * period_us),
      window_end_(std::int64_t(index + 1) * period_us), active_(std::move(lit_pixels)) {
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
}

std::uint8_t BinaryFrame::at(std::uint16_t x, std::uint16_t y) const {
    return std::binary_search(active_.begin(), active_.end(), PixelCoord{x, y}) ? 255 : 0;
}

std::vector<std::uint8_t> BinaryFrame::to_dense() const {
    std::vector<std::uint8_t> dense(geometry_.pixel_count(), 0);
    for (const PixelCoord& p : active_)
        dense[std::size_t(p.y) * geometry_.width + p.x] = 255;
    return dense;
}

FrameAccumulator::FrameAccumulator(const SensorGeometry& geometry, const AccumulationParams& params)
    : geometry_(geometry), period_(params.period_us) {
    if (period_ <= 0)
        throw std::invalid_argument("accumulation period must be positive");
}

void FrameAccumulator::emit_until(std::uint64_t window, const FrameSink& sink) {
    while (next_window_ < window) {
        sink(BinaryFrame(geometry_, next_window_, period_, std::move(pending_)));
        pending_.clear();
        ++next_window_;
    }
}

void FrameAccumulator::push(const Event& ev, const FrameSink& sink) {
    const std::uint64_t window = std::uint64_t(ev.t / period_);
    if (window < next_window_)
        throw std::invalid_argument("frame accumulator fed out of order");
    emit_until(window, sink);
    any_event_ = true;
    last_event_t_ = ev.t;
    if (ev.polarity == Polarity::positive)
        pending_.push_back(PixelCoord{ev.x, ev.y});
}

void FrameAccumulator::advance_to(std::int64_t t_us, const FrameSink& sink) {
    if (t_us < 0)
        return;
    emit_until(std::uint64_t(t_us / period_), sink);
}

void FrameAccumulator::finish(const FrameSink& sink) {
    if (any_event_)
        emit_until(std::uint64_t(last_event_t_ / period_) + 1, sink);
}

std::vector<BinaryFrame> accumulate(const EventStream& stream, const AccumulationParams& params) {
    std::vector<BinaryFrame> frames;
    FrameAccumulator acc(stream.geometry, params);
    const FrameSink sink = [&frames](const BinaryFrame& f) { frames.push_back(f); };
    for (const Event& ev : stream.events)
        acc.push(ev, sink);
    acc.finish(sink);
    return frames;
}

void write_pgm(const BinaryFrame& frame, std::ostream& out) {
    out << "P5\n"
        << frame.geometry().width << ' ' << frame.geometry().height << "\n255\n";
    const std::vector<std::uint8_t> dense = frame.to_dense();
    out.write(reinterpret_cast<const char*>(dense.data()), std::streamsize(dense.size()));
}

} // namespace evcount
