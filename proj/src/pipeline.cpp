#include "evcount/pipeline.hpp"

#include <chrono>
#include <functional>
#include <thread>

#include "evcount/channel.hpp"

namespace evcount {

namespace {
constexpr std::int64_t kSecondUs = 1'000'000;
}

FilterStage::FilterStage(const PipelineParams& params) {
    if (params.use_activity_filter)
        activity_.emplace(params.geometry, params.activity);
}

void FilterStage::process(std::span<const Event> in, std::vector<Event>& out) {
    for (const Event& ev : in) {
        if (activity_ && !activity_->process(ev))
            continue;
        if (!polarity_.accept(ev))
            continue;
        out.push_back(ev);
    }
}

CountStage::CountStage(const PipelineParams& params)
    : detection_(params.detection), accumulator_(params.geometry, params.accumulation),
      tracker_(params.tracker, params.make_lines()) {
    sink_ = [this](const BinaryFrame& frame) { on_frame(frame); };
}

void CountStage::on_frame(const BinaryFrame& frame) {
    const std::vector<BoundingBox> boxes = detect(frame, detection_);
    tracker_.update(frame.index(), boxes);
    if (observer_)
        observer_(frame);
    ++frames_;
    last_frame_end_ = frame.window_end_us();
    finalize_seconds(false);
}

void CountStage::finalize_seconds(bool partial) {
    while ((next_second_ + 1) * kSecondUs <= last_frame_end_) {
        const std::int64_t total = tracker_.count();
        seconds_.push_back(SecondStat{next_second_, total - prev_total_, total});
        prev_total_ = total;
        ++next_second_;
    }
    if (partial && last_frame_end_ > next_second_ * kSecondUs) {
        const std::int64_t total = tracker_.count();
        seconds_.push_back(SecondStat{next_second_, total - prev_total_, total});
        prev_total_ = total;
        ++next_second_;
    }
}

void CountStage::push(std::span<const Event> filtered) {
    for (const Event& ev : filtered)
        accumulator_.push(ev, sink_);
}

void CountStage::advance_to(std::int64_t t_us) {
    accumulator_.advance_to(t_us, sink_);
}

void CountStage::finish() {
    accumulator_.finish(sink_);
    finalize_seconds(true);
}

CountingPipeline::CountingPipeline(const PipelineParams& params) : filter_(params), count_(params) {}

void CountingPipeline::push(std::span<const Event> events) {
    events_in_ += events.size();
    scratch_.clear();
    filter_.process(events, scratch_);
    events_kept_ += scratch_.size();
    count_.push(scratch_);
}

namespace {

// Appends the next batch of ordered events; false once exhausted.
using BatchSource = std::function<bool(std::vector<Event>&)>;

RunReport count_from_source(const BatchSource& next_batch, const PipelineParams& params, ExecutionMode mode,
                            const FrameSink& frame_observer) {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const auto finish_report = [&elapsed](CountStage& stage, std::uint64_t events_in) {
        stage.finish();
        RunReport report;
        report.pipeline_count = stage.count();
        report.seconds = stage.seconds();
        report.events_processed = events_in;
        report.wall_seconds = elapsed();
        report.events_per_second =
            report.wall_seconds > 0.0 ? double(events_in) / report.wall_seconds : 0.0;
        return report;
    };

    if (mode == ExecutionMode::sequential) {
        CountingPipeline pipeline(params);
        if (frame_observer)
            pipeline.count_stage().set_frame_observer(frame_observer);
        std::vector<Event> batch;
        while (true) {
            batch.clear();
            if (!next_batch(batch))
                break;
            pipeline.push(batch);
        }
        return finish_report(pipeline.count_stage(), pipeline.events_in());
    }

    // Concurrent mode: reading + filtering upstream of a bounded channel,
    // frames/detection/tracking downstream. Stage order and event order are
    // preserved, so the report matches the sequential mode bit for bit.
    BoundedChannel<std::vector<Event>> channel(16);
    std::uint64_t events_in = 0;
    std::exception_ptr producer_error;

    std::thread producer([&] {
        try {
            FilterStage filter(params);
            std::vector<Event> batch;
            std::vector<Event> kept;
            while (true) {
                batch.clear();
                if (!next_batch(batch))
                    break;
                events_in += batch.size();
                kept.clear();
                filter.process(batch, kept);
                if (!kept.empty() && !channel.push(kept))
                    break;
            }
        } catch (...) {
            producer_error = std::current_exception();
        }
        channel.close();
    });

    CountStage stage(params);
    if (frame_observer)
        stage.set_frame_observer(frame_observer);
    while (auto kept = channel.pop())
        stage.push(*kept);
    producer.join();
    if (producer_error)
        std::rethrow_exception(producer_error);

    return finish_report(stage, events_in);
}

} // namespace

RunReport count_events(EventReader& reader, const PipelineParams& params, ExecutionMode mode,
                       const FrameSink& frame_observer) {
    return count_from_source([&reader](std::vector<Event>& out) { return reader.read_batch(out); }, params,
                             mode, frame_observer);
}

RunReport count_stream(const EventStream& stream, const PipelineParams& params, ExecutionMode mode) {
    validate_stream(stream);
    std::size_t cursor = 0;
    const auto source = [&stream, &cursor](std::vector<Event>& out) {
        constexpr std::size_t kBatch = 65536;
        if (cursor >= stream.events.size())
            return false;
        const std::size_t n = std::min(kBatch, stream.events.size() - cursor);
        out.insert(out.end(), stream.events.begin() + std::ptrdiff_t(cursor),
                   stream.events.begin() + std::ptrdiff_t(cursor + n));
        cursor += n;
        return true;
    };
    return count_from_source(source, params, mode, nullptr);
}

} // namespace evcount
