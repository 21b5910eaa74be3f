#include <doctest.h>

#include <sstream>
#include <thread>

#include "evcount/channel.hpp"
#include "evcount/pipeline.hpp"
#include "evcount/runs.hpp"

using namespace evcount;

namespace {

// Shared small-scene setup: quiet sensor, grains large enough to detect.
GrainSimParams scene_params() {
    GrainSimParams p;
    p.geometry = {256, 512};
    p.noise_rate = 0.05;
    return p;
}

PipelineParams pipeline_params(const SensorGeometry& geo) {
    PipelineParams p;
    p.geometry = geo;
    return p;
}

EventStream generate_stream(const GrainSimParams& sim_params, double duty, std::int64_t duration_s,
                            std::uint64_t seed, std::int64_t* truth = nullptr) {
    EventStream stream;
    stream.geometry = sim_params.geometry;
    OpenLoopConfig config{sim_params, duty, duration_s, seed};
    const GenResult result = run_open_loop(config, [&stream](std::span<const Event> batch) {
        stream.events.insert(stream.events.end(), batch.begin(), batch.end());
    });
    if (truth)
        *truth = result.truth_crossed;
    return stream;
}

} // namespace

TEST_CASE("single grain falling through the frame counts exactly once") {
    const GrainSimParams params = scene_params();
    GrainSimulator sim(params, 11);
    CountingPipeline pipeline(pipeline_params(params.geometry));

    sim.inject_grain(128.0, 0.0, 0.0, 10.0);
    std::vector<Event> batch;
    while (sim.in_flight() > 0) {
        batch.clear();
        sim.step(0.0, batch);
        pipeline.push(batch);
        pipeline.advance_to(sim.now_us());
    }
    pipeline.finish();
    CHECK(pipeline.count() == 1);
    CHECK(sim.truth_crossed() == 1);
    // all three lines saw it
    CHECK(pipeline.lines().counts[0] == 1);
    CHECK(pipeline.lines().counts[1] == 1);
    CHECK(pipeline.lines().counts[2] == 1);
}

TEST_CASE("distinct-column grains are counted exactly") {
    GrainSimParams params = scene_params();
    params.distinct_columns = true;
    params.emission_rate = 30.0;
    GrainSimulator sim(params, 23);
    CountingPipeline pipeline(pipeline_params(params.geometry));

    std::vector<Event> batch;
    // run 12 simulated seconds, then idle until every grain has landed
    for (int s = 0; s < 12 * 5000; ++s) {
        batch.clear();
        sim.step(0.5, batch);
        pipeline.push(batch);
        pipeline.advance_to(sim.now_us());
    }
    while (sim.in_flight() > 0) {
        batch.clear();
        sim.step(0.0, batch);
        pipeline.push(batch);
        pipeline.advance_to(sim.now_us());
    }
    pipeline.finish();
    CHECK(sim.truth_crossed() > 50);
    CHECK(pipeline.count() == sim.truth_crossed());
}

TEST_CASE("sequential and concurrent counting produce identical reports") {
    const GrainSimParams params = scene_params();
    std::int64_t truth = 0;
    const EventStream stream = generate_stream(params, 0.4, 8, 31, &truth);
    REQUIRE(truth > 0);

    const PipelineParams pp = pipeline_params(params.geometry);
    const RunReport seq = count_stream(stream, pp, ExecutionMode::sequential);
    const RunReport conc = count_stream(stream, pp, ExecutionMode::concurrent);

    CHECK(seq.pipeline_count == conc.pipeline_count);
    REQUIRE(seq.seconds.size() == conc.seconds.size());
    for (std::size_t i = 0; i < seq.seconds.size(); ++i) {
        CHECK(seq.seconds[i].second == conc.seconds[i].second);
        CHECK(seq.seconds[i].count_delta == conc.seconds[i].count_delta);
        CHECK(seq.seconds[i].count_total == conc.seconds[i].count_total);
    }
    CHECK(seq.events_processed == conc.events_processed);

    // and the count is close to the simulated truth
    CHECK(std::abs(seq.pipeline_count - truth) <= std::max<std::int64_t>(1, truth / 50));
}

TEST_CASE("report totals equal the sum of per-second deltas") {
    const GrainSimParams params = scene_params();
    const EventStream stream = generate_stream(params, 0.5, 6, 37);
    const RunReport report = count_stream(stream, pipeline_params(params.geometry));
    std::int64_t sum = 0;
    for (const SecondStat& s : report.seconds)
        sum += s.count_delta;
    CHECK(sum == report.pipeline_count);
    if (!report.seconds.empty())
        CHECK(report.seconds.back().count_total == report.pipeline_count);
}

TEST_CASE("counting the same stream twice is deterministic") {
    const GrainSimParams params = scene_params();
    const EventStream stream = generate_stream(params, 0.6, 5, 41);
    const PipelineParams pp = pipeline_params(params.geometry);
    const RunReport a = count_stream(stream, pp);
    const RunReport b = count_stream(stream, pp);
    CHECK(a.pipeline_count == b.pipeline_count);
    REQUIRE(a.seconds.size() == b.seconds.size());
    for (std::size_t i = 0; i < a.seconds.size(); ++i)
        CHECK(a.seconds[i].count_total == b.seconds[i].count_total);
}

TEST_CASE("empty stream counts zero") {
    EventStream stream;
    stream.geometry = {256, 512};
    const RunReport report = count_stream(stream, pipeline_params(stream.geometry));
    CHECK(report.pipeline_count == 0);
    CHECK(report.seconds.empty());
}

TEST_CASE("closed loop settles near the setpoint on a small scene") {
    ClosedLoopConfig config;
    config.sim = scene_params();
    config.sim.emission_rate = 40.0;
    config.pipeline = pipeline_params(config.sim.geometry);
    config.setpoint = FlowSetpoint{120.0};
    config.duration_s = 60;
    config.seed = 3;

    const RunReport report = run_closed_loop(config);
    CHECK(!report.safety_tripped);
    REQUIRE(report.expected.has_value());
    CHECK(*report.expected == doctest::Approx(120.0));
    // after a minute the cumulative count sits within 10% of expectation
    CHECK(std::abs(double(report.pipeline_count) - *report.expected) <= 0.10 * *report.expected);
    REQUIRE(report.seconds.size() == 60);
    CHECK(report.seconds.back().has_control);
}

TEST_CASE("empty hopper trips the safety and ends the run early") {
    ClosedLoopConfig config;
    config.sim = scene_params();
    config.sim.emission_rate = 0.0; // hopper is empty
    config.pipeline = pipeline_params(config.sim.geometry);
    config.setpoint = FlowSetpoint{200.0};
    config.duration_s = 120;
    config.seed = 5;

    const RunReport report = run_closed_loop(config);
    CHECK(report.safety_tripped);
    // trips within two congestion windows
    CHECK(report.seconds.size() <= 2 * std::size_t(config.safety.congestion_window_s));
    CHECK(report.pipeline_count == 0);
}

TEST_CASE("fixed-count run stops at the requested count") {
    FixedCountConfig config;
    config.sim = scene_params();
    config.sim.emission_rate = 40.0;
    config.pipeline = pipeline_params(config.sim.geometry);
    config.duty = 0.25;
    config.stop_after = 20;
    config.seed = 17;

    const RunReport report = run_fixed_count(config);
    CHECK(report.pipeline_count >= 20);
    CHECK(report.pipeline_count <= 22); // a frame may add a grain or two
    REQUIRE(report.ground_truth.has_value());
    CHECK(std::abs(report.pipeline_count - *report.ground_truth) <= 1);

    FixedCountConfig single = config;
    single.stop_after = 1;
    single.duty = 0.05; // sparse enough that only one grain is near the lines
    single.seed = 18;
    const RunReport first = run_fixed_count(single);
    CHECK(first.pipeline_count == 1);
    CHECK(*first.ground_truth == 1);
}

TEST_CASE("bounded channel preserves order and closes cleanly") {
    BoundedChannel<int> channel(4);
    std::vector<int> received;
    std::thread consumer([&] {
        while (auto v = channel.pop())
            received.push_back(*v);
    });
    for (int i = 0; i < 1000; ++i)
        REQUIRE(channel.push(i));
    channel.close();
    consumer.join();
    REQUIRE(received.size() == 1000);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(received[std::size_t(i)] == i);
    CHECK(!channel.push(1001));
    CHECK(!channel.pop().has_value());
}

TEST_CASE("geometry mismatch between simulator and pipeline is rejected") {
    ClosedLoopConfig config;
    config.sim = scene_params();
    config.pipeline = pipeline_params(SensorGeometry{64, 64});
    config.setpoint = FlowSetpoint{100.0};
    CHECK_THROWS_AS(run_closed_loop(config), std::invalid_argument);
}
