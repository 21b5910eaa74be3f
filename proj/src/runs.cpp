#include "evcount/runs.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace evcount {

namespace {

constexpr std::int64_t kSecondUs = 1'000'000;

std::int64_t steps_per_second(const GrainSimParams& sim) {
    if (kSecondUs % sim.micro_step_us != 0)
        throw std::invalid_argument("micro step must divide one second");
    return kSecondUs / sim.micro_step_us;
}

double elapsed_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void echo_sim_params(RunReport& report, const GrainSimParams& sim, std::uint64_t seed) {
    report.parameters["seed"] = std::to_string(seed);
    report.parameters["geometry"] = std::to_string(sim.geometry.width) + "x" + std::to_string(sim.geometry.height);
    report.parameters["emission_rate"] = std::to_string(sim.emission_rate);
    report.parameters["noise_rate"] = std::to_string(sim.noise_rate);
    report.parameters["micro_step_us"] = std::to_string(sim.micro_step_us);
    report.parameters["distinct_columns"] = sim.distinct_columns ? "true" : "false";
}

} // namespace

RunReport run_closed_loop(const ClosedLoopConfig& config, const EventObserver& observer,
                          std::vector<GroundTruthRecord>* exited) {
    if (config.pipeline.geometry != config.sim.geometry)
        throw std::invalid_argument("pipeline and simulator geometry differ");
    const std::int64_t steps = steps_per_second(config.sim);
    const auto start = std::chrono::steady_clock::now();

    GrainSimulator sim(config.sim, config.seed);
    CountingPipeline pipeline(config.pipeline);
    FlowController controller(config.setpoint, config.gains, config.actuation_scale, config.safety);

    std::vector<Event> batch;
    std::vector<ControlTick> ticks;
    std::uint64_t events = 0;
    double duty = 0.0; // feeder idle until the first tick
    bool tripped = false;

    for (std::int64_t second = 0; second < config.duration_s && !tripped; ++second) {
        for (std::int64_t s = 0; s < steps; ++s) {
            batch.clear();
            sim.step(duty, batch);
            events += batch.size();
            if (observer && !batch.empty())
                observer(batch);
            pipeline.push(batch);
        }
        pipeline.advance_to(sim.now_us());
        const ControlTick tick = controller.tick(pipeline.count());
        ticks.push_back(tick);
        duty = tick.on_fraction;
        tripped = tick.tripped;
    }
    pipeline.finish();

    RunReport report;
    report.pipeline_count = pipeline.count();
    report.ground_truth = sim.truth_crossed();
    report.expected = config.setpoint.grains_per_minute * double(config.duration_s) / 60.0;
    report.seconds = pipeline.seconds();
    for (const ControlTick& tick : ticks) {
        // tick n closes second n-1
        const std::size_t idx = std::size_t(tick.second - 1);
        if (idx < report.seconds.size()) {
            SecondStat& stat = report.seconds[idx];
            stat.has_control = true;
            stat.error = tick.error;
            stat.u = tick.u;
            stat.on_fraction = tick.on_fraction;
            stat.tripped = tick.tripped;
        }
    }
    report.events_processed = events;
    report.wall_seconds = elapsed_since(start);
    report.events_per_second = report.wall_seconds > 0 ? double(events) / report.wall_seconds : 0.0;
    report.safety_tripped = tripped;
    echo_sim_params(report, config.sim, config.seed);
    report.parameters["setpoint"] = std::to_string(config.setpoint.grains_per_minute);
    report.parameters["kp"] = std::to_string(config.gains.kp);
    report.parameters["ki"] = std::to_string(config.gains.ki);
    report.parameters["kd"] = std::to_string(config.gains.kd);
    report.parameters["actuation_scale"] = std::to_string(config.actuation_scale);
    report.parameters["duration_s"] = std::to_string(config.duration_s);
    if (exited)
        *exited = sim.exited();
    return report;
}

RunReport run_fixed_count(const FixedCountConfig& config, std::vector<GroundTruthRecord>* exited) {
    if (config.pipeline.geometry != config.sim.geometry)
        throw std::invalid_argument("pipeline and simulator geometry differ");
    if (config.stop_after < 1)
        throw std::invalid_argument("stop_after must be >= 1");
    const std::int64_t steps = steps_per_second(config.sim);
    const auto start = std::chrono::steady_clock::now();

    GrainSimulator sim(config.sim, config.seed);
    CountingPipeline pipeline(config.pipeline);

    std::vector<Event> batch;
    std::uint64_t events = 0;
    const std::int64_t max_steps = config.max_duration_s * steps;
    for (std::int64_t s = 0; s < max_steps && pipeline.count() < config.stop_after; ++s) {
        batch.clear();
        sim.step(config.duty, batch);
        events += batch.size();
        pipeline.push(batch);
        pipeline.advance_to(sim.now_us());
    }
    pipeline.finish();

    RunReport report;
    report.pipeline_count = pipeline.count();
    report.ground_truth = sim.truth_crossed();
    report.seconds = pipeline.seconds();
    report.events_processed = events;
    report.wall_seconds = elapsed_since(start);
    report.events_per_second = report.wall_seconds > 0 ? double(events) / report.wall_seconds : 0.0;
    echo_sim_params(report, config.sim, config.seed);
    report.parameters["duty"] = std::to_string(config.duty);
    report.parameters["stop_after"] = std::to_string(config.stop_after);
    if (exited)
        *exited = sim.exited();
    return report;
}

GenResult run_open_loop(const OpenLoopConfig& config, const EventObserver& observer) {
    const std::int64_t steps = steps_per_second(config.sim);
    GrainSimulator sim(config.sim, config.seed);
    GenResult result;
    std::vector<Event> batch;
    for (std::int64_t s = 0; s < config.duration_s * steps; ++s) {
        batch.clear();
        sim.step(config.duty, batch);
        result.events += batch.size();
        if (observer && !batch.empty())
            observer(batch);
    }
    result.truth_crossed = sim.truth_crossed();
    result.spawned = sim.spawned();
    result.duration_us = sim.now_us();
    result.exited = sim.exited();
    return result;
}

} // namespace evcount
