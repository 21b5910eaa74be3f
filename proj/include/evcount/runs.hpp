#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "evcount/flow_control.hpp"
#include "evcount/pipeline.hpp"
#include "evcount/simulator.hpp"

namespace evcount {

/// Taps the raw simulated stream, one micro-step batch at a time.
using EventObserver = std::function<void(std::span<const Event>)>;

struct ClosedLoopConfig {
    GrainSimParams sim;
    PipelineParams pipeline;
    FlowSetpoint setpoint;
    PidGains gains;
    double actuation_scale = 0.01;
    SafetyParams safety;
    std::int64_t duration_s = 300;
    std::uint64_t seed = 1;
};

/// Full loop: simulator -> filter -> frames -> detection -> tracking ->
/// PID -> simulator actuation, ticked at 1 Hz. A safety trip shuts the run
/// down and is reported, not thrown. `exited` (when non-null) receives the
/// ground-truth records of grains that left the frame.
RunReport run_closed_loop(const ClosedLoopConfig& config, const EventObserver& observer = nullptr,
                          std::vector<GroundTruthRecord>* exited = nullptr);

struct FixedCountConfig {
    GrainSimParams sim;
    PipelineParams pipeline;
    double duty = 0.1;
    std::int64_t stop_after = 25;
    std::int64_t max_duration_s = 600; ///< hard stop if the target is never reached
    std::uint64_t seed = 1;
};

/// Constant actuation until the pipeline count reaches stop_after.
RunReport run_fixed_count(const FixedCountConfig& config,
                          std::vector<GroundTruthRecord>* exited = nullptr);

struct OpenLoopConfig {
    GrainSimParams sim;
    double duty = 0.1;
    std::int64_t duration_s = 60;
    std::uint64_t seed = 1;
};

struct GenResult {
    std::int64_t truth_crossed = 0;
    std::int64_t spawned = 0;
    std::uint64_t events = 0;
    std::int64_t duration_us = 0;
    std::vector<GroundTruthRecord> exited;
};

/// Pure generation at constant duty; no pipeline attached. Every emitted
/// micro-step batch goes to the observer (e.g. file writers).
GenResult run_open_loop(const OpenLoopConfig& config, const EventObserver& observer);

} // namespace evcount
