#pragma once

#include <cstdint>
#include <deque>

namespace evcount {

struct PidGains {
    double kp = 2.0;
    double ki = 0.2;
    double kd = 0.1;
};

/// Discrete PID: u_n = kp*e_n + ki*sum(e_1..e_n) + kd*(e_n - e_{n-1}).
/// No anti-windup: under a permanent deficit the error sum grows without
/// bound, and the safety monitor is the mitigation.
class PidController {
public:
    explicit PidController(const PidGains& gains = {}) : gains_(gains) {}

    /// Accumulates the error, returns the raw control u_n.
    double step(double error);

    void reset();

    const PidGains& gains() const { return gains_; }
    double error_sum() const { return error_sum_; }
    double prev_error() const { return prev_error_; }
    std::uint64_t step_count() const { return step_; }

private:
    PidGains gains_;
    double error_sum_ = 0.0;
    double prev_error_ = 0.0;
    std::uint64_t step_ = 0;
};

struct FlowSetpoint {
    double grains_per_minute = 0.0;
};

/// Cumulative error: grains expected by `elapsed_s` minus grains counted.
/// Positive means deficit, i.e. the feeder should push harder.
double compute_error(const FlowSetpoint& setpoint, double total_counted, double elapsed_s);

/// Fraction of the one-second tick the feeder motor vibrates.
struct ActuationCommand {
    double on_fraction = 0.0; // clamped to [0, 1]
};

ActuationCommand to_actuation(double u, double scale = 0.01);

struct SafetyParams {
    int congestion_window_s = 10;
    double min_expected_fraction = 0.1;
    double duty_threshold = 0.5;
};

/// Latching congestion/empty-hopper watchdog: trips when, over the last
/// congestion window, mean duty was high but almost nothing was counted.
/// Needs a full window of history before it will evaluate.
class SafetyMonitor {
public:
    explicit SafetyMonitor(const SafetyParams& params = {}) : params_(params) {}

    /// Records one second of history (count delta + the duty that drove it).
    void observe(std::int64_t count_delta, double on_fraction, const FlowSetpoint& setpoint);

    bool tripped() const { return tripped_; }
    void reset();

    const SafetyParams& params() const { return params_; }

private:
    SafetyParams params_;
    std::deque<std::int64_t> counts_;
    std::deque<double> fractions_;
    bool tripped_ = false;
};

struct ControlTick {
    std::int64_t second = 0; ///< tick index, 1-based (end of that second)
    double error = 0.0;
    double u = 0.0;
    double on_fraction = 0.0;
    bool tripped = false;
};

/// 1 Hz regulation loop: cumulative count in, actuation command out.
/// Once the safety monitor latches, every command is forced to zero.
class FlowController {
public:
    FlowController(const FlowSetpoint& setpoint, const PidGains& gains = {}, double actuation_scale = 0.01,
                   const SafetyParams& safety = {});

    /// Call once per elapsed second with the cumulative pipeline count.
    ControlTick tick(std::int64_t total_counted);

    bool tripped() const { return safety_.tripped(); }
    const FlowSetpoint& setpoint() const { return setpoint_; }

private:
    FlowSetpoint setpoint_;
    PidController pid_;
    SafetyMonitor safety_;
    double scale_;
    std::int64_t seconds_ = 0;
    std::int64_t prev_total_ = 0;
    double applied_fraction_ = 0.0; // duty that drove the second being closed
};

} // namespace evcount
