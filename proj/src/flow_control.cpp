#include "evcount/flow_control.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace evcount {

double PidController::step(double error) {
    error_sum_ += error;
    const double u = gains_.kp * error + gains_.ki * error_sum_ + gains_.kd * (error - prev_error_);
    prev_error_ = error;
    ++step_;
    return u;
}

void PidController::reset() {
    error_sum_ = 0.0;
    prev_error_ = 0.0;
    step_ = 0;
}

double compute_error(const FlowSetpoint& setpoint, double total_counted, double elapsed_s) {
    if (setpoint.grains_per_minute <= 0.0)
        throw std::invalid_argument("setpoint must be positive");
    return setpoint.grains_per_minute * elapsed_s / 60.0 - total_counted;
}

ActuationCommand to_actuation(double u, double scale) {
    return ActuationCommand{std::clamp(u * scale, 0.0, 1.0)};
}

void SafetyMonitor::observe(std::int64_t count_delta, double on_fraction, const FlowSetpoint& setpoint) {
    const std::size_t window = std::size_t(params_.congestion_window_s);
    counts_.push_back(count_delta);
    fractions_.push_back(on_fraction);
    if (counts_.size() > window) {
        counts_.pop_front();
        fractions_.pop_front();
    }
    if (tripped_ || counts_.size() < window)
        return;

    const double mean_duty =
        std::accumulate(fractions_.begin(), fractions_.end(), 0.0) / double(fractions_.size());
    const double counted = double(std::accumulate(counts_.begin(), counts_.end(), std::int64_t(0)));
    const double expected = setpoint.grains_per_minute * double(params_.congestion_window_s) / 60.0;
    if (mean_duty >= params_.duty_threshold && counted < params_.min_expected_fraction * expected)
        tripped_ = true;
}

void SafetyMonitor::reset() {
    counts_.clear();
    fractions_.clear();
    tripped_ = false;
}

FlowController::FlowController(const FlowSetpoint& setpoint, const PidGains& gains, double actuation_scale,
                               const SafetyParams& safety)
    : setpoint_(setpoint), pid_(gains), safety_(safety), scale_(actuation_scale) {
    if (setpoint_.grains_per_minute <= 0.0)
        throw std::invalid_argument("setpoint must be positive");
}

ControlTick FlowController::tick(std::int64_t total_counted) {
    ++seconds_;
    const std::int64_t delta = total_counted - prev_total_;
    prev_total_ = total_counted;
    safety_.observe(delta, applied_fraction_, setpoint_);

    ControlTick record;
    record.second = seconds_;
    record.error = compute_error(setpoint_, double(total_counted), double(seconds_));
    record.u = pid_.step(record.error);
    record.on_fraction = safety_.tripped() ? 0.0 : to_actuation(record.u, scale_).on_fraction;
    record.tripped = safety_.tripped();

    applied_fraction_ = record.on_fraction;
    return record;
}

} // namespace evcount
