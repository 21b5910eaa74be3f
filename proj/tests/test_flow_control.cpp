#include <doctest.h>

#include <cmath>

#include "evcount/flow_control.hpp"
#include "evcount/rng.hpp"
#include "oracles.hpp"

using namespace evcount;

TEST_CASE("cumulative error definition") {
    CHECK(compute_error(FlowSetpoint{60.0}, 10.0, 10.0) == doctest::Approx(0.0));
    CHECK(compute_error(FlowSetpoint{200.0}, 190.0, 60.0) == doctest::Approx(10.0));
    // 50 grains/min over 5 minutes with 243 counted leaves a deficit of 7
    CHECK(compute_error(FlowSetpoint{50.0}, 243.0, 300.0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(compute_error(FlowSetpoint{0.0}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("pid first steps with default gains") {
    PidController pid;
    const double u1 = pid.step(1.0);
    CHECK(u1 == 2.0 * 1.0 + 0.2 * 1.0 + 0.1 * (1.0 - 0.0)); // = 2.3
    CHECK(u1 == doctest::Approx(2.3));
    const double u2 = pid.step(1.0);
    CHECK(u2 == doctest::Approx(2.4)); // 2*1 + 0.2*2 + 0.1*0
    CHECK(pid.error_sum() == doctest::Approx(2.0));
    CHECK(pid.prev_error() == doctest::Approx(1.0));
    CHECK(pid.step_count() == 2);
}

TEST_CASE("zero errors keep a fresh controller at zero") {
    PidController pid;
    for (int i = 0; i < 10; ++i)
        CHECK(pid.step(0.0) == 0.0);
}

TEST_CASE("reset restores the initial state") {
    PidController pid;
    pid.step(3.0);
    pid.step(-1.0);
    pid.reset();
    CHECK(pid.error_sum() == 0.0);
    CHECK(pid.prev_error() == 0.0);
    CHECK(pid.step_count() == 0);
    CHECK(pid.step(1.0) == doctest::Approx(2.3));
}

TEST_CASE("pid trace equals direct evaluation over random error sequences") {
    Rng rng(515);
    for (int trial = 0; trial < 5; ++trial) {
        const PidGains gains{rng.uniform(0.5, 4.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5)};
        std::vector<double> errors;
        for (int i = 0; i < 1000; ++i)
            errors.push_back(rng.uniform(-20.0, 20.0));
        const std::vector<double> expected = oracles::pid_direct(errors, gains);
        PidController pid(gains);
        for (std::size_t i = 0; i < errors.size(); ++i)
            REQUIRE(std::abs(pid.step(errors[i]) - expected[i]) < 1e-12);
    }
}

TEST_CASE("actuation mapping clamps to [0,1]") {
    CHECK(to_actuation(2.3, 0.01).on_fraction == doctest::Approx(0.023));
    CHECK(to_actuation(-5.0, 0.01).on_fraction == 0.0);
    CHECK(to_actuation(500.0, 0.01).on_fraction == 1.0);
}

TEST_CASE("congestion trips, on-target does not, idle does not") {
    const FlowSetpoint setpoint{200.0};

    SafetyMonitor jam;
    for (int s = 0; s < 10; ++s)
        jam.observe(0, 0.8, setpoint);
    CHECK(jam.tripped());

    SafetyMonitor healthy;
    for (int s = 0; s < 30; ++s)
        healthy.observe(3, 0.6, setpoint); // ~180/min counted
    CHECK(!healthy.tripped());

    SafetyMonitor idle;
    for (int s = 0; s < 30; ++s)
        idle.observe(0, 0.0, setpoint); // nothing commanded, nothing counted
    CHECK(!idle.tripped());
}

TEST_CASE("safety needs a full window of history") {
    SafetyMonitor monitor;
    for (int s = 0; s < 9; ++s)
        monitor.observe(0, 1.0, FlowSetpoint{200.0});
    CHECK(!monitor.tripped());
    monitor.observe(0, 1.0, FlowSetpoint{200.0});
    CHECK(monitor.tripped());
}

TEST_CASE("safety latch holds until reset") {
    SafetyMonitor monitor;
    const FlowSetpoint setpoint{200.0};
    for (int s = 0; s < 10; ++s)
        monitor.observe(0, 1.0, setpoint);
    REQUIRE(monitor.tripped());
    for (int s = 0; s < 20; ++s)
        monitor.observe(100, 0.0, setpoint); // grains pour in, duty zero
    CHECK(monitor.tripped());
    monitor.reset();
    CHECK(!monitor.tripped());
}

TEST_CASE("flow controller forces zero actuation after a trip") {
    FlowController controller(FlowSetpoint{200.0});
    ControlTick tick{};
    for (int s = 0; s < 40; ++s) {
        tick = controller.tick(0); // empty hopper: nothing ever counted
        if (tick.tripped)
            break;
    }
    REQUIRE(tick.tripped);
    CHECK(tick.second <= 20); // trips within two congestion windows
    CHECK(tick.on_fraction == 0.0);
    const ControlTick after = controller.tick(0);
    CHECK(after.tripped);
    CHECK(after.on_fraction == 0.0);
}

TEST_CASE("flow controller tick wiring") {
    FlowController controller(FlowSetpoint{60.0});
    // first second, nothing counted yet: error = 1 grain, u = 2.3
    const ControlTick t1 = controller.tick(0);
    CHECK(t1.second == 1);
    CHECK(t1.error == doctest::Approx(1.0));
    CHECK(t1.u == doctest::Approx(2.3));
    CHECK(t1.on_fraction == doctest::Approx(0.023));
    CHECK(!t1.tripped);

    // second second, one grain counted: error = 2 - 1 = 1
    const ControlTick t2 = controller.tick(1);
    CHECK(t2.error == doctest::Approx(1.0));
    CHECK(t2.u == doctest::Approx(2.4));

    CHECK_THROWS_AS(FlowController(FlowSetpoint{0.0}), std::invalid_argument);
}
