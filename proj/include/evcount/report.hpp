#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evcount {

/// One second of counting, plus the control tick when a loop was closed.
struct SecondStat {
    std::int64_t second = 0;
    std::int64_t count_delta = 0;
    std::int64_t count_total = 0;

    bool has_control = false;
    double error = 0.0;
    double u = 0.0;
    double on_fraction = 0.0;
    bool tripped = false;
};

struct RunReport {
    std::int64_t pipeline_count = 0;
    std::optional<std::int64_t> ground_truth;   ///< grains past the reference row (simulated runs)
    std::optional<double> expected;             ///< setpoint * minutes (closed-loop runs)
    std::vector<SecondStat> seconds;
    std::map<std::string, std::string> parameters;
    std::uint64_t events_processed = 0;
    double wall_seconds = 0.0;
    double events_per_second = 0.0;
    bool safety_tripped = false;

    /// "second,count_delta,count_total" rows.
    void write_counts_csv(std::ostream& out) const;

    /// "second,error,u,on_fraction,tripped" rows (closed-loop runs only).
    void write_control_csv(std::ostream& out) const;

    std::string to_json() const; // pretty-printed summary object
};

} // namespace evcount
