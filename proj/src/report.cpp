#include "evcount/report.hpp"

#include <ostream>

#include <json.hpp>

namespace evcount {

void RunReport::write_counts_csv(std::ostream& out) const {
    out << "second,count_delta,count_total\n";
    for (const SecondStat& s : seconds)
        out << s.second << ',' << s.count_delta << ',' << s.count_total << '\n';
}

void RunReport::write_control_csv(std::ostream& out) const {
    out << "second,error,u,on_fraction,tripped\n";
    for (const SecondStat& s : seconds) {
        if (!s.has_control)
            continue;
        out << s.second << ',' << s.error << ',' << s.u << ',' << s.on_fraction << ',' << (s.tripped ? 1 : 0)
            << '\n';
    }
}

std::string RunReport::to_json() const {
    nlohmann::json j;
    j["pipeline_count"] = pipeline_count;
    if (ground_truth)
        j["ground_truth"] = *ground_truth;
    if (expected)
        j["expected"] = *expected;
    j["events_processed"] = events_processed;
    j["wall_seconds"] = wall_seconds;
    j["events_per_second"] = events_per_second;
    j["safety_tripped"] = safety_tripped;
    j["seconds"] = seconds.size();
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : parameters)
        params[key] = value;
    j["parameters"] = params;
    return j.dump(2);
}

} // namespace evcount
