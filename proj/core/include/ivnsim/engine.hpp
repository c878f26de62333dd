#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ivnsim/event_log.hpp"
#include "ivnsim/scenario.hpp"
#include "ivnsim/timing.hpp"

namespace ivnsim {

/// Optional output streams; null pointers skip the corresponding output.
struct RunSinks {
    std::ostream* nads_csv = nullptr;     // per-interval metric log
    std::ostream* tables_jsonl = nullptr; // final flow tables, one rule per line
};

struct RunResult {
    EventLog log;
    std::vector<TimingRecord> timings;
    nlohmann::ordered_json summary;
};

/// Executes one deterministic run: same (scenario, seed) gives byte-identical
/// outputs. Virtual time is fully decoupled from the wall clock. Throws
/// ScenarioInvalid when handed a scenario that does not validate.
RunResult run_scenario(const Scenario& sc, std::uint64_t seed, const RunSinks& sinks = {});

}  // namespace ivnsim
