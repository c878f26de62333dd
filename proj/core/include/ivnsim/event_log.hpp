#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "ivnsim/time.hpp"

namespace ivnsim {

/// One simulation-observable event. The JSONL stream is the authoritative
/// run record: timing measurement re-derives everything from it.
struct EventRecord {
    SimTime time_us = 0;
    std::uint64_t seq = 0;
    std::string type;
    nlohmann::ordered_json payload;
};

class EventLog {
public:
    nlohmann::ordered_json& emit(SimTime t, std::string type) {
        records_.push_back({t, next_seq_++, std::move(type), nlohmann::ordered_json::object()});
        return records_.back().payload;
    }

    const std::vector<EventRecord>& records() const { return records_; }
    void write_jsonl(std::ostream& os) const;

private:
    std::vector<EventRecord> records_;
    std::uint64_t next_seq_ = 0;
};

/// Round-trip-exact, locale-independent float formatting for CSV output.
std::string format_double(double v);

}  // namespace ivnsim
