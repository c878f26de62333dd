#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ivnsim/event_log.hpp"
#include "ivnsim/time.hpp"

namespace ivnsim {

enum class ResponsePath : std::uint8_t { Local, Cloud, None };

std::string response_path_name(ResponsePath p);

/// FDTI/FRTI/FHTI measurements for one attack in one run, with the component
/// breakdown. The breakdown always sums to the FHTI: `residual_ms` absorbs
/// the start/stop alignment between the victim-side and NADS-side clocks and
/// the in-flight drain after the last countermeasure ack (bounded by a few
/// link latencies).
struct TimingRecord {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint32_t attack_id = 0;
    std::string attack_name;
    ResponsePath path = ResponsePath::None;
    bool detected = false;

    double fdti_ms = 0.0;
    double frti_ms = 0.0;
    double fhti_ms = 0.0;  // +inf when the attack ended undetected

    double detect_wait_ms = 0.0;   // attack start at NADS -> interval close
    double detect_proc_ms = 0.0;   // NADS processing until report emission
    double report_transit_ms = 0.0;
    double cm_dispatch_ms = 0.0;   // local path
    double cm_ack_ms = 0.0;
    double acdc_rtt_ms = 0.0;      // cloud path
    double realloc_ms = 0.0;
    double residual_ms = 0.0;

    bool breakdown_consistent(double tol_ms = 1e-6) const;
};

/// Re-derives the timing records from the event log; pure function used both
/// by the engine (via the same capture points) and by tests as the
/// measurement oracle.
std::vector<TimingRecord> measure_timings(const std::vector<EventRecord>& events,
                                          const std::string& scenario, std::uint64_t seed);

void write_timing_csv_header(std::ostream& os);
void write_timing_csv_row(std::ostream& os, const TimingRecord& r);

}  // namespace ivnsim
