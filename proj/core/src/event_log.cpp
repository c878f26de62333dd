#include "ivnsim/event_log.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace ivnsim {

void EventLog::write_jsonl(std::ostream& os) const {
    for (const auto& r : records_) {
        nlohmann::ordered_json line;
        line["time_us"] = r.time_us;
        line["seq"] = r.seq;
        line["type"] = r.type;
        line["payload"] = r.payload;
        os << line.dump() << '\n';
    }
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace ivnsim
