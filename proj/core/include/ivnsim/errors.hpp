#pragma once

#include <stdexcept>
#include <string>

namespace ivnsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotAMember : Error { using Error::Error; };
struct NotTunneled : Error { using Error::Error; };
struct AmbiguousMonitors : Error { using Error::Error; };
struct UnroutableEntry : Error { using Error::Error; };
struct DuplicateRuleId : Error { using Error::Error; };
struct InvalidPort : Error { using Error::Error; };
struct DegenerateBandwidth : Error { using Error::Error; };
struct NotTrained : Error { using Error::Error; };
struct InfeasiblePlan : Error { using Error::Error; };
struct UnknownSensor : Error { using Error::Error; };
struct StaleDirective : Error { using Error::Error; };
struct EmptySlice : Error { using Error::Error; };

/// Carries the JSON-pointer style location of the first schema violation.
struct ScenarioInvalid : Error {
    explicit ScenarioInvalid(const std::string& what) : Error(what) {}
};

}  // namespace ivnsim
