#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivnsim/errors.hpp"
#include "ivnsim/latency.hpp"
#include "ivnsim/time.hpp"

namespace ivnsim {

enum class NodeRole : std::uint8_t { Master, Worker };
enum class Criticality : std::uint8_t { Critical, Optional };

struct ComputeNode {
    std::string id;
    NodeRole role = NodeRole::Worker;
    int capacity = 4;  // max concurrent services
};

struct ServiceApp {
    std::string id;
    Criticality criticality = Criticality::Optional;
    std::vector<std::string> allowed_nodes;  // empty = any
    std::optional<std::string> current_node;

    bool allowed_on(const std::string& node) const {
        if (allowed_nodes.empty()) return true;
        for (const auto& n : allowed_nodes)
            if (n == node) return true;
        return false;
    }
};

/// Placement target for one service within an operation mode: a concrete
/// node, any feasible node, or disabled.
struct PlacementPolicy {
    enum class Kind : std::uint8_t { Node, Any, Disabled };
    Kind kind = Kind::Any;
    std::string node;
};

struct OperationMode {
    std::string name;
    std::map<std::string, PlacementPolicy> policy;  // service id -> target
};

struct AllocationPlan {
    // service id -> target node, or nullopt for disabled
    std::map<std::string, std::optional<std::string>> targets;
};

struct PlacementChange {
    std::string service;
    std::optional<std::string> from;
    std::optional<std::string> to;  // nullopt = disable
    bool is_move() const { return to.has_value(); }
};

/// The four measured phases of one POD reallocation. Total is always the
/// exact sum of the phases.
struct ReallocationTiming {
    double scheduler_ms = 0.0;
    double management_ms = 0.0;
    double create_ms = 0.0;
    double app_registration_ms = 0.0;
    double total_ms() const {
        return scheduler_ms + management_ms + create_ms + app_registration_ms;
    }
};

struct ReallocPhaseModels {
    LatencyModel scheduler;
    LatencyModel management;
    LatencyModel create;
    LatencyModel app_registration;

    /// Defaults reproduce the measured reaction-time table of the reference
    /// deployment (min/avg/max per phase, PERT-shaped).
    static ReallocPhaseModels defaults();
};

struct ReallocationEvent {
    std::string service;
    std::optional<std::string> from;
    std::optional<std::string> to;
    SimTime start = 0;          // teardown instant; service unavailable from here
    SimTime done = 0;           // registration complete (== start for disables)
    ReallocationTiming timing;  // zeros for disables
};

/// Computes the desired allocation for a mode. Placement is deterministic:
/// explicit targets win, "any" falls back to first-fit over node ids in
/// ascending order. Throws InfeasiblePlan when a Critical service cannot be
/// placed.
AllocationPlan desired_allocation(const OperationMode& mode,
                                  const std::vector<ServiceApp>& services,
                                  const std::vector<ComputeNode>& nodes);

/// Diff between current placements and a plan, in service-id order.
std::vector<PlacementChange> plan_diff(const std::vector<ServiceApp>& services,
                                       const AllocationPlan& plan);

/// Executes placement changes starting at `start`: phases are sampled per
/// moved service and run sequentially per target node, concurrently across
/// nodes. A moved service is unavailable from teardown until registration
/// completes; a disabled service simply stops at `start`.
std::vector<ReallocationEvent> execute_reallocation(const std::vector<PlacementChange>& diff,
                                                    const ReallocPhaseModels& models,
                                                    SimTime start, Rng& rng);

/// Applies the realized changes back onto the service list.
void commit_changes(std::vector<ServiceApp>& services, const std::vector<PlacementChange>& diff);

}  // namespace ivnsim
