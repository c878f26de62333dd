#include "ivnsim/orchestrator.hpp"

#include <algorithm>

namespace ivnsim {

ReallocPhaseModels ReallocPhaseModels::defaults() {
    ReallocPhaseModels m;
    m.scheduler = LatencyModel::from_triple(108, 124, 157);
    m.management = LatencyModel::from_triple(540, 590, 637);
    m.create = LatencyModel::from_triple(637, 703, 975);
    m.app_registration = LatencyModel::from_triple(6, 8, 9);
    return m;
}

AllocationPlan desired_allocation(const OperationMode& mode,
                                  const std::vector<ServiceApp>& services,
                                  const std::vector<ComputeNode>& nodes) {
    std::vector<ComputeNode> sorted_nodes = nodes;
    std::sort(sorted_nodes.begin(), sorted_nodes.end(),
              [](const ComputeNode& a, const ComputeNode& b) { return a.id < b.id; });

    std::map<std::string, int> load;  // planned load per node
    AllocationPlan plan;

    auto capacity_of = [&](const std::string& id) -> int {
        for (const auto& n : sorted_nodes)
            if (n.id == id) return n.capacity;
        throw Error("operation mode references unknown node " + id);
    };

    // Explicit and disabled placements first, in service order; "any"
    // placements fill remaining capacity afterwards so pinned services are
    // never displaced by first-fit.
    std::vector<const ServiceApp*> any_pass;
    for (const auto& svc : services) {
        auto it = mode.policy.find(svc.id);
        const PlacementPolicy pol =
            it == mode.policy.end() ? PlacementPolicy{PlacementPolicy::Kind::Any, ""} : it->second;
        switch (pol.kind) {
            case PlacementPolicy::Kind::Disabled:
                if (svc.criticality == Criticality::Critical)
                    throw InfeasiblePlan("mode " + mode.name + " disables critical service " +
                                         svc.id);
                plan.targets[svc.id] = std::nullopt;
                break;
            case PlacementPolicy::Kind::Node: {
                if (!svc.allowed_on(pol.node))
                    throw InfeasiblePlan("service " + svc.id + " not allowed on " + pol.node);
                if (load[pol.node] + 1 > capacity_of(pol.node))
                    throw InfeasiblePlan("node " + pol.node + " over capacity in mode " +
                                         mode.name);
                ++load[pol.node];
                plan.targets[svc.id] = pol.node;
                break;
            }
            case PlacementPolicy::Kind::Any:
                any_pass.push_back(&svc);
                break;
        }
    }

    for (const ServiceApp* svc : any_pass) {
        bool placed = false;
        for (const auto& n : sorted_nodes) {
            if (!svc->allowed_on(n.id) || load[n.id] + 1 > n.capacity) continue;
            ++load[n.id];
            plan.targets[svc->id] = n.id;
            placed = true;
            break;
        }
        if (!placed) {
            if (svc->criticality == Criticality::Critical)
                throw InfeasiblePlan("critical service " + svc->id + " cannot be placed in mode " +
                                     mode.name);
            plan.targets[svc->id] = std::nullopt;  // optional services degrade to disabled
        }
    }
    return plan;
}

std::vector<PlacementChange> plan_diff(const std::vector<ServiceApp>& services,
                                       const AllocationPlan& plan) {
    std::vector<PlacementChange> diff;
    for (const auto& svc : services) {
        auto it = plan.targets.find(svc.id);
        if (it == plan.targets.end()) continue;
        if (it->second == svc.current_node) continue;
        diff.push_back({svc.id, svc.current_node, it->second});
    }
    std::sort(diff.begin(), diff.end(),
              [](const PlacementChange& a, const PlacementChange& b) {
                  return a.service < b.service;
              });
    return diff;
}

std::vector<ReallocationEvent> execute_reallocation(const std::vector<PlacementChange>& diff,
                                                    const ReallocPhaseModels& models,
                                                    SimTime start, Rng& rng) {
    std::map<std::string, SimTime> node_free_at;  // phases serialize per target node
    std::vector<ReallocationEvent> events;
    events.reserve(diff.size());
    for (const auto& ch : diff) {
        ReallocationEvent ev;
        ev.service = ch.service;
        ev.from = ch.from;
        ev.to = ch.to;
        ev.start = start;
        if (!ch.is_move()) {
            ev.done = start;  // disable: tear down, nothing to create
            events.push_back(std::move(ev));
            continue;
        }
        SimTime& free_at = node_free_at[*ch.to];
        const SimTime phase_start = std::max(start, free_at);
        ev.timing.scheduler_ms = models.scheduler.sample_ms(rng);
        ev.timing.management_ms = models.management.sample_ms(rng);
        ev.timing.create_ms = models.create.sample_ms(rng);
        ev.timing.app_registration_ms = models.app_registration.sample_ms(rng);
        ev.done = phase_start + us_from_ms(ev.timing.total_ms());
        free_at = ev.done;
        events.push_back(std::move(ev));
    }
    return events;
}

void commit_changes(std::vector<ServiceApp>& services,
                    const std::vector<PlacementChange>& diff) {
    for (const auto& ch : diff) {
        for (auto& svc : services) {
            if (svc.id == ch.service) {
                svc.current_node = ch.to;
                break;
            }
        }
    }
}

}  // namespace ivnsim
