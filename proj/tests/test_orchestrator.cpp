#include "doctest.h"

#include <set>

#include "ivnsim/orchestrator.hpp"

using namespace ivnsim;

namespace {

std::vector<ComputeNode> cluster() {
    return {{"hpc1", NodeRole::Master, 4}, {"hpc2", NodeRole::Worker, 4},
            {"hpc3", NodeRole::Worker, 4}};
}

std::vector<ServiceApp> services_2crit_3opt() {
    return {
        {"brake-ctrl", Criticality::Critical, {}, "hpc1"},
        {"drive-assist", Criticality::Critical, {}, "hpc2"},
        {"map-sync", Criticality::Optional, {}, "hpc2"},
        {"media", Criticality::Optional, {}, "hpc3"},
        {"voice", Criticality::Optional, {}, "hpc3"},
    };
}

OperationMode failsafe_keeping_current() {
    OperationMode m;
    m.name = "FailSafe";
    m.policy["brake-ctrl"] = {PlacementPolicy::Kind::Node, "hpc1"};
    m.policy["drive-assist"] = {PlacementPolicy::Kind::Node, "hpc2"};
    m.policy["map-sync"] = {PlacementPolicy::Kind::Disabled, ""};
    m.policy["media"] = {PlacementPolicy::Kind::Disabled, ""};
    m.policy["voice"] = {PlacementPolicy::Kind::Disabled, ""};
    return m;
}

}  // namespace

TEST_CASE("fail-safe disables every optional service and keeps criticals placed") {
    const auto svcs = services_2crit_3opt();
    const auto plan = desired_allocation(failsafe_keeping_current(), svcs, cluster());
    const auto diff = plan_diff(svcs, plan);
    CHECK(diff.size() == 3);
    for (const auto& ch : diff) {
        CHECK(!ch.to.has_value());  // all three optionals disabled
    }
    CHECK(plan.targets.at("brake-ctrl") == std::optional<std::string>{"hpc1"});
    CHECK(plan.targets.at("drive-assist") == std::optional<std::string>{"hpc2"});
}

TEST_CASE("a mode identical to the current placement yields an empty diff") {
    const auto svcs = services_2crit_3opt();
    OperationMode normal;
    normal.name = "Normal";
    for (const auto& s : svcs)
        normal.policy[s.id] = {PlacementPolicy::Kind::Node, *s.current_node};
    const auto plan = desired_allocation(normal, svcs, cluster());
    CHECK(plan_diff(svcs, plan).empty());
}

TEST_CASE("capacity violations on pinned criticals are infeasible") {
    std::vector<ComputeNode> tiny{{"hpc1", NodeRole::Master, 1}};
    std::vector<ServiceApp> two{
        {"a", Criticality::Critical, {"hpc1"}, "hpc1"},
        {"b", Criticality::Critical, {"hpc1"}, std::nullopt},
    };
    OperationMode m;
    m.name = "Pinned";
    m.policy["a"] = {PlacementPolicy::Kind::Node, "hpc1"};
    m.policy["b"] = {PlacementPolicy::Kind::Node, "hpc1"};
    CHECK_THROWS_AS(desired_allocation(m, two, tiny), InfeasiblePlan);
}

TEST_CASE("disabling a critical service is rejected") {
    OperationMode m;
    m.name = "Broken";
    m.policy["brake-ctrl"] = {PlacementPolicy::Kind::Disabled, ""};
    CHECK_THROWS_AS(desired_allocation(m, services_2crit_3opt(), cluster()), InfeasiblePlan);
}

TEST_CASE("any-placement falls back to first-fit by node id") {
    std::vector<ServiceApp> one{{"svc", Criticality::Critical, {}, std::nullopt}};
    OperationMode m;
    m.name = "Anywhere";
    m.policy["svc"] = {PlacementPolicy::Kind::Any, ""};
    const auto plan = desired_allocation(m, one, cluster());
    CHECK(plan.targets.at("svc") == std::optional<std::string>{"hpc1"});
}

TEST_CASE("phase models reproduce the measured averages exactly") {
    const auto models = ReallocPhaseModels::defaults();
    CHECK(models.scheduler.mean_ms() == doctest::Approx(124.0));
    CHECK(models.management.mean_ms() == doctest::Approx(590.0));
    CHECK(models.create.mean_ms() == doctest::Approx(703.0));
    CHECK(models.app_registration.mean_ms() == doctest::Approx(8.0));
}

TEST_CASE("reallocation timing: sampled phases, additive totals, bounded sums") {
    const auto models = ReallocPhaseModels::defaults();
    Rng rng(7);
    const std::vector<PlacementChange> one_move{{"svc", std::string("hpc1"), std::string("hpc2")}};

    // Interval arithmetic over the per-phase bounds. The measured per-run
    // totals sit strictly inside because phase extremes never co-occurred.
    const double lo = 108 + 540 + 637 + 6;
    const double hi = 157 + 637 + 975 + 9;
    CHECK(lo == 1291);
    CHECK(hi == 1778);

    double sum = 0.0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
        const auto evs = execute_reallocation(one_move, models, 0, rng);
        REQUIRE(evs.size() == 1);
        const auto& t = evs[0].timing;
        const double total = t.total_ms();
        CHECK(total ==
              doctest::Approx(t.scheduler_ms + t.management_ms + t.create_ms +
                              t.app_registration_ms));
        CHECK(total >= lo);
        CHECK(total <= hi);
        CHECK(evs[0].done - evs[0].start == us_from_ms(total));  // availability gap
        sum += total;
    }
    const double mean = sum / n;
    CHECK(mean > 1426.0 * 0.95);
    CHECK(mean < 1426.0 * 1.05);
}

TEST_CASE("zero-latency models complete immediately") {
    ReallocPhaseModels zero;
    zero.scheduler = LatencyModel::constant(0);
    zero.management = LatencyModel::constant(0);
    zero.create = LatencyModel::constant(0);
    zero.app_registration = LatencyModel::constant(0);
    Rng rng(1);
    const auto evs = execute_reallocation({{"svc", std::string("hpc1"), std::string("hpc2")}},
                                          zero, 5000, rng);
    REQUIRE(evs.size() == 1);
    CHECK(evs[0].timing.total_ms() == 0.0);
    CHECK(evs[0].done == 5000);
}

TEST_CASE("moves serialize per target node and run concurrently across nodes") {
    const auto models = ReallocPhaseModels::defaults();
    Rng rng(11);
    const std::vector<PlacementChange> moves{
        {"a", std::string("hpc1"), std::string("hpc2")},
        {"b", std::string("hpc1"), std::string("hpc2")},
        {"c", std::string("hpc1"), std::string("hpc3")},
    };
    const auto evs = execute_reallocation(moves, models, 0, rng);
    REQUIRE(evs.size() == 3);
    // a and b target hpc2: b starts after a is done; c overlaps on hpc3.
    CHECK(evs[1].done - evs[1].start > us_from_ms(evs[1].timing.total_ms()));
    CHECK(evs[2].done - evs[2].start == us_from_ms(evs[2].timing.total_ms()));
}

TEST_CASE("single placement per service after committing a plan") {
    auto svcs = services_2crit_3opt();
    const auto plan = desired_allocation(failsafe_keeping_current(), svcs, cluster());
    const auto diff = plan_diff(svcs, plan);
    commit_changes(svcs, diff);
    std::set<std::string> running;
    for (const auto& s : svcs) {
        if (!s.current_node) continue;
        CHECK(running.insert(s.id).second);
        CHECK(s.criticality == Criticality::Critical);
    }
    CHECK(running == std::set<std::string>{"brake-ctrl", "drive-assist"});
}
