// ivnsim: scenario runner for the security-enhanced in-vehicle network
// simulator. See README.md for the scenario format and shipped fixtures.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"

#include "ivnsim/acdc.hpp"
#include "ivnsim/engine.hpp"
#include "ivnsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace ivnsim;

namespace {

constexpr const char* kNadsCsvHeader =
    "nads_id,stream,interval_index,raw_x,raw_y,x,y,frame_count,verdict,distance\n";

struct SeedRange {
    std::uint64_t from = 0, to = 0;
    bool set = false;
};

bool parse_seed_range(const std::string& s, SeedRange& out) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) return false;
    try {
        out.from = std::stoull(s.substr(0, dots));
        out.to = std::stoull(s.substr(dots + 2));
    } catch (...) {
        return false;
    }
    out.set = true;
    return out.from <= out.to;
}

nlohmann::ordered_json stats_of(const std::vector<double>& xs) {
    nlohmann::ordered_json j;
    if (xs.empty()) {
        j["n"] = 0;
        return j;
    }
    double mn = xs[0], mx = xs[0], sum = 0.0;
    for (double x : xs) {
        mn = std::min(mn, x);
        mx = std::max(mx, x);
        sum += x;
    }
    j["n"] = xs.size();
    j["min"] = mn;
    j["avg"] = sum / static_cast<double>(xs.size());
    j["max"] = mx;
    return j;
}

int run_single(const Scenario& sc, std::uint64_t seed, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream nads_csv;
    std::ofstream tables;
    RunSinks sinks;
    if (sc.output.nads_csv) {
        nads_csv.open(out_dir / "nads.csv", std::ios::binary);
        nads_csv << kNadsCsvHeader;
        sinks.nads_csv = &nads_csv;
    }
    if (sc.output.tables) {
        tables.open(out_dir / "tables.jsonl", std::ios::binary);
        sinks.tables_jsonl = &tables;
    }

    RunResult result = run_scenario(sc, seed, sinks);

    if (sc.output.events) {
        std::ofstream ev(out_dir / "events.jsonl", std::ios::binary);
        result.log.write_jsonl(ev);
    }
    if (sc.output.timing_csv) {
        std::ofstream tc(out_dir / "timing.csv", std::ios::binary);
        write_timing_csv_header(tc);
        for (const auto& r : result.timings) write_timing_csv_row(tc, r);
    }
    {
        std::vector<double> fdti, frti, fhti;
        for (const auto& r : result.timings) {
            if (!r.detected) continue;
            fdti.push_back(r.fdti_ms);
            frti.push_back(r.frti_ms);
            fhti.push_back(r.fhti_ms);
        }
        nlohmann::ordered_json timing;
        timing["records"] = result.timings.size();
        timing["fdti_ms"] = stats_of(fdti);
        timing["frti_ms"] = stats_of(frti);
        timing["fhti_ms"] = stats_of(fhti);
        result.summary["timing"] = std::move(timing);
        std::ofstream sj(out_dir / "summary.json", std::ios::binary);
        sj << result.summary.dump(2) << '\n';
    }
    std::cout << "run complete: scenario=" << sc.name << " seed=" << seed
              << " reports=" << result.summary["anomaly_reports_total"].get<std::uint64_t>()
              << " out=" << out_dir.string() << "\n";
    return 0;
}

int run_sweep(const Scenario& sc, const SeedRange& range, const fs::path& out_dir, int jobs) {
    fs::create_directories(out_dir);
    const std::size_t n = static_cast<std::size_t>(range.to - range.from + 1);
    std::vector<std::vector<TimingRecord>> per_seed(n);
    std::vector<nlohmann::ordered_json> summaries(n);

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            RunResult r = run_scenario(sc, range.from + i, RunSinks{});
            per_seed[i] = std::move(r.timings);
            summaries[i] = std::move(r.summary);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::ofstream tc(out_dir / "timing.csv", std::ios::binary);
    write_timing_csv_header(tc);
    std::vector<double> fdti, frti, fhti, rtt, realloc_ms;
    std::uint64_t detected = 0, records = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& r : per_seed[i]) {
            write_timing_csv_row(tc, r);
            ++records;
            if (!r.detected) continue;
            ++detected;
            fdti.push_back(r.fdti_ms);
            frti.push_back(r.frti_ms);
            fhti.push_back(r.fhti_ms);
            if (r.path == ResponsePath::Cloud) {
                rtt.push_back(r.acdc_rtt_ms);
                realloc_ms.push_back(r.realloc_ms);
            }
        }
    }

    nlohmann::ordered_json s;
    s["scenario"] = sc.name;
    s["seeds"] = {{"from", range.from}, {"to", range.to}};
    s["runs"] = n;
    s["timing_records"] = records;
    s["detected"] = detected;
    s["fdti_ms"] = stats_of(fdti);
    s["frti_ms"] = stats_of(frti);
    s["fhti_ms"] = stats_of(fhti);
    s["acdc_rtt_ms"] = stats_of(rtt);
    s["realloc_total_ms"] = stats_of(realloc_ms);
    std::ofstream sj(out_dir / "summary.json", std::ios::binary);
    sj << s.dump(2) << '\n';
    std::cout << "sweep complete: scenario=" << sc.name << " runs=" << n
              << " out=" << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ivnsim - deterministic simulator of a software-defined in-vehicle "
                 "network with layered security monitoring and response"};
    app.require_subcommand(1);

    std::string default_out = ".";
    if (const char* env = std::getenv("IVNSIM_OUT")) default_out = env;

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario file");
    std::string validate_path;
    validate_cmd->add_option("file", validate_path, "scenario JSON")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a scenario (single seed or seed sweep)");
    std::string run_path;
    run_cmd->add_option("file", run_path, "scenario JSON")->required();
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    run_cmd->add_option_function<std::uint64_t>(
               "--seed", [&](std::uint64_t v) { seed_override = v; seed_set = true; },
               "seed override");
    std::string seeds_arg;
    run_cmd->add_option("--seeds", seeds_arg, "seed sweep A..B (writes timing.csv + stats)");
    std::string out_dir = default_out;
    run_cmd->add_option("--out", out_dir, "output directory (default $IVNSIM_OUT or .)");
    bool log_unknown = false;
    run_cmd->add_flag("--log-unknown", log_unknown,
                      "log unknown (non-denied) packet-ins as violations");
    int jobs = 1;
    run_cmd->add_option("--jobs", jobs, "parallel runs in sweep mode")->check(CLI::Range(1, 64));

    // fleet
    auto* fleet_cmd = app.add_subcommand("fleet", "Generate labeled fleet security logs");
    int fleet_vehicles = 10;
    double fleet_duration = 3600.0;
    std::uint64_t fleet_seed = 1;
    std::string fleet_out = default_out;
    std::vector<std::string> fleet_attacks;
    double benign_rate = 60.0;
    int fleet_k = 3;
    double fleet_window = 60.0;
    fleet_cmd->add_option("--vehicles", fleet_vehicles, "fleet size")->check(CLI::Range(1, 100000));
    fleet_cmd->add_option("--duration-s", fleet_duration, "log duration per vehicle");
    fleet_cmd->add_option("--seed", fleet_seed, "generator seed");
    fleet_cmd->add_option("--out", fleet_out, "output directory");
    fleet_cmd->add_option("--attack", fleet_attacks,
                          "attack burst spec TYPE:BURSTS:REPORTS (repeatable)");
    fleet_cmd->add_option("--benign-rate", benign_rate, "benign reports per hour per vehicle");
    fleet_cmd->add_option("--k", fleet_k, "fusion threshold for the replay summary");
    fleet_cmd->add_option("--window-s", fleet_window, "fusion window for the replay summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate_cmd) {
            const LoadResult lr = load_scenario_file(validate_path);
            if (!lr.ok()) {
                for (const auto& e : lr.errors) std::cerr << e << "\n";
                return 2;
            }
            std::cout << "ok: " << validate_path << "\n";
            return 0;
        }

        if (*run_cmd) {
            LoadResult lr = load_scenario_file(run_path);
            if (!lr.ok()) {
                for (const auto& e : lr.errors) std::cerr << e << "\n";
                return 2;
            }
            Scenario& sc = lr.scenario;
            if (log_unknown) sc.log_unknown = true;
            SeedRange range;
            if (!seeds_arg.empty()) {
                if (!parse_seed_range(seeds_arg, range)) {
                    std::cerr << "--seeds expects A..B with A <= B\n";
                    return 2;
                }
                return run_sweep(sc, range, out_dir, jobs);
            }
            return run_single(sc, seed_set ? seed_override : sc.seed, out_dir);
        }

        if (*fleet_cmd) {
            std::vector<FleetAttackSpec> mix;
            for (const auto& spec : fleet_attacks) {
                FleetAttackSpec a;
                const auto c1 = spec.find(':');
                const auto c2 = spec.find(':', c1 == std::string::npos ? 0 : c1 + 1);
                if (c1 == std::string::npos || c2 == std::string::npos) {
                    std::cerr << "--attack expects TYPE:BURSTS:REPORTS\n";
                    return 2;
                }
                a.type = spec.substr(0, c1);
                a.bursts_per_vehicle = std::stoi(spec.substr(c1 + 1, c2 - c1 - 1));
                a.reports_per_burst = std::stoi(spec.substr(c2 + 1));
                mix.push_back(std::move(a));
            }
            FleetLogOptions opts;
            opts.benign_rate_per_hour = benign_rate;
            const auto records =
                generate_fleet_logs(fleet_vehicles, fleet_duration, mix, fleet_seed, opts);

            fs::create_directories(fleet_out);
            std::ofstream logs(fs::path(fleet_out) / "fleet_logs.jsonl", std::ios::binary);
            for (const auto& r : records) {
                nlohmann::ordered_json j;
                j["vehicle"] = r.vehicle;
                j["time_us"] = r.timestamp;
                j["sensor"] = r.report.sensor;
                j["kind"] = report_kind_name(r.report.kind);
                j["stream"] = r.report.stream;
                j["payload"] = r.report.payload;
                j["ground_truth"] =
                    r.ground_truth.attack ? "attack:" + r.ground_truth.attack_type : "benign";
                logs << j.dump() << '\n';
            }

            FusionPolicy policy;
            policy.k_threshold = fleet_k;
            policy.window_us = us_from_s(fleet_window);
            const auto rows = replay_fleet_logs(records, policy);
            std::ofstream csv(fs::path(fleet_out) / "fleet_summary.csv", std::ios::binary);
            csv << "vehicle,benign,attack,incidents,escalated,suppressed,forwarded\n";
            for (const auto& row : rows) {
                csv << row.vehicle << ',' << row.benign << ',' << row.attack << ','
                    << row.incidents << ',' << row.escalated << ',' << row.suppressed << ','
                    << row.forwarded << '\n';
            }
            std::cout << "fleet logs written: vehicles=" << fleet_vehicles
                      << " records=" << records.size() << " out=" << fleet_out << "\n";
            return 0;
        }
    } catch (const ScenarioInvalid& e) {
        std::cerr << "scenario invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
