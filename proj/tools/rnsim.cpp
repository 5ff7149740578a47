// rnsim: runs declarative RINA network scenarios and writes traces and
// latency metrics.
//
// Exit codes: 0 clean run, 1 validation failure, 2 runtime invariant breach.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rina/network.hpp"
#include "rina/scenario.hpp"

namespace {

int g_log_level = 2;  // 0 error, 1 warn, 2 info, 3 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 2) std::cerr << "[info] " << msg << "\n";
}

void log_error(const std::string& msg) {
    if (g_log_level >= 0) std::cerr << "[error] " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic RINA network simulator"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "parse, validate and run a scenario file");
    std::string file;
    std::optional<std::uint64_t> seed;
    std::optional<double> until_s;
    std::string trace_path, metrics_path, log_level = "info";
    bool validate_only = false, strict = false;
    run->add_option("file", file, "scenario file (JSON)")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--until", until_s, "override stop time, in seconds");
    run->add_option("--trace", trace_path, "trace output path (default: <stem>.trace)");
    run->add_option("--metrics", metrics_path, "metrics CSV path (default: <stem>.metrics.csv)");
    run->add_flag("--validate-only", validate_only, "parse and validate, do not run");
    run->add_flag("--strict", strict, "nonzero exit on EFCP flow errors");
    run->add_option("--log-level", log_level, "error|warn|info|debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

    CLI11_PARSE(app, argc, argv);

    g_log_level = log_level == "error" ? 0 : log_level == "warn" ? 1 : log_level == "debug" ? 3 : 2;

    auto parsed = rina::parse_scenario_file(file);
    if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics) log_error(d);
        std::cerr << "validation failed: " << parsed.diagnostics.size() << " diagnostic(s)\n";
        return 1;
    }
    const rina::Scenario& scenario = *parsed.scenario;
    log_info("scenario '" + scenario.name + "' valid: " + std::to_string(scenario.nodes.size()) +
             " nodes, " + std::to_string(scenario.links.size()) + " links");
    if (validate_only) return 0;

    const std::string stem = std::filesystem::path(file).stem().string();
    if (trace_path.empty()) trace_path = stem + ".trace";
    if (metrics_path.empty()) metrics_path = stem + ".metrics.csv";

    rina::Network net(scenario, seed);
    std::ofstream trace_out(trace_path);
    if (!trace_out) {
        log_error("cannot open trace path: " + trace_path);
        return 1;
    }
    net.tracer().add_sink([&trace_out](const rina::TraceEvent& e) {
        trace_out << e.line() << '\n';
    });

    std::optional<rina::SimTime> until;
    if (until_s) until = static_cast<rina::SimTime>(*until_s * 1e9);
    rina::RunSummary summary = net.run(until);

    std::ofstream metrics_out(metrics_path);
    metrics_out << net.metrics_csv();

    auto counter = [&summary](const std::string& k) {
        auto it = summary.counters.find(k);
        return it == summary.counters.end() ? std::uint64_t{0} : it->second;
    };
    std::cout << "scenario " << scenario.name << " finished at t=" << summary.end_time << " ns\n"
              << "  events        " << summary.events_processed << "\n"
              << "  flows         " << summary.flows_allocated << " allocated, "
              << summary.flows_deallocated << " deallocated\n"
              << "  medium        " << counter("medium.MEDIUM_TX") << " tx, "
              << counter("medium.MEDIUM_RX") << " rx, " << counter("medium.MEDIUM_DROP")
              << " dropped\n"
              << "  flow errors   " << summary.flow_errors << "\n"
              << "  leak check    "
              << (summary.leak_check_ran ? (summary.leak_check_ok ? "ok" : "FAILED") : "not run")
              << "\n"
              << "  trace         " << trace_path << "\n"
              << "  metrics       " << metrics_path << "\n";
    if (summary.leak_check_ran && !summary.leak_check_ok) {
        for (const auto& d : summary.leak_details) log_error("leak: " + d);
        return 2;
    }
    if (strict && summary.flow_errors > 0) {
        log_error("flow errors under --strict");
        return 2;
    }
    return 0;
}
