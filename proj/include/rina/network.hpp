#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rina/daf.hpp"
#include "rina/engine.hpp"
#include "rina/medium.hpp"
#include "rina/node.hpp"
#include "rina/scenario.hpp"
#include "rina/trace.hpp"

namespace rina {

struct RunSummary {
    SimTime end_time = 0;
    std::uint64_t events_processed = 0;
    std::uint64_t flows_allocated = 0;
    std::uint64_t flows_deallocated = 0;
    std::uint64_t flow_errors = 0;
    bool leak_check_ran = false;
    bool leak_check_ok = false;
    std::vector<std::string> leak_details;
    std::map<std::string, std::uint64_t> counters;
};

// Owns one simulation run: the engine, medium, nodes and directory built
// from a validated Scenario, plus run orchestration (t=0 enrollment
// bootstrap, app starts, end-of-run teardown and the leak check).
class Network {
  public:
    explicit Network(const Scenario& scenario, std::optional<std::uint64_t> seed_override = {});
    ~Network();

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    EventQueue& engine() { return engine_; }
    Tracer& tracer() { return tracer_; }
    Medium& medium() { return *medium_; }
    DaDirectory& da() { return da_; }
    const Scenario& scenario() const { return scenario_; }

    Node* node(const std::string& name);
    Ipcp* ipcp(const std::string& name);

    struct IpcpRecord {
        Ipcp* ipcp = nullptr;
        std::string node;
        std::string dif;
        Address address = 0;
    };
    const IpcpRecord* ipcp_record(const std::string& apn_name) const;
    Ipcp* member_on_node(const std::string& node, const std::string& dif) const;

    // Destination resolution: the member address of `dif` on the node that
    // hosts `dst` (an application via the DA directory, or an IPCP).
    std::optional<Address> resolve_dst(const Apn& dst, const std::string& dif) const;

    // Runs to quiescence (or stop_time), then tears every remaining flow
    // down rank by rank so the final leak check counts from zero.
    RunSummary run(std::optional<SimTime> stop_override = {});

    // Registry audit; returns a list of violations (empty = consistent).
    std::vector<std::string> audit() const;

    const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
    std::vector<std::pair<std::string, PingSample>> collect_samples() const;
    std::string metrics_csv() const;
    std::uint64_t flow_error_count() const { return flow_errors_; }

  private:
    void build();
    void derive_adjacencies();
    void schedule_bootstraps();
    void teardown(SimTime cap);
    void leak_check(RunSummary& out);
    std::vector<std::string> audit_impl_after_teardown() const;
    void count_event(const TraceEvent& e);

    Scenario scenario_;
    EventQueue engine_;
    Tracer tracer_;
    std::unique_ptr<Medium> medium_;
    DaDirectory da_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::map<std::string, IpcpRecord> ipcp_registry_;  // apn name -> record
    std::map<std::string, std::uint64_t> counters_;
    std::map<std::string, std::string> comp_dif_;  // ipcp name -> dif (for counters)
    std::uint64_t flow_errors_ = 0;
    int max_rank_ = 0;
    bool torn_down_ = false;
};

}  // namespace rina
