#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rina/ids.hpp"
#include "rina/ipcp.hpp"
#include "rina/node.hpp"
#include "rina/sim_time.hpp"

namespace rina {

// Declarative run description. All durations/rates are converted to integer
// nanoseconds / bits-per-second at parse time; the emitter converts back.
struct Scenario {
    struct IpcpDecl {
        std::string name;
        std::string dif;
        Address address = 0;
        std::vector<std::string> over;  // empty: every next-lower-rank IPCP on the node
    };

    struct NodeDecl {
        std::string name;
        NodeKind kind = NodeKind::kHost;
        std::vector<IpcpDecl> ipcps;
    };

    struct LinkDecl {
        std::string a_node, a_ipcp;
        std::string b_node, b_ipcp;
        std::int64_t rate_bps = 0;
        Duration delay = 0;
        double ber = 0.0;
        std::uint32_t metric = 1;
    };

    struct AppDecl {
        std::string node;
        Apn apn;
        std::string role;  // ping-initiator | ping-responder
        Apn dst;           // initiator only
        QosRequirements qos;
        std::uint64_t count = 0;
        Duration interval = 0;
        std::size_t payload_bytes = 64;
        SimTime start_at = 0;
        Duration sample_timeout = from_ms(1000);
        bool deny = false;  // responder refuses incoming flows
    };

    struct DaDecl {
        Apn apn;
        std::string dif;
        std::string node;
    };

    std::string name;
    std::uint64_t seed = 1;
    SimTime stop_time = from_sec(60);
    std::vector<QosCube> qos_cubes;
    std::vector<DifConfig> difs;
    std::vector<NodeDecl> nodes;
    std::vector<LinkDecl> links;
    std::vector<AppDecl> apps;
    std::vector<DaDecl> da_directory;

    const DifConfig* dif(const std::string& n) const {
        for (const auto& d : difs) {
            if (d.name == n) return &d;
        }
        return nullptr;
    }
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> diagnostics;  // empty iff scenario is set

    bool ok() const { return scenario.has_value(); }
};

// Parses and fully validates a scenario document. Every diagnostic carries
// the JSON path of the offending element.
ParseResult parse_scenario(const std::string& text);
ParseResult parse_scenario_file(const std::string& path);

// Inverse of parse_scenario up to equivalence (used for golden fixtures and
// the round-trip property test).
std::string emit_scenario(const Scenario& s);

}  // namespace rina
