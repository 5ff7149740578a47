#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rina/sim_time.hpp"

namespace rina {

// Application process name: globally unambiguous, location independent.
struct Apn {
    std::string name;
    std::string instance;  // optional; "" when absent

    std::string full() const { return instance.empty() ? name : name + "/" + instance; }
    auto operator<=>(const Apn&) const = default;
};

// Distributed application (DAF/DIF) name.
struct Dan {
    std::string name;
    auto operator<=>(const Dan&) const = default;
};

// Address of an IPCP: unambiguous within its DIF, meaningless outside it.
using Address = std::uint32_t;

// Local identifiers. Value 0 is reserved as "unset" everywhere.
using PortIdValue = std::uint32_t;
using CepIdValue = std::uint32_t;
using QosId = std::uint16_t;

constexpr QosId kMgmtQosId = 0;  // reserved for the management flow

// Connection-id: source and destination CEP-ids plus QoS id. Unambiguous
// between a given pair of IPCPs.
struct ConnectionId {
    CepIdValue src_cep = 0;
    CepIdValue dst_cep = 0;
    QosId qos_id = 0;
    auto operator<=>(const ConnectionId&) const = default;

    std::string str() const {
        return std::to_string(src_cep) + "-" + std::to_string(dst_cep) + "-" +
               std::to_string(qos_id);
    }
};

// What an application asks for. Unset fields constrain nothing; a flag set
// to false constrains nothing either (only a requested `true` must match).
struct QosRequirements {
    std::optional<bool> reliable;
    std::optional<bool> ordered;
    std::optional<Duration> max_delay;       // ns
    std::optional<std::int64_t> avg_bandwidth;  // bits/s

    bool any_set() const {
        return reliable || ordered || max_delay || avg_bandwidth;
    }
};

// What a DIF offers.
struct QosCube {
    QosId id = 0;
    bool reliable = false;
    bool ordered = false;
    std::optional<Duration> max_delay;
    std::optional<std::int64_t> avg_bandwidth;
};

// Lowest-id cube satisfying every set requirement field, or nullopt.
// Deterministic and monotone: removing a non-selected cube never changes
// the result.
std::optional<QosId> select_qos_cube(const QosRequirements& req,
                                     const std::vector<QosCube>& cubes);

// Smallest-free allocator for port-ids and CEP-ids, starting at 1.
// Freed values may later be reused; smallest-free keeps traces stable.
class IdPool {
  public:
    explicit IdPool(std::uint32_t max_value = 65535) : max_(max_value) {}

    // Throws SimError("Exhausted...") when the configured space is full.
    std::uint32_t allocate();
    void release(std::uint32_t v);
    bool is_live(std::uint32_t v) const { return live_.count(v) > 0; }
    std::size_t live_count() const { return live_.size(); }
    const std::set<std::uint32_t>& live() const { return live_; }

  private:
    std::uint32_t max_;
    std::uint32_t high_ = 0;          // every value > high_ is free
    std::set<std::uint32_t> freed_;   // freed values <= high_
    std::set<std::uint32_t> live_;
};

}  // namespace rina
