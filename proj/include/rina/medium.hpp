#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rina/engine.hpp"
#include "rina/pdu.hpp"
#include "rina/sim_time.hpp"
#include "rina/trace.hpp"

namespace rina {

// The physical interconnection under the bottommost DIFs: a full-duplex
// latency+rate pipe with an independent bit-error stream per link. Queueing
// lives in the RMT; the medium only serializes, delays and corrupts.
class Medium {
  public:
    struct Endpoint {
        std::string node;
        std::string ipcp;
        bool operator==(const Endpoint&) const = default;
    };

    struct Link {
        Endpoint ends[2];
        std::int64_t rate_bps = 0;
        Duration delay = 0;
        double ber = 0.0;
        std::uint32_t metric = 1;
        std::string name;
        RngStream rng;
        // Delivery callback per receiving end; wired by build_network.
        std::function<void(Pdu)> deliver[2];
        bool allocated[2] = {false, false};
        std::uint64_t tx_count = 0, rx_count = 0, drop_count = 0;
    };

    Medium(EventQueue& engine, Tracer& tracer, std::uint64_t seed)
        : engine_(engine), tracer_(tracer), seed_(seed) {}

    std::size_t add_link(Endpoint a, Endpoint b, std::int64_t rate_bps, Duration delay,
                         double ber, std::uint32_t metric);

    void attach(std::size_t link_id, int end, std::function<void(Pdu)> deliver);

    // (link id, local end) joining the two bottom IPCPs, if configured.
    std::optional<std::pair<std::size_t, int>> find_link(const Endpoint& a,
                                                         const Endpoint& b) const;

    // Flow allocation on the medium is inherent: zero simulated time, always
    // succeeds, idempotent. Throws SimError("NoSuchLink...") otherwise.
    std::pair<std::size_t, int> allocate(const Endpoint& requester, const Endpoint& peer);

    // Serializes and propagates one PDU. Returns the serialization time so
    // the sending RMT port can account occupancy. With probability
    // 1-(1-ber)^bits the PDU is dropped instead of delivered; management
    // PDUs ride reliably and are never corrupted.
    Duration transmit(std::size_t link_id, int from_end, Pdu pdu);

    const Link& link(std::size_t id) const { return links_.at(id); }
    std::size_t link_count() const { return links_.size(); }

    // Corruption probability for a PDU of `bits` bits on link `id`.
    double corrupt_probability(std::size_t id, std::int64_t bits) const;

  private:
    EventQueue& engine_;
    Tracer& tracer_;
    std::uint64_t seed_;
    std::vector<Link> links_;
};

}  // namespace rina
