#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "rina/engine.hpp"
#include "rina/ids.hpp"
#include "rina/pdu.hpp"
#include "rina/trace.hpp"

namespace rina {

// Forwarding lookup: exact (dst,qos) -> (dst, any qos) -> default -> miss.
struct ForwardingTable {
    std::map<std::pair<Address, QosId>, PortIdValue> entries;
    std::optional<PortIdValue> default_port;

    std::optional<PortIdValue> lookup(Address dst, QosId qos) const;
    std::uint64_t digest() const;  // stable hash for ROUTING_INSTALL traces
};

// Encapsulation of an (N)-PDU as the SDU of an (N-1)-flow and its inverse.
Sdu rmt_mux(const Pdu& pdu);
Pdu rmt_demux(const Sdu& sdu);

// Relay and Multiplexing Task: per-(N-1)-port bounded FIFO queues plus the
// forwarding table. Ports backed by the medium pace departures with the
// serialization time; ports backed by a lower flow hand off at zero delay.
class Rmt {
  public:
    enum class Dir { kIn, kOut };

    struct Port {
        PortIdValue id = 0;
        // Returns occupancy (serialization time) for pacing; 0 for lower flows.
        std::function<Duration(Pdu)> transmit;
        std::deque<Pdu> in_q, out_q;
        SimTime busy_until = 0;
        bool departure_scheduled = false;
        bool drain_scheduled = false;
    };

    Rmt(EventQueue& engine, Tracer& tracer, std::string node, std::string comp,
        std::size_t queue_capacity)
        : engine_(engine),
          tracer_(tracer),
          node_(std::move(node)),
          comp_(std::move(comp)),
          capacity_(queue_capacity) {}

    void add_port(PortIdValue id, std::function<Duration(Pdu)> transmit);
    void remove_port(PortIdValue id);
    bool has_port(PortIdValue id) const { return ports_.count(id) > 0; }
    const std::map<PortIdValue, Port>& ports() const { return ports_; }

    ForwardingTable& table() { return table_; }
    const ForwardingTable& table() const { return table_; }

    std::optional<PortIdValue> forward(const Pdu& pdu) const {
        return table_.lookup(pdu.dst_addr, pdu.qos_id);
    }

    // Appends to the port's queue unless full (tail drop). Out queues feed
    // the departure machinery; in queues drain to `on_ingress` at the same
    // timestamp, preserving arrival order via the event tie-break.
    bool enqueue(Pdu pdu, PortIdValue port, Dir dir);

    // Dispatch for PDUs drained from an in-queue; set by the owning IPCP.
    std::function<void(Pdu, PortIdValue)> on_ingress;
    // Occupancy-change notifications toward the Resource Allocator.
    std::function<void(PortIdValue, Dir, std::size_t)> on_occupancy;

    std::uint64_t queue_drops() const { return queue_drops_; }

  private:
    void kick_out(Port& p);
    void depart(PortIdValue id);
    void drain_in(PortIdValue id);
    void trace_q(const char* ev, const Pdu& pdu, PortIdValue port, Dir dir, std::size_t len);

    EventQueue& engine_;
    Tracer& tracer_;
    std::string node_;
    std::string comp_;
    std::size_t capacity_;
    std::map<PortIdValue, Port> ports_;
    ForwardingTable table_;
    std::uint64_t queue_drops_ = 0;
};

}  // namespace rina
