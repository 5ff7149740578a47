#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rina/engine.hpp"
#include "rina/ids.hpp"
#include "rina/mgmt_msg.hpp"
#include "rina/pdu.hpp"
#include "rina/trace.hpp"

namespace rina {

// Enrollment: the authenticated handshake an IPCP runs per peer before any
// data CreateFlowRequest may be sent to that peer.
class EnrollmentManager {
  public:
    enum class State { kNotEnrolled, kConnecting, kEnrolled, kFailed };

    struct Hooks {
        std::function<void(MgmtMessage)> send;
        std::function<void(Address)> on_enrolled;
    };

    EnrollmentManager(EventQueue& engine, Tracer& tracer, std::string node, std::string comp,
                      std::string dif_name, std::string auth, Duration timeout, Address self,
                      Hooks hooks)
        : engine_(engine),
          tracer_(tracer),
          node_(std::move(node)),
          comp_(std::move(comp)),
          dif_name_(std::move(dif_name)),
          auth_(std::move(auth)),
          timeout_(timeout),
          self_(self),
          hooks_(std::move(hooks)) {}

    // Runs the handshake if needed; cb(true) once ENROLLED, cb(false) on
    // failure or timeout. FAILED is sticky for the rest of the run.
    void ensure_enrolled(Address peer, std::function<void(bool)> cb);

    void on_mconnect(const MgmtMessage& m);
    void on_mconnect_response(const MgmtMessage& m);

    State state(Address peer) const;
    bool is_enrolled(Address peer) const { return state(peer) == State::kEnrolled; }

    static const char* to_string(State s);

  private:
    struct Fsm {
        State state = State::kNotEnrolled;
        std::vector<std::function<void(bool)>> waiters;
        EventHandle timeout;
    };

    void transition(Address peer, Fsm& fsm, State next);
    void settle(Fsm& fsm, bool ok);

    EventQueue& engine_;
    Tracer& tracer_;
    std::string node_, comp_, dif_name_, auth_;
    Duration timeout_;
    Address self_;
    Hooks hooks_;
    std::map<Address, Fsm> peers_;
};

// Link-state routing policy: flood own adjacency set, merge version-checked
// advertisements, run shortest-path with a lowest-address tie-break.
class Routing {
  public:
    struct Hooks {
        std::function<void(const LinkStateAd&, Address nbr)> send_update;
        std::function<void()> install;  // owner rebuilds the forwarding table
    };

    Routing(EventQueue& engine, Tracer& tracer, std::string node, std::string comp, Address self,
            Hooks hooks)
        : engine_(engine),
          tracer_(tracer),
          node_(std::move(node)),
          comp_(std::move(comp)),
          self_(self),
          hooks_(std::move(hooks)) {}

    // Adjacency toward an enrolled neighbor came up: advertise, sync the
    // whole database to the new neighbor, recompute.
    void neighbor_up(Address nbr, std::uint32_t metric);

    // Merge an incoming advertisement (stale versions ignored), re-flood to
    // every up neighbor except the sender, recompute. With no update this is
    // a pure recompute+install step.
    void step(const std::optional<LinkStateAd>& update, Address from);

    std::optional<Address> next_hop(Address dst) const;
    const std::map<Address, Address>& next_hops() const { return next_hops_; }
    const std::map<Address, std::uint64_t>& path_costs() const { return costs_; }
    const std::map<Address, LinkStateAd>& db() const { return db_; }

  private:
    void advertise();
    void flood(const LinkStateAd& lsa, std::optional<Address> except);
    void recompute();

    EventQueue& engine_;
    Tracer& tracer_;
    std::string node_, comp_;
    Address self_;
    Hooks hooks_;
    std::map<Address, std::uint32_t> adjacent_;  // up neighbors with metric
    std::map<Address, LinkStateAd> db_;
    std::uint64_t my_version_ = 0;
    std::map<Address, Address> next_hops_;
    std::map<Address, std::uint64_t> costs_;
};

// RIB daemon: sends and receives management messages on behalf of the other
// components. Management flows are per-peer records; PDUs to neighbors leave
// on the adjacency's (N-1) port, PDUs to distant peers follow the forwarding
// table like any other traffic.
class Ribd {
  public:
    struct Hooks {
        // Ensure an (N-1) flow toward this neighbor; cb gets its port or nullopt.
        std::function<void(Address, std::function<void(std::optional<PortIdValue>)>)> ensure_n1;
        std::function<std::optional<Address>(Address)> next_hop;
        std::function<bool(Address)> is_neighbor;
        // Hand a management PDU to the RMT; `direct_port` bypasses the table.
        std::function<void(Pdu, std::optional<PortIdValue>)> egress;
        std::function<void(const MgmtMessage&)> on_flow_msg;
        std::function<void(const MgmtMessage&)> on_mconnect;
        std::function<void(const MgmtMessage&)> on_mconnect_response;
        std::function<void(const LinkStateAd&, Address)> on_routing_update;
    };

    Ribd(EventQueue& engine, Tracer& tracer, std::string node, std::string comp, Address self,
         Hooks hooks)
        : engine_(engine),
          tracer_(tracer),
          node_(std::move(node)),
          comp_(std::move(comp)),
          self_(self),
          hooks_(std::move(hooks)) {}

    // Lazily creates the management flow to `peer` (bootstrapping the
    // (N-1) flow when needed); cb(true) once usable.
    void ensure_channel(Address peer, std::function<void(bool)> cb);
    bool has_channel(Address peer) const;

    // Throws SimError("NoManagementFlow...") when no channel exists and none
    // is being bootstrapped. Messages sent mid-bootstrap are queued.
    void send(MgmtMessage m);

    // Entry point for MGMT PDUs addressed to this IPCP.
    void deliver(const Pdu& pdu, PortIdValue ingress_port);

    std::size_t channel_count() const { return channels_.size(); }
    void drop_all_channels() { channels_.clear(); }

  private:
    struct Channel {
        enum class State { kBootstrapping, kUp } state = State::kBootstrapping;
        bool neighbor = false;
        PortIdValue port = 0;  // adjacency port when neighbor, else 0 (routed)
        std::vector<std::function<void(bool)>> waiters;
        std::vector<MgmtMessage> queued;
    };

    void channel_up(Address peer, Channel& ch);
    void transmit(const MgmtMessage& m, const Channel& ch);

    EventQueue& engine_;
    Tracer& tracer_;
    std::string node_, comp_;
    Address self_;
    Hooks hooks_;
    std::map<Address, Channel> channels_;
    std::uint64_t mgmt_seq_ = 1;
};

}  // namespace rina
