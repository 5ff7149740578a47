#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rina/efcp.hpp"
#include "rina/engine.hpp"
#include "rina/ids.hpp"
#include "rina/mgmt_msg.hpp"
#include "rina/pdu.hpp"
#include "rina/trace.hpp"

namespace rina {

class Ipcp;

enum class FaiState {
    kNull,
    kAllocPending,
    kNotifyPending,
    kAllocated,
    kDeallocPending,
    kDeallocated,
};

const char* to_string(FaiState s);

// The entity a flow serves: an application entity or the IPCP stacked above.
struct FlowUser {
    std::string label;
    std::function<bool(const FlowDescriptor&)> accept;  // responder-side query
    std::function<void(PortIdValue, const FlowDescriptor&)> on_allocated;
    std::function<void(PortIdValue, const Sdu&)> deliver;
    std::function<void(PortIdValue)> on_released;  // peer-initiated teardown
    std::function<void(PortIdValue)> on_error;     // EFCP R-bound exhausted
};

// Outcome of an allocate call.
struct AllocResult {
    std::optional<PortIdValue> port;  // set on success
    std::string error;                // NoQosCube | NoRoute | PeerDenied:... | Timeout | ...
    bool ok() const { return port.has_value(); }
};
using AllocCallback = std::function<void(const AllocResult&)>;

// Flow Allocator plus its per-flow instances. Each FAI owns the flow's EFCP
// instance while allocated; port-ids and CEP-ids are freed when it reaches
// DEALLOCATED, at which point the record itself is dropped.
class FlowAllocator {
  public:
    struct Fai {
        std::uint32_t fai_id = 0;
        Apn local_apn, remote_apn;
        PortIdValue port = 0;
        PortIdValue remote_port = 0;
        CepIdValue cep = 0;
        CepIdValue remote_cep = 0;
        Address remote_addr = 0;
        QosId cube_id = 0;
        FaiState state = FaiState::kNull;
        bool initiator = false;
        FlowUser user;
        AllocCallback result_cb;
        std::function<void()> dealloc_done_cb;
        EventHandle alloc_timeout;
        std::unique_ptr<Efcp> efcp;
        bool errored = false;
    };

    explicit FlowAllocator(Ipcp& ipcp) : ipcp_(ipcp) {}

    // Five-phase allocation entry point (initiator). Bootstraps the
    // management flow and enrollment toward the peer when missing, then has
    // the RIBd send the CreateFlowRequest. Returns the port-id assigned to
    // the pending flow, or nullopt when the request failed synchronously
    // (no cube, unresolvable destination).
    std::optional<PortIdValue> submit_allocate(FlowUser user, Apn local_apn, Apn remote_apn,
                                               const QosRequirements& reqs, AllocCallback cb);

    // Three-phase deallocation entry point. Throws SimError("NoSuchFlow...")
    // unless `port` names an ALLOCATED flow on this IPCP.
    void deallocate(PortIdValue port, std::function<void()> done = {});

    // RIBd dispatch for the four *Flow* management kinds.
    void on_flow_msg(const MgmtMessage& m);

    Fai* by_port(PortIdValue port);
    const std::map<PortIdValue, Fai>& fais() const { return fais_; }
    std::size_t live_count() const { return fais_.size(); }
    std::size_t efcp_count() const;
    std::vector<PortIdValue> allocated_initiator_ports() const;

    // Shutdown reclaim: releases every record still held (e.g. a responder
    // side whose peer timed out and can never run the delete exchange).
    void force_release_all();

    std::uint64_t flows_allocated = 0;
    std::uint64_t flows_deallocated = 0;

  private:
    void handle_create_request(const MgmtMessage& m);
    void handle_create_response(const MgmtMessage& m);
    void handle_delete_request(const MgmtMessage& m);
    void handle_delete_response(const MgmtMessage& m);

    Fai* by_descriptor(const FlowDescriptor& d);
    void transition(Fai& fai, FaiState next);
    void spawn_efcp(Fai& fai);
    void release_resources(Fai& fai);
    void finish_dealloc(Fai& fai);
    void fail_pending(Fai& fai, const std::string& error);
    void send_create_request(Fai& fai);
    void trace_unexpected(const MgmtMessage& m, const char* why);
    FlowDescriptor descriptor_for(const Fai& fai) const;

    Ipcp& ipcp_;
    std::map<PortIdValue, Fai> fais_;
    std::uint32_t next_fai_id_ = 1;
};

// Resource Allocator: provisions and caches (N-1) flows per peer, parks PDUs
// whose next-hop flow is still pending, and tracks RMT queue occupancy.
class ResourceAllocator {
  public:
    struct N1Flow {
        Address peer = 0;
        QosId qos_key = kMgmtQosId;
        enum class State { kPending, kUp } state = State::kPending;
        PortIdValue port = 0;
        std::vector<std::function<void(std::optional<PortIdValue>)>> waiters;
    };

    explicit ResourceAllocator(Ipcp& ipcp) : ipcp_(ipcp) {}

    // Returns an existing matching (N-1) flow or recursively allocates one in
    // the layer below; the recursion terminates at the medium, where
    // allocation is inherent and completes at the same timestamp.
    void get_or_allocate(Address peer, std::function<void(std::optional<PortIdValue>)> cb);

    // Responder-side registration: an (N-1) flow allocated by `peer` is up.
    void register_upflow(Address peer, PortIdValue port);

    // A PDU that must wait for its next-hop (N-1) flow.
    void park_pdu(Address next_hop, Pdu pdu);

    void on_n1_down(PortIdValue port);
    std::optional<PortIdValue> port_to(Address peer) const;
    const std::map<std::pair<Address, QosId>, N1Flow>& flows() const { return flows_; }

    void on_queue_occupancy(PortIdValue port, int dir, std::size_t len);
    std::size_t peak_queue_len() const { return peak_queue_len_; }

  private:
    void flow_is_up(N1Flow& f);

    Ipcp& ipcp_;
    std::map<std::pair<Address, QosId>, N1Flow> flows_;
    std::map<Address, std::vector<Pdu>> parked_;
    std::size_t peak_queue_len_ = 0;
};

}  // namespace rina
