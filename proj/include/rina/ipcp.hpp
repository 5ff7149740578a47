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
#include "rina/flow_alloc.hpp"
#include "rina/ids.hpp"
#include "rina/mgmt.hpp"
#include "rina/pdu.hpp"
#include "rina/rmt.hpp"
#include "rina/trace.hpp"

namespace rina {

class Network;
class Node;

// Per-DIF configuration shared by every member IPCP.
struct DifConfig {
    std::string name;
    int rank = 0;
    DeltaTParams timers;
    Duration rto = 0;
    Duration allocate_timeout = 0;
    Duration enroll_timeout = 0;
    std::size_t queue_capacity = 64;
    std::size_t max_pdu_payload = 1024;
    std::string auth;
    std::string routing_policy = "link-state";
    std::string scheduling_policy = "fifo";
    std::vector<QosCube> cubes;

    const QosCube* cube(QosId id) const {
        for (const auto& c : cubes) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }
};

// How an IPCP reaches one derived neighbor in its DIF: either a physical
// link (rank 0) or an (N-1) flow allocated through a lower IPCP.
struct NeighborPath {
    std::uint32_t metric = 1;
    bool via_medium = false;
    std::size_t link_id = 0;  // via_medium
    int link_end = 0;         // via_medium
    Ipcp* lower_ipcp = nullptr;  // !via_medium
    Apn peer_apn;                // !via_medium: the peer IPCP's own name
};

// One IPC process: the DIF-membership instance holding FA, RA, RMT, RIBd,
// enrollment, routing and the per-flow EFCP instances.
class Ipcp {
  public:
    Ipcp(EventQueue& engine, Tracer& tracer, Network& net, Node& node, std::string name,
         const DifConfig& dif, Address address);

    const std::string& name() const { return name_; }
    Apn apn() const { return Apn{name_, ""}; }
    Address address() const { return address_; }
    const DifConfig& dif() const { return dif_; }
    Node& node() { return node_; }
    Network& net() { return net_; }
    EventQueue& engine() { return engine_; }
    Tracer& tracer() { return tracer_; }

    FlowAllocator& fa() { return fa_; }
    ResourceAllocator& ra() { return ra_; }
    Rmt& rmt() { return rmt_; }
    Ribd& ribd() { return ribd_; }
    EnrollmentManager& enroll() { return *enroll_; }
    Routing& routing() { return *routing_; }

    // --- build-time wiring
    void add_neighbor(Address peer, NeighborPath path);
    void add_link_port(PortIdValue port, std::size_t link_id, int end);
    // RMT port over an (N-1) flow; egress serializes onto the lower flow.
    void add_lower_port(PortIdValue port);
    std::optional<PortIdValue> link_port_for(std::size_t link_id) const;
    const std::map<Address, NeighborPath>& neighbors() const { return neighbors_; }
    const std::vector<PortIdValue>& link_ports() const { return link_ports_; }
    bool is_neighbor(Address a) const { return neighbors_.count(a) > 0; }

    // --- control plane
    void bootstrap_neighbor(Address peer);

    // --- data plane
    void user_write(PortIdValue port, const Sdu& sdu);      // (N+1) writes down
    void on_lower_sdu(PortIdValue port, const Sdu& bytes);  // (N-1) delivers up
    void on_medium_pdu(PortIdValue link_port, Pdu pdu);     // rank-0 arrivals
    void rmt_egress(Pdu pdu, std::optional<PortIdValue> direct_port = std::nullopt);
    void rmt_ingress(Pdu pdu, PortIdValue in_port);

    // --- services used by FA/RA
    CepIdValue alloc_cep() { return ceps_.allocate(); }
    void release_cep(CepIdValue c) { ceps_.release(c); }
    std::size_t live_cep_count() const { return ceps_.live_count(); }
    void register_efcp(CepIdValue cep, Efcp* e) { efcp_by_cep_[cep] = e; }
    void unregister_efcp(CepIdValue cep) { efcp_by_cep_.erase(cep); }
    std::size_t efcp_count() const { return efcp_by_cep_.size(); }

    std::optional<FlowUser> find_local_user(const Apn& dst_apn, const Apn& remote_apn);
    FlowUser n1_flow_user(const Apn& peer_upper_apn);

    // Rebuilds the forwarding table from routing next-hops and live (N-1)
    // ports; every configured qos id (plus the management id) maps alike.
    void install_routes();

    std::uint64_t no_route_drops = 0;

  private:
    Duration transmit_on_link(std::size_t link_id, int end, Pdu pdu);
    Duration transmit_on_lower(PortIdValue port, Pdu pdu);

    EventQueue& engine_;
    Tracer& tracer_;
    Network& net_;
    Node& node_;
    std::string name_;
    const DifConfig& dif_;
    Address address_;

    IdPool ceps_;
    std::map<CepIdValue, Efcp*> efcp_by_cep_;
    std::map<Address, NeighborPath> neighbors_;
    std::vector<PortIdValue> link_ports_;
    std::map<std::size_t, PortIdValue> link_port_by_id_;

    Rmt rmt_;
    FlowAllocator fa_;
    ResourceAllocator ra_;
    Ribd ribd_;
    std::unique_ptr<EnrollmentManager> enroll_;
    std::unique_ptr<Routing> routing_;
};

}  // namespace rina
