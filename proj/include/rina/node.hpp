#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rina/daf.hpp"
#include "rina/engine.hpp"
#include "rina/flow_alloc.hpp"
#include "rina/ids.hpp"
#include "rina/ipcp.hpp"
#include "rina/trace.hpp"

namespace rina {

enum class NodeKind { kHost, kInteriorRouter, kBorderRouter };

const char* to_string(NodeKind k);

// One computing system: a recursive stack of IPCPs plus, on hosts, the DAF
// side (application processes and the IRM). Port-ids are allocated here —
// they are unambiguous within the computing system, not per IPCP.
class Node {
  public:
    struct Binding {
        Ipcp* provider = nullptr;
        FlowUser user;
    };

    Node(EventQueue& engine, Tracer& tracer, Network& net, std::string name, NodeKind kind,
         std::uint32_t max_port_ids = 65535)
        : engine_(engine),
          tracer_(tracer),
          net_(net),
          name_(std::move(name)),
          kind_(kind),
          ports_(max_port_ids),
          irm_(net_, *this) {}
    ~Node();

    const std::string& name() const { return name_; }
    NodeKind kind() const { return kind_; }
    Irm& irm() { return irm_; }

    Ipcp& add_ipcp(const DifConfig& dif, const std::string& ipcp_name, Address address);
    AppEntity& add_app(std::unique_ptr<AppEntity> app);

    const std::vector<std::unique_ptr<Ipcp>>& ipcps() const { return ipcps_; }
    const std::vector<std::unique_ptr<AppEntity>>& apps() const { return apps_; }
    AppEntity* find_app(const Apn& apn);
    Ipcp* find_ipcp(const std::string& ipcp_name);
    // The IPCP named `apn` on this node whose stack sits directly above `lower`.
    Ipcp* find_ipcp_above(const Ipcp& lower, const Apn& apn);

    void set_stacking(const std::string& upper, const std::vector<std::string>& lowers);
    const std::vector<std::string>& lowers_of(const std::string& upper) const;

    PortIdValue alloc_port() { return ports_.allocate(); }
    void release_port(PortIdValue p) { ports_.release(p); }
    std::size_t live_port_count() const { return ports_.live_count(); }
    const IdPool& port_pool() const { return ports_; }

    void bind(PortIdValue port, Ipcp* provider, FlowUser user);
    void unbind(PortIdValue port);
    const Binding* binding(PortIdValue port) const;
    std::size_t binding_count() const { return bindings_.size(); }

    // Zero-delay intra-node handoffs: both directions cross the binding as
    // same-timestamp events so causality rides on the scheduler tie-break.
    void write_down(PortIdValue port, Sdu sdu);
    void deliver_up(PortIdValue port, Sdu sdu);

  private:
    EventQueue& engine_;
    Tracer& tracer_;
    Network& net_;
    std::string name_;
    NodeKind kind_;
    IdPool ports_;
    Irm irm_;
    std::vector<std::unique_ptr<Ipcp>> ipcps_;
    std::vector<std::unique_ptr<AppEntity>> apps_;
    std::map<PortIdValue, Binding> bindings_;
    std::map<std::string, std::vector<std::string>> stacking_;  // upper -> lowers
};

}  // namespace rina
