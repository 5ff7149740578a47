#include "rina/ipcp.hpp"

#include <cstdio>

#include "rina/error.hpp"
#include "rina/network.hpp"
#include "rina/node.hpp"

namespace rina {

Ipcp::Ipcp(EventQueue& engine, Tracer& tracer, Network& net, Node& node, std::string name,
           const DifConfig& dif, Address address)
    : engine_(engine),
      tracer_(tracer),
      net_(net),
      node_(node),
      name_(std::move(name)),
      dif_(dif),
      address_(address),
      ceps_(65535),
      rmt_(engine, tracer, node.name(), name_ + ".rmt", dif.queue_capacity),
      fa_(*this),
      ra_(*this),
      ribd_(engine, tracer, node.name(), name_ + ".ribd", address,
            Ribd::Hooks{
                [this](Address hop, std::function<void(std::optional<PortIdValue>)> cb) {
                    ra_.get_or_allocate(hop, std::move(cb));
                },
                [this](Address dst) { return routing_->next_hop(dst); },
                [this](Address a) { return is_neighbor(a); },
                [this](Pdu p, std::optional<PortIdValue> direct) {
                    rmt_egress(std::move(p), direct);
                },
                [this](const MgmtMessage& m) { fa_.on_flow_msg(m); },
                [this](const MgmtMessage& m) { enroll_->on_mconnect(m); },
                [this](const MgmtMessage& m) { enroll_->on_mconnect_response(m); },
                [this](const LinkStateAd& lsa, Address from) { routing_->step(lsa, from); },
            }) {
    enroll_ = std::make_unique<EnrollmentManager>(
        engine, tracer, node_.name(), name_ + ".enroll", dif_.name, dif_.auth,
        dif_.enroll_timeout, address_,
        EnrollmentManager::Hooks{
            [this](MgmtMessage m) { ribd_.send(std::move(m)); },
            [this](Address peer) {
                auto it = neighbors_.find(peer);
                if (it != neighbors_.end()) routing_->neighbor_up(peer, it->second.metric);
            },
        });
    routing_ = std::make_unique<Routing>(
        engine, tracer, node_.name(), name_ + ".routing", address_,
        Routing::Hooks{
            [this](const LinkStateAd& lsa, Address nbr) {
                MgmtMessage m;
                m.kind = MgmtKind::kRoutingUpdate;
                m.src_addr = address_;
                m.dst_addr = nbr;
                m.lsa = lsa;
                ribd_.send(std::move(m));
            },
            [this]() { install_routes(); },
        });
    rmt_.on_ingress = [this](Pdu p, PortIdValue port) { rmt_ingress(std::move(p), port); };
    rmt_.on_occupancy = [this](PortIdValue port, Rmt::Dir dir, std::size_t len) {
        ra_.on_queue_occupancy(port, dir == Rmt::Dir::kIn ? 0 : 1, len);
    };
}

void Ipcp::add_neighbor(Address peer, NeighborPath path) {
    neighbors_[peer] = std::move(path);
}

void Ipcp::add_link_port(PortIdValue port, std::size_t link_id, int end) {
    link_ports_.push_back(port);
    link_port_by_id_[link_id] = port;
    rmt_.add_port(port, [this, link_id, end](Pdu p) {
        return net_.medium().transmit(link_id, end, std::move(p));
    });
}

void Ipcp::add_lower_port(PortIdValue port) {
    if (rmt_.has_port(port)) return;
    rmt_.add_port(port, [this, port](Pdu p) { return transmit_on_lower(port, std::move(p)); });
}

std::optional<PortIdValue> Ipcp::link_port_for(std::size_t link_id) const {
    auto it = link_port_by_id_.find(link_id);
    if (it == link_port_by_id_.end()) return std::nullopt;
    return it->second;
}

Duration Ipcp::transmit_on_lower(PortIdValue port, Pdu pdu) {
    node_.write_down(port, rmt_mux(pdu));
    return 0;  // inner interconnections are zero-delay; pacing happens at rank 0
}

void Ipcp::bootstrap_neighbor(Address peer) {
    ribd_.ensure_channel(peer, [this, peer](bool ok) {
        if (!ok) return;
        enroll_->ensure_enrolled(peer, [](bool) {});
    });
}

void Ipcp::user_write(PortIdValue port, const Sdu& sdu) {
    FlowAllocator::Fai* fai = fa_.by_port(port);
    if (fai && fai->state == FaiState::kDeallocPending) {
        tracer_.emit(engine_.now(), node_.name(), name_ + ".fa", "WRITE_IGNORED",
                     {{"port", std::to_string(port)}, {"reason", "dealloc-pending"}});
        return;
    }
    if (!fai || fai->state != FaiState::kAllocated || !fai->efcp) {
        throw SimError("FlowNotAllocated: write on port " + std::to_string(port) + " of " +
                       name_);
    }
    fai->efcp->send_sdu(sdu);
}

void Ipcp::on_lower_sdu(PortIdValue port, const Sdu& bytes) {
    Pdu pdu;
    try {
        pdu = rmt_demux(bytes);
    } catch (const SimError& e) {
        tracer_.emit(engine_.now(), node_.name(), name_ + ".rmt", "RMT_PARSE_DROP",
                     {{"reason", e.what()}});
        return;
    }
    if (!rmt_.has_port(port)) return;  // flow torn down with bytes in flight
    rmt_.enqueue(std::move(pdu), port, Rmt::Dir::kIn);
}

void Ipcp::on_medium_pdu(PortIdValue link_port, Pdu pdu) {
    rmt_.enqueue(std::move(pdu), link_port, Rmt::Dir::kIn);
}

void Ipcp::rmt_egress(Pdu pdu, std::optional<PortIdValue> direct_port) {
    if (direct_port) {
        if (rmt_.has_port(*direct_port)) {
            rmt_.enqueue(std::move(pdu), *direct_port, Rmt::Dir::kOut);
        } else {
            ++no_route_drops;
            tracer_.emit(engine_.now(), node_.name(), name_ + ".rmt", "RMT_NO_ROUTE",
                         {{"dst", std::to_string(pdu.dst_addr)},
                          {"qos", std::to_string(pdu.qos_id)},
                          {"reason", "port-gone"}});
        }
        return;
    }
    if (auto port = rmt_.forward(pdu)) {
        if (rmt_.has_port(*port)) {
            rmt_.enqueue(std::move(pdu), *port, Rmt::Dir::kOut);
        } else {
            ++no_route_drops;
            tracer_.emit(engine_.now(), node_.name(), name_ + ".rmt", "RMT_NO_ROUTE",
                         {{"dst", std::to_string(pdu.dst_addr)},
                          {"qos", std::to_string(pdu.qos_id)},
                          {"reason", "port-gone"}});
        }
        return;
    }
    // Route known but the (N-1) flow is not up yet: park the PDU with the RA,
    // which triggers the recursive allocation.
    std::optional<Address> nh = routing_->next_hop(pdu.dst_addr);
    if (!nh && is_neighbor(pdu.dst_addr)) nh = pdu.dst_addr;
    if (nh) {
        ra_.park_pdu(*nh, std::move(pdu));
        return;
    }
    ++no_route_drops;
    tracer_.emit(engine_.now(), node_.name(), name_ + ".rmt", "RMT_NO_ROUTE",
                 {{"dst", std::to_string(pdu.dst_addr)},
                  {"qos", std::to_string(pdu.qos_id)},
                  {"reason", "no-route"}});
}

void Ipcp::rmt_ingress(Pdu pdu, PortIdValue in_port) {
    if (pdu.dst_addr == address_) {
        if (pdu.kind == PduKind::kMgmt) {
            ribd_.deliver(pdu, in_port);
            return;
        }
        auto it = efcp_by_cep_.find(pdu.dst_cep);
        if (it == efcp_by_cep_.end()) {
            tracer_.emit(engine_.now(), node_.name(), name_ + ".efcp", "EFCP_UNKNOWN_CEP",
                         {{"cid", pdu.connection_id().str()},
                          {"kind", to_string(pdu.kind)},
                          {"seq", std::to_string(pdu.seq)}});
            return;
        }
        it->second->receive(pdu);
        return;
    }
    // Relaying: stateless, no EFCP state is touched.
    rmt_egress(std::move(pdu));
}

std::optional<FlowUser> Ipcp::find_local_user(const Apn& dst_apn, const Apn& remote_apn) {
    if (AppEntity* app = node_.find_app(dst_apn)) {
        return app->flow_user();
    }
    if (Ipcp* upper = node_.find_ipcp_above(*this, dst_apn)) {
        return upper->n1_flow_user(remote_apn);
    }
    return std::nullopt;
}

FlowUser Ipcp::n1_flow_user(const Apn& peer_upper_apn) {
    FlowUser u;
    u.label = "ipcp:" + name_;
    u.accept = [](const FlowDescriptor&) { return true; };
    u.on_allocated = [this, peer_upper_apn](PortIdValue port, const FlowDescriptor&) {
        const auto* rec = net_.ipcp_record(peer_upper_apn.name);
        if (rec) ra_.register_upflow(rec->address, port);
    };
    u.deliver = [this](PortIdValue port, const Sdu& sdu) { on_lower_sdu(port, sdu); };
    u.on_released = [this](PortIdValue port) { ra_.on_n1_down(port); };
    u.on_error = [this](PortIdValue port) {
        tracer_.emit(engine_.now(), node_.name(), name_ + ".ra", "RA_N1_ERROR",
                     {{"port", std::to_string(port)}});
    };
    return u;
}

void Ipcp::install_routes() {
    auto& table = rmt_.table();
    table.entries.clear();
    for (const auto& [dst, nh] : routing_->next_hops()) {
        auto port = ra_.port_to(nh);
        if (!port) continue;
        table.entries[{dst, kMgmtQosId}] = *port;
        for (const auto& cube : dif_.cubes) {
            table.entries[{dst, cube.id}] = *port;
        }
    }
    char digest[20];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(table.digest()));
    tracer_.emit(engine_.now(), node_.name(), name_ + ".routing", "ROUTING_INSTALL",
                 {{"entries", std::to_string(table.entries.size())}, {"digest", digest}});
}

}  // namespace rina
