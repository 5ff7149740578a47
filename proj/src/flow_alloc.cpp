#include "rina/flow_alloc.hpp"

#include "rina/error.hpp"
#include "rina/ipcp.hpp"
#include "rina/network.hpp"
#include "rina/node.hpp"

namespace rina {

const char* to_string(FaiState s) {
    switch (s) {
        case FaiState::kNull: return "NULL";
        case FaiState::kAllocPending: return "ALLOC_PENDING";
        case FaiState::kNotifyPending: return "NOTIFY_PENDING";
        case FaiState::kAllocated: return "ALLOCATED";
        case FaiState::kDeallocPending: return "DEALLOC_PENDING";
        case FaiState::kDeallocated: return "DEALLOCATED";
    }
    return "?";
}

// ------------------------------------------------------------- FlowAllocator

void FlowAllocator::transition(Fai& fai, FaiState next) {
    const FaiState old = fai.state;
    fai.state = next;
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "FAI_STATE",
                        {{"fai", std::to_string(fai.fai_id)},
                         {"old", to_string(old)},
                         {"new", to_string(next)},
                         {"port", std::to_string(fai.port)}});
}

std::size_t FlowAllocator::efcp_count() const {
    std::size_t n = 0;
    for (const auto& [port, fai] : fais_) {
        if (fai.efcp) ++n;
    }
    return n;
}

void FlowAllocator::force_release_all() {
    while (!fais_.empty()) {
        Fai& fai = fais_.begin()->second;
        const PortIdValue port = fai.port;
        ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                            "FA_FORCE_RELEASE",
                            {{"port", std::to_string(port)},
                             {"state", to_string(fai.state)}});
        if (fai.user.on_released) fai.user.on_released(port);
        release_resources(fai);
        transition(fai, FaiState::kDeallocated);
        ++flows_deallocated;
        fais_.erase(port);
    }
}

std::vector<PortIdValue> FlowAllocator::allocated_initiator_ports() const {
    std::vector<PortIdValue> out;
    for (const auto& [port, fai] : fais_) {
        if (fai.initiator && fai.state == FaiState::kAllocated) out.push_back(port);
    }
    return out;
}

FlowAllocator::Fai* FlowAllocator::by_port(PortIdValue port) {
    auto it = fais_.find(port);
    return it == fais_.end() ? nullptr : &it->second;
}

FlowAllocator::Fai* FlowAllocator::by_descriptor(const FlowDescriptor& d) {
    const PortIdValue mine = d.src_addr == ipcp_.address() ? d.src_port : d.dst_port;
    return by_port(mine);
}

FlowDescriptor FlowAllocator::descriptor_for(const Fai& fai) const {
    FlowDescriptor d;
    if (fai.initiator) {
        d.src_apn = fai.local_apn;
        d.dst_apn = fai.remote_apn;
        d.src_addr = ipcp_.address();
        d.dst_addr = fai.remote_addr;
        d.src_port = fai.port;
        d.dst_port = fai.remote_port;
        d.src_cep = fai.cep;
        d.dst_cep = fai.remote_cep;
    } else {
        d.src_apn = fai.remote_apn;
        d.dst_apn = fai.local_apn;
        d.src_addr = fai.remote_addr;
        d.dst_addr = ipcp_.address();
        d.src_port = fai.remote_port;
        d.dst_port = fai.port;
        d.src_cep = fai.remote_cep;
        d.dst_cep = fai.cep;
    }
    d.qos_id = fai.cube_id;
    return d;
}

void FlowAllocator::spawn_efcp(Fai& fai) {
    const QosCube* cube = ipcp_.dif().cube(fai.cube_id);
    EfcpConfig cfg;
    cfg.timers = ipcp_.dif().timers;
    cfg.rto = ipcp_.dif().rto;
    cfg.max_pdu_payload = ipcp_.dif().max_pdu_payload;
    if (cube) {
        cfg.reliable = cube->reliable;
        cfg.ordered = cube->ordered;
        cfg.rate_limit_bps = cube->avg_bandwidth;
    }
    const PortIdValue port = fai.port;
    Efcp::Hooks hooks;
    hooks.emit = [this](Pdu p) { ipcp_.rmt_egress(std::move(p)); };
    hooks.deliver = [this, port](Sdu sdu) { ipcp_.node().deliver_up(port, std::move(sdu)); };
    hooks.flow_error = [this, port](std::uint64_t) {
        Fai* f = by_port(port);
        if (!f) return;
        f->errored = true;
        if (f->user.on_error) f->user.on_error(port);
    };
    fai.efcp = std::make_unique<Efcp>(ipcp_.engine(), ipcp_.tracer(), ipcp_.node().name(),
                                      ipcp_.name() + ".efcp", ipcp_.address(), fai.remote_addr,
                                      fai.cep, fai.cube_id, cfg, std::move(hooks));
    if (fai.remote_cep != 0) fai.efcp->set_remote_cep(fai.remote_cep);
    ipcp_.register_efcp(fai.cep, fai.efcp.get());
}

void FlowAllocator::release_resources(Fai& fai) {
    if (fai.alloc_timeout.valid()) {
        ipcp_.engine().cancel(fai.alloc_timeout);
        fai.alloc_timeout = {};
    }
    if (fai.efcp) {
        fai.efcp->close();
        ipcp_.unregister_efcp(fai.cep);
        fai.efcp.reset();
    }
    if (fai.port != 0) {
        if (ipcp_.node().binding(fai.port)) ipcp_.node().unbind(fai.port);
        ipcp_.node().release_port(fai.port);
        ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                            "PORT_FREE", {{"port", std::to_string(fai.port)}});
    }
    if (fai.cep != 0) ipcp_.release_cep(fai.cep);
}

void FlowAllocator::fail_pending(Fai& fai, const std::string& error) {
    AllocCallback cb = std::move(fai.result_cb);
    const PortIdValue port = fai.port;
    release_resources(fai);
    transition(fai, FaiState::kDeallocated);
    fais_.erase(port);
    if (cb) cb(AllocResult{std::nullopt, error});
}

std::optional<PortIdValue> FlowAllocator::submit_allocate(FlowUser user, Apn local_apn,
                                                          Apn remote_apn,
                                                          const QosRequirements& reqs,
                                                          AllocCallback cb) {
    auto cube = select_qos_cube(reqs, ipcp_.dif().cubes);
    if (!cube) {
        cb(AllocResult{std::nullopt, "NoQosCube"});
        return std::nullopt;
    }
    auto remote = ipcp_.net().resolve_dst(remote_apn, ipcp_.dif().name);
    if (!remote) {
        cb(AllocResult{std::nullopt, "NoRoute:unresolved-destination"});
        return std::nullopt;
    }
    for (const auto& [p, f] : fais_) {
        if (f.state == FaiState::kAllocPending && f.local_apn == local_apn &&
            f.remote_apn == remote_apn && f.cube_id == *cube) {
            throw SimError("DuplicatePendingRequest: " + local_apn.full() + " -> " +
                           remote_apn.full());
        }
    }

    const PortIdValue port = ipcp_.node().alloc_port();
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "PORT_ALLOC",
                        {{"port", std::to_string(port)}, {"user", user.label}});
    Fai& fai = fais_[port];
    fai.fai_id = next_fai_id_++;
    fai.local_apn = std::move(local_apn);
    fai.remote_apn = std::move(remote_apn);
    fai.port = port;
    fai.cep = ipcp_.alloc_cep();
    fai.remote_addr = *remote;
    fai.cube_id = *cube;
    fai.initiator = true;
    fai.user = std::move(user);
    fai.result_cb = std::move(cb);
    transition(fai, FaiState::kAllocPending);
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "FA_ALLOC_REQ",
                        {{"src", fai.local_apn.full()},
                         {"dst", fai.remote_apn.full()},
                         {"qos", std::to_string(fai.cube_id)},
                         {"port", std::to_string(port)},
                         {"dif", ipcp_.dif().name}});
    spawn_efcp(fai);

    fai.alloc_timeout = ipcp_.engine().schedule_in(ipcp_.dif().allocate_timeout, [this, port] {
        Fai* f = by_port(port);
        if (f && f->state == FaiState::kAllocPending) {
            f->alloc_timeout = {};
            fail_pending(*f, "Timeout");
        }
    });

    const Address peer = *remote;
    // Phases 1-3: bootstrap the management flow and enrollment toward the
    // peer when they do not exist yet, then hand the CreateFlowRequest to
    // the RIBd.
    ipcp_.ribd().ensure_channel(peer, [this, port, peer](bool ok) {
        Fai* f = by_port(port);
        if (!f || f->state != FaiState::kAllocPending) return;
        if (!ok) {
            fail_pending(*f, "NoRoute:mgmt-bootstrap-failed");
            return;
        }
        ipcp_.enroll().ensure_enrolled(peer, [this, port](bool enrolled) {
            Fai* f2 = by_port(port);
            if (!f2 || f2->state != FaiState::kAllocPending) return;
            if (!enrolled) {
                fail_pending(*f2, "EnrollmentFailed");
                return;
            }
            send_create_request(*f2);
        });
    });
    return port;
}

void FlowAllocator::send_create_request(Fai& fai) {
    MgmtMessage m;
    m.kind = MgmtKind::kCreateFlowRequest;
    m.src_addr = ipcp_.address();
    m.dst_addr = fai.remote_addr;
    m.flow = descriptor_for(fai);
    ipcp_.ribd().send(std::move(m));
}

void FlowAllocator::on_flow_msg(const MgmtMessage& m) {
    switch (m.kind) {
        case MgmtKind::kCreateFlowRequest: handle_create_request(m); return;
        case MgmtKind::kCreateFlowResponse: handle_create_response(m); return;
        case MgmtKind::kDeleteFlowRequest: handle_delete_request(m); return;
        case MgmtKind::kDeleteFlowResponse: handle_delete_response(m); return;
        default: return;
    }
}

void FlowAllocator::trace_unexpected(const MgmtMessage& m, const char* why) {
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "FA_UNEXPECTED_MSG",
                        {{"kind", rina::to_string(m.kind)}, {"why", why}});
}

void FlowAllocator::handle_create_request(const MgmtMessage& m) {
    const FlowDescriptor& d = m.flow;
    auto negative = [this, &m, &d](const std::string& reason) {
        MgmtMessage r;
        r.kind = MgmtKind::kCreateFlowResponse;
        r.src_addr = ipcp_.address();
        r.dst_addr = m.src_addr;
        r.result_positive = false;
        r.reason = reason;
        r.flow = d;
        ipcp_.ribd().send(std::move(r));
    };

    auto user = ipcp_.find_local_user(d.dst_apn, d.src_apn);
    if (!user) {
        negative("UnknownDestinationApn");
        return;
    }

    Fai fai;
    fai.fai_id = next_fai_id_++;
    fai.local_apn = d.dst_apn;
    fai.remote_apn = d.src_apn;
    fai.remote_addr = d.src_addr;
    fai.remote_port = d.src_port;
    fai.remote_cep = d.src_cep;
    fai.cube_id = d.qos_id;
    fai.initiator = false;
    fai.user = std::move(*user);
    transition(fai, FaiState::kNotifyPending);

    // The destination AP is queried before anything is retained.
    if (fai.user.accept && !fai.user.accept(d)) {
        transition(fai, FaiState::kDeallocated);
        negative("denied");
        return;
    }

    fai.port = ipcp_.node().alloc_port();
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "PORT_ALLOC",
                        {{"port", std::to_string(fai.port)}, {"user", fai.user.label}});
    fai.cep = ipcp_.alloc_cep();
    auto [it, inserted] = fais_.emplace(fai.port, std::move(fai));
    Fai& rec = it->second;
    spawn_efcp(rec);
    ipcp_.node().bind(rec.port, &ipcp_, rec.user);
    transition(rec, FaiState::kAllocated);
    ++flows_allocated;

    const FlowDescriptor filled = descriptor_for(rec);
    MgmtMessage resp;
    resp.kind = MgmtKind::kCreateFlowResponse;
    resp.src_addr = ipcp_.address();
    resp.dst_addr = m.src_addr;
    resp.result_positive = true;
    resp.flow = filled;
    ipcp_.ribd().send(std::move(resp));
    if (rec.user.on_allocated) rec.user.on_allocated(rec.port, filled);
}

void FlowAllocator::handle_create_response(const MgmtMessage& m) {
    Fai* fai = by_descriptor(m.flow);
    if (!fai || !fai->initiator || fai->state != FaiState::kAllocPending) {
        trace_unexpected(m, "no-matching-pending-fai");
        return;
    }
    if (fai->alloc_timeout.valid()) {
        ipcp_.engine().cancel(fai->alloc_timeout);
        fai->alloc_timeout = {};
    }
    if (!m.result_positive) {
        fail_pending(*fai, "PeerDenied:" + m.reason);
        return;
    }
    fai->remote_port = m.flow.dst_port;
    fai->remote_cep = m.flow.dst_cep;
    fai->efcp->set_remote_cep(fai->remote_cep);
    ipcp_.node().bind(fai->port, &ipcp_, fai->user);
    transition(*fai, FaiState::kAllocated);
    ++flows_allocated;
    if (fai->result_cb) {
        AllocCallback cb = std::move(fai->result_cb);
        cb(AllocResult{fai->port, ""});
    }
}

void FlowAllocator::deallocate(PortIdValue port, std::function<void()> done) {
    Fai* fai = by_port(port);
    if (!fai || fai->state != FaiState::kAllocated) {
        throw SimError("NoSuchFlow: port " + std::to_string(port) + " on " + ipcp_.name());
    }
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".fa",
                        "FA_DEALLOC",
                        {{"port", std::to_string(port)}, {"dif", ipcp_.dif().name}});
    fai->dealloc_done_cb = std::move(done);
    transition(*fai, FaiState::kDeallocPending);
    MgmtMessage m;
    m.kind = MgmtKind::kDeleteFlowRequest;
    m.src_addr = ipcp_.address();
    m.dst_addr = fai->remote_addr;
    m.flow = descriptor_for(*fai);
    ipcp_.ribd().send(std::move(m));
}

void FlowAllocator::handle_delete_request(const MgmtMessage& m) {
    Fai* fai = by_descriptor(m.flow);
    if (!fai || fai->state != FaiState::kAllocated) {
        trace_unexpected(m, "no-matching-allocated-fai");
        return;
    }
    // Peer-side teardown: notify the user, remove the EFCP instance and the
    // bindings, then acknowledge.
    if (fai->user.on_released) fai->user.on_released(fai->port);
    const PortIdValue port = fai->port;
    release_resources(*fai);
    transition(*fai, FaiState::kDeallocated);
    ++flows_deallocated;
    fais_.erase(port);

    MgmtMessage resp;
    resp.kind = MgmtKind::kDeleteFlowResponse;
    resp.src_addr = ipcp_.address();
    resp.dst_addr = m.src_addr;
    resp.result_positive = true;
    resp.flow = m.flow;
    ipcp_.ribd().send(std::move(resp));
}

void FlowAllocator::handle_delete_response(const MgmtMessage& m) {
    Fai* fai = by_descriptor(m.flow);
    if (!fai || fai->state != FaiState::kDeallocPending) {
        trace_unexpected(m, "no-matching-dealloc-pending-fai");
        return;
    }
    auto done = std::move(fai->dealloc_done_cb);
    const PortIdValue port = fai->port;
    release_resources(*fai);
    transition(*fai, FaiState::kDeallocated);
    ++flows_deallocated;
    fais_.erase(port);
    if (done) done();
}

// --------------------------------------------------------- ResourceAllocator

std::optional<PortIdValue> ResourceAllocator::port_to(Address peer) const {
    auto it = flows_.find({peer, kMgmtQosId});
    if (it == flows_.end() || it->second.state != N1Flow::State::kUp) return std::nullopt;
    return it->second.port;
}

void ResourceAllocator::flow_is_up(N1Flow& f) {
    auto parked = parked_.find(f.peer);
    if (parked != parked_.end()) {
        auto pdus = std::move(parked->second);
        parked_.erase(parked);
        for (auto& p : pdus) ipcp_.rmt_egress(std::move(p));
    }
    auto waiters = std::move(f.waiters);
    f.waiters.clear();
    for (auto& cb : waiters) cb(f.port);
}

void ResourceAllocator::get_or_allocate(Address peer,
                                        std::function<void(std::optional<PortIdValue>)> cb) {
    const auto key = std::make_pair(peer, kMgmtQosId);
    auto it = flows_.find(key);
    if (it != flows_.end()) {
        if (it->second.state == N1Flow::State::kUp) {
            cb(it->second.port);  // cache hit, no new allocation messages
        } else {
            it->second.waiters.push_back(std::move(cb));
        }
        return;
    }
    auto nb = ipcp_.neighbors().find(peer);
    if (nb == ipcp_.neighbors().end()) {
        cb(std::nullopt);
        return;
    }
    const NeighborPath& path = nb->second;
    N1Flow& f = flows_[key];
    f.peer = peer;
    f.waiters.push_back(std::move(cb));

    Tracer& tr = ipcp_.tracer();
    const std::string comp = ipcp_.name() + ".ra";
    tr.emit(ipcp_.engine().now(), ipcp_.node().name(), comp, "RA_N1_ALLOC",
            {{"peer", std::to_string(peer)},
             {"qos", std::to_string(kMgmtQosId)},
             {"phase", "request"},
             {"via", path.via_medium ? "medium" : path.lower_ipcp->dif().name},
             {"dif", ipcp_.dif().name}});

    if (path.via_medium) {
        // Allocation on the medium is inherent: it succeeds at the same
        // timestamp and terminates the recursive descent.
        Medium& medium = ipcp_.net().medium();
        const auto& link = medium.link(path.link_id);
        medium.allocate(link.ends[path.link_end], link.ends[1 - path.link_end]);
        auto port = ipcp_.link_port_for(path.link_id);
        f.port = port.value();
        f.state = N1Flow::State::kUp;
        tr.emit(ipcp_.engine().now(), ipcp_.node().name(), comp, "RA_N1_ALLOC",
                {{"peer", std::to_string(peer)},
                 {"qos", std::to_string(kMgmtQosId)},
                 {"phase", "up"},
                 {"via", "medium"},
                 {"port", std::to_string(f.port)},
                 {"dif", ipcp_.dif().name}});
        ipcp_.install_routes();
        flow_is_up(f);
        return;
    }

    // Recursive descent: allocate a flow to the peer IPCP in the DIF below.
    QosRequirements reqs;
    reqs.reliable = true;
    reqs.ordered = true;
    FlowUser user = ipcp_.n1_flow_user(path.peer_apn);
    path.lower_ipcp->fa().submit_allocate(
        std::move(user), ipcp_.apn(), path.peer_apn, reqs,
        [this, key, peer, comp](const AllocResult& r) {
            auto fit = flows_.find(key);
            if (fit == flows_.end()) return;
            N1Flow& flow = fit->second;
            if (!r.ok()) {
                auto waiters = std::move(flow.waiters);
                flows_.erase(fit);
                auto parked = parked_.find(peer);
                if (parked != parked_.end()) {
                    for (const auto& p : parked->second) {
                        ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(),
                                            ipcp_.name() + ".rmt", "RMT_NO_ROUTE",
                                            {{"dst", std::to_string(p.dst_addr)},
                                             {"qos", std::to_string(p.qos_id)},
                                             {"reason", "n1-alloc-failed"}});
                        ++ipcp_.no_route_drops;
                    }
                    parked_.erase(parked);
                }
                for (auto& w : waiters) w(std::nullopt);
                return;
            }
            flow.port = *r.port;
            flow.state = N1Flow::State::kUp;
            ipcp_.add_lower_port(flow.port);
            ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), comp, "RA_N1_ALLOC",
                                {{"peer", std::to_string(peer)},
                                 {"qos", std::to_string(kMgmtQosId)},
                                 {"phase", "up"},
                                 {"via", "lower"},
                                 {"port", std::to_string(flow.port)},
                                 {"dif", ipcp_.dif().name}});
            ipcp_.install_routes();
            flow_is_up(flow);
        });
}

void ResourceAllocator::register_upflow(Address peer, PortIdValue port) {
    ipcp_.add_lower_port(port);
    const auto key = std::make_pair(peer, kMgmtQosId);
    if (flows_.count(key)) return;  // already have one toward this peer
    N1Flow& f = flows_[key];
    f.peer = peer;
    f.port = port;
    f.state = N1Flow::State::kUp;
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".ra",
                        "RA_N1_ALLOC",
                        {{"peer", std::to_string(peer)},
                         {"qos", std::to_string(kMgmtQosId)},
                         {"phase", "up"},
                         {"via", "responder"},
                         {"port", std::to_string(port)},
                         {"dif", ipcp_.dif().name}});
    ipcp_.install_routes();
    flow_is_up(f);
}

void ResourceAllocator::park_pdu(Address next_hop, Pdu pdu) {
    ipcp_.tracer().emit(ipcp_.engine().now(), ipcp_.node().name(), ipcp_.name() + ".rmt",
                        "RMT_WAIT_N1",
                        {{"dst", std::to_string(pdu.dst_addr)},
                         {"nexthop", std::to_string(next_hop)}});
    parked_[next_hop].push_back(std::move(pdu));
    get_or_allocate(next_hop, [](std::optional<PortIdValue>) {});
}

void ResourceAllocator::on_n1_down(PortIdValue port) {
    for (auto it = flows_.begin(); it != flows_.end(); ++it) {
        if (it->second.port == port) {
            flows_.erase(it);
            break;
        }
    }
    ipcp_.rmt().remove_port(port);
}

void ResourceAllocator::on_queue_occupancy(PortIdValue, int, std::size_t len) {
    if (len > peak_queue_len_) peak_queue_len_ = len;
}

}  // namespace rina
