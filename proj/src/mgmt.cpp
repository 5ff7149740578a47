#include "rina/mgmt.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "rina/error.hpp"

namespace rina {

// ---------------------------------------------------------------- enrollment

const char* EnrollmentManager::to_string(State s) {
    switch (s) {
        case State::kNotEnrolled: return "NOT_ENROLLED";
        case State::kConnecting: return "CONNECTING";
        case State::kEnrolled: return "ENROLLED";
        case State::kFailed: return "FAILED";
    }
    return "?";
}

EnrollmentManager::State EnrollmentManager::state(Address peer) const {
    auto it = peers_.find(peer);
    return it == peers_.end() ? State::kNotEnrolled : it->second.state;
}

void EnrollmentManager::transition(Address peer, Fsm& fsm, State next) {
    tracer_.emit(engine_.now(), node_, comp_, "ENROLL_STATE",
                 {{"peer", std::to_string(peer)},
                  {"old", to_string(fsm.state)},
                  {"new", to_string(next)}});
    fsm.state = next;
}

void EnrollmentManager::settle(Fsm& fsm, bool ok) {
    if (fsm.timeout.valid()) {
        engine_.cancel(fsm.timeout);
        fsm.timeout = {};
    }
    auto waiters = std::move(fsm.waiters);
    fsm.waiters.clear();
    for (auto& cb : waiters) cb(ok);
}

void EnrollmentManager::ensure_enrolled(Address peer, std::function<void(bool)> cb) {
    Fsm& fsm = peers_[peer];
    switch (fsm.state) {
        case State::kEnrolled:
            cb(true);
            return;
        case State::kFailed:
            cb(false);
            return;
        case State::kConnecting:
            fsm.waiters.push_back(std::move(cb));
            return;
        case State::kNotEnrolled:
            break;
    }
    fsm.waiters.push_back(std::move(cb));
    transition(peer, fsm, State::kConnecting);
    MgmtMessage m;
    m.kind = MgmtKind::kMConnect;
    m.src_addr = self_;
    m.dst_addr = peer;
    m.dif_name = dif_name_;
    m.auth = auth_;
    hooks_.send(std::move(m));
    fsm.timeout = engine_.schedule_in(timeout_, [this, peer] {
        Fsm& f = peers_[peer];
        if (f.state != State::kConnecting) return;
        f.timeout = {};
        transition(peer, f, State::kFailed);
        settle(f, false);
    });
}

void EnrollmentManager::on_mconnect(const MgmtMessage& m) {
    Fsm& fsm = peers_[m.src_addr];
    MgmtMessage resp;
    resp.kind = MgmtKind::kMConnectResponse;
    resp.src_addr = self_;
    resp.dst_addr = m.src_addr;
    resp.dif_name = dif_name_;
    if (fsm.state == State::kFailed) {
        resp.result_positive = false;
        resp.reason = "previously-failed";
        hooks_.send(std::move(resp));
        return;
    }
    const bool ok = m.dif_name == dif_name_ && m.auth == auth_;
    resp.result_positive = ok;
    if (!ok) {
        resp.reason = m.dif_name != dif_name_ ? "dif-name-mismatch" : "auth-mismatch";
        if (fsm.state != State::kFailed) transition(m.src_addr, fsm, State::kFailed);
        hooks_.send(std::move(resp));
        settle(fsm, false);
        return;
    }
    if (fsm.state != State::kEnrolled) {
        transition(m.src_addr, fsm, State::kEnrolled);
        hooks_.send(std::move(resp));
        settle(fsm, true);
        if (hooks_.on_enrolled) hooks_.on_enrolled(m.src_addr);
    } else {
        hooks_.send(std::move(resp));
    }
}

void EnrollmentManager::on_mconnect_response(const MgmtMessage& m) {
    auto it = peers_.find(m.src_addr);
    if (it == peers_.end() || it->second.state != State::kConnecting) return;
    Fsm& fsm = it->second;
    if (m.result_positive) {
        transition(m.src_addr, fsm, State::kEnrolled);
        settle(fsm, true);
        if (hooks_.on_enrolled) hooks_.on_enrolled(m.src_addr);
    } else {
        transition(m.src_addr, fsm, State::kFailed);
        settle(fsm, false);
    }
}

// ------------------------------------------------------------------- routing

void Routing::neighbor_up(Address nbr, std::uint32_t metric) {
    adjacent_[nbr] = metric;
    // Database sync: a freshly adjacent neighbor must learn advertisements
    // flooded before this adjacency existed.
    for (const auto& [origin, lsa] : db_) {
        if (origin != self_) hooks_.send_update(lsa, nbr);
    }
    advertise();
}

void Routing::advertise() {
    LinkStateAd lsa;
    lsa.origin = self_;
    lsa.version = ++my_version_;
    for (const auto& [addr, metric] : adjacent_) lsa.neighbors.emplace_back(addr, metric);
    db_[self_] = lsa;
    flood(lsa, std::nullopt);
    recompute();
    if (hooks_.install) hooks_.install();
}

void Routing::flood(const LinkStateAd& lsa, std::optional<Address> except) {
    for (const auto& [nbr, metric] : adjacent_) {
        if (except && nbr == *except) continue;
        hooks_.send_update(lsa, nbr);
    }
}

void Routing::step(const std::optional<LinkStateAd>& update, Address from) {
    if (update) {
        auto it = db_.find(update->origin);
        if (it != db_.end() && update->version <= it->second.version) {
            return;  // stale, no merge, no re-flood
        }
        db_[update->origin] = *update;
        flood(*update, from);
    }
    recompute();
    if (hooks_.install) hooks_.install();
}

std::optional<Address> Routing::next_hop(Address dst) const {
    auto it = next_hops_.find(dst);
    if (it == next_hops_.end()) return std::nullopt;
    return it->second;
}

void Routing::recompute() {
    next_hops_.clear();
    costs_.clear();
    constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();

    std::map<Address, std::uint64_t> dist;
    std::map<Address, Address> hop;
    dist[self_] = 0;

    // Dijkstra over the advertised directed edges; ties broken toward the
    // lowest next-hop address so every run installs the same table.
    std::set<std::pair<std::uint64_t, Address>> frontier;
    frontier.insert({0, self_});
    while (!frontier.empty()) {
        auto [d, u] = *frontier.begin();
        frontier.erase(frontier.begin());
        auto lsa_it = db_.find(u);
        if (lsa_it == db_.end()) continue;
        for (const auto& [v, metric] : lsa_it->second.neighbors) {
            const std::uint64_t nd = d + metric;
            const Address cand_hop = u == self_ ? v : hop[u];
            auto dit = dist.find(v);
            const std::uint64_t cur = dit == dist.end() ? kInf : dit->second;
            const bool better =
                nd < cur || (nd == cur && hop.count(v) && cand_hop < hop[v]);
            if (better) {
                if (dit != dist.end()) frontier.erase({cur, v});
                dist[v] = nd;
                hop[v] = cand_hop;
                frontier.insert({nd, v});
            }
        }
    }
    for (const auto& [addr, d] : dist) {
        if (addr == self_) continue;
        next_hops_[addr] = hop[addr];
        costs_[addr] = d;
    }
}

// ---------------------------------------------------------------------- ribd

bool Ribd::has_channel(Address peer) const {
    return channels_.count(peer) > 0;
}

void Ribd::channel_up(Address peer, Channel& ch) {
    ch.state = Channel::State::kUp;
    tracer_.emit(engine_.now(), node_, comp_, "MGMT_FLOW_UP",
                 {{"peer", std::to_string(peer)},
                  {"via", ch.neighbor ? "port-" + std::to_string(ch.port) : "routed"}});
    auto waiters = std::move(ch.waiters);
    ch.waiters.clear();
    for (auto& cb : waiters) cb(true);
    auto queued = std::move(ch.queued);
    ch.queued.clear();
    for (auto& m : queued) send(std::move(m));
}

void Ribd::ensure_channel(Address peer, std::function<void(bool)> cb) {
    auto it = channels_.find(peer);
    if (it != channels_.end()) {
        if (it->second.state == Channel::State::kUp) {
            cb(true);
        } else {
            it->second.waiters.push_back(std::move(cb));
        }
        return;
    }
    Channel& ch = channels_[peer];
    ch.neighbor = hooks_.is_neighbor(peer);
    ch.waiters.push_back(std::move(cb));

    Address hop = peer;
    if (!ch.neighbor) {
        auto nh = hooks_.next_hop(peer);
        if (!nh) {
            // No path: fail the bootstrap; the caller's timeout machinery
            // turns this into an allocation failure.
            auto waiters = std::move(ch.waiters);
            channels_.erase(peer);
            for (auto& w : waiters) w(false);
            return;
        }
        hop = *nh;
    }
    hooks_.ensure_n1(hop, [this, peer](std::optional<PortIdValue> port) {
        auto cit = channels_.find(peer);
        if (cit == channels_.end()) return;
        Channel& c = cit->second;
        if (!port) {
            auto waiters = std::move(c.waiters);
            channels_.erase(peer);
            for (auto& w : waiters) w(false);
            return;
        }
        if (c.neighbor) c.port = *port;
        channel_up(peer, c);
    });
}

void Ribd::transmit(const MgmtMessage& m, const Channel& ch) {
    Pdu p;
    p.src_addr = self_;
    p.dst_addr = m.dst_addr;
    p.qos_id = kMgmtQosId;
    p.kind = PduKind::kMgmt;
    p.seq = mgmt_seq_++;
    p.payload = encode_mgmt(m);
    tracer_.emit(engine_.now(), node_, comp_, "RIBD_SEND",
                 {{"kind", rina::to_string(m.kind)},
                  {"dst", std::to_string(m.dst_addr)},
                  {"result", m.result_positive ? "+" : "-"}});
    if (ch.neighbor && ch.port != 0) {
        hooks_.egress(std::move(p), ch.port);
    } else {
        hooks_.egress(std::move(p), std::nullopt);
    }
}

void Ribd::send(MgmtMessage m) {
    auto it = channels_.find(m.dst_addr);
    if (it == channels_.end()) {
        throw SimError("NoManagementFlow: " + node_ + "/" + comp_ + " has no management flow to " +
                       std::to_string(m.dst_addr));
    }
    if (it->second.state == Channel::State::kBootstrapping) {
        it->second.queued.push_back(std::move(m));
        return;
    }
    transmit(m, it->second);
}

void Ribd::deliver(const Pdu& pdu, PortIdValue ingress_port) {
    MgmtMessage m;
    try {
        m = decode_mgmt(pdu.payload);
    } catch (const SimError& e) {
        tracer_.emit(engine_.now(), node_, comp_, "RIBD_DROP", {{"reason", e.what()}});
        return;
    }
    tracer_.emit(engine_.now(), node_, comp_, "RIBD_RECV",
                 {{"kind", rina::to_string(m.kind)},
                  {"src", std::to_string(m.src_addr)},
                  {"result", m.result_positive ? "+" : "-"}});

    // The reverse channel exists as soon as a peer reaches us: for a
    // neighbor the flow the PDU arrived on is the adjacency flow.
    auto it = channels_.find(m.src_addr);
    if (it == channels_.end()) {
        Channel& ch = channels_[m.src_addr];
        ch.neighbor = hooks_.is_neighbor(m.src_addr);
        if (ch.neighbor) ch.port = ingress_port;
        channel_up(m.src_addr, ch);
    } else if (it->second.state == Channel::State::kBootstrapping && it->second.neighbor) {
        it->second.port = ingress_port;
        channel_up(m.src_addr, it->second);
    }

    switch (m.kind) {
        case MgmtKind::kCreateFlowRequest:
        case MgmtKind::kCreateFlowResponse:
        case MgmtKind::kDeleteFlowRequest:
        case MgmtKind::kDeleteFlowResponse:
            hooks_.on_flow_msg(m);
            break;
        case MgmtKind::kMConnect:
            hooks_.on_mconnect(m);
            break;
        case MgmtKind::kMConnectResponse:
            hooks_.on_mconnect_response(m);
            break;
        case MgmtKind::kRoutingUpdate:
            hooks_.on_routing_update(m.lsa, m.src_addr);
            break;
    }
}

}  // namespace rina
