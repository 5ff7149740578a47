#include "rina/daf.hpp"

#include "rina/error.hpp"
#include "rina/network.hpp"
#include "rina/node.hpp"

namespace rina {

Sdu encode_ping(const PingMsg& m, std::size_t total_len) {
    Sdu out;
    out.reserve(std::max(total_len, kPingMsgBytes));
    out.push_back(m.kind);
    auto put64 = [&out](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put64(m.seq);
    put64(static_cast<std::uint64_t>(m.send_ns));
    put64(static_cast<std::uint64_t>(m.recv_ns));
    if (out.size() < total_len) out.resize(total_len, 0);
    return out;
}

std::optional<PingMsg> decode_ping(const Sdu& bytes) {
    if (bytes.size() < kPingMsgBytes) return std::nullopt;
    auto get64 = [&bytes](std::size_t at) {
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[at + i];
        return v;
    };
    PingMsg m;
    if (bytes[0] < 1 || bytes[0] > 3) return std::nullopt;
    m.kind = bytes[0];
    m.seq = get64(1);
    m.send_ns = static_cast<SimTime>(get64(9));
    m.recv_ns = static_cast<SimTime>(get64(17));
    return m;
}

void AppEntity::trace(const std::string& ev, std::vector<std::pair<std::string, std::string>> kv) {
    tracer_.emit(engine_.now(), node_.name(), "app." + apn_.full(), ev, std::move(kv));
}

// ------------------------------------------------------------- PingInitiator

void PingInitiator::start() {
    engine_.schedule(cfg_.start_at, [this] {
        trace("APP_ALLOC_REQ", {{"dst", cfg_.dst.full()}});
        node_.irm().allocate(*this, cfg_.dst, cfg_.qos, [this](const AllocResult& r) {
            if (!r.ok()) {
                alloc_error_ = r.error;
                trace("APP_ALLOC_FAIL", {{"error", r.error}});
                done_ = true;
                return;
            }
            on_allocated(*r.port);
        });
    });
}

FlowUser PingInitiator::flow_user() {
    FlowUser u;
    u.label = label();
    u.accept = [](const FlowDescriptor&) { return true; };
    u.deliver = [this](PortIdValue, const Sdu& sdu) { on_sdu(sdu); };
    u.on_released = [this](PortIdValue) { trace("APP_FLOW_RELEASED", {}); };
    u.on_error = [this](PortIdValue) {
        flow_error_ = true;
        trace("APP_FLOW_ERROR", {});
    };
    return u;
}

void PingInitiator::on_allocated(PortIdValue port) {
    port_ = port;
    trace("APP_ALLOC_OK", {{"port", std::to_string(port)}});
    if (cfg_.count == 0) {
        finish();
        return;
    }
    send_ping(1);
}

void PingInitiator::send_ping(std::uint64_t seq) {
    if (finishing_) return;
    PingMsg m;
    m.kind = PingMsg::kRequest;
    m.seq = seq;
    m.send_ns = engine_.now();
    node_.write_down(*port_, encode_ping(m, cfg_.payload_bytes));
    trace("APP_SEND", {{"seq", std::to_string(seq)},
                       {"bytes", std::to_string(cfg_.payload_bytes)}});
    Pending& p = pending_[seq];
    p.sample.seq = seq;
    p.sample.send_ns = engine_.now();
    p.sample.lost = true;  // until the response lands
    p.timeout = engine_.schedule_in(cfg_.sample_timeout, [this, seq] { on_sample_timeout(seq); });
    sent_ = seq;
    if (seq < cfg_.count) {
        engine_.schedule_in(cfg_.interval, [this, seq] { send_ping(seq + 1); });
    }
}

void PingInitiator::on_sdu(const Sdu& sdu) {
    auto m = decode_ping(sdu);
    if (!m || m->kind != PingMsg::kResponse) return;
    auto it = pending_.find(m->seq);
    if (it == pending_.end()) return;
    Pending& p = it->second;
    PingSample& s = p.sample;
    s.responder_recv_ns = m->recv_ns;
    s.response_recv_ns = engine_.now();
    s.one_way_ns = m->recv_ns - s.send_ns;
    s.rtt_ns = engine_.now() - s.send_ns;
    s.lost = false;
    trace("APP_RECV", {{"kind", "response"},
                       {"seq", std::to_string(m->seq)},
                       {"rtt_ns", std::to_string(s.rtt_ns)}});
    if (!p.resolved) {
        p.resolved = true;
        engine_.cancel(p.timeout);
    }
    maybe_finish();
}

void PingInitiator::on_sample_timeout(std::uint64_t seq) {
    auto it = pending_.find(seq);
    if (it == pending_.end() || it->second.resolved) return;
    it->second.resolved = true;
    it->second.sample.lost = true;
    trace("APP_TIMEOUT", {{"seq", std::to_string(seq)}});
    maybe_finish();
}

void PingInitiator::maybe_finish() {
    if (finishing_ || sent_ < cfg_.count) return;
    for (const auto& [seq, p] : pending_) {
        if (!p.resolved) return;
    }
    finish();
}

void PingInitiator::finish() {
    if (finishing_) return;
    finishing_ = true;
    trace("APP_RELEASE", {});
    if (!port_) {
        done_ = true;
        return;
    }
    // Application-level release rides the flow first; the deallocation
    // request follows strictly after it in the event order.
    PingMsg rel;
    rel.kind = PingMsg::kRelease;
    rel.send_ns = engine_.now();
    node_.write_down(*port_, encode_ping(rel, kPingMsgBytes));
    engine_.schedule(engine_.now(), [this] {
        node_.irm().deallocate(*port_, [this] {
            trace("APP_DEALLOC_DONE", {});
            done_ = true;
        });
    });
}

std::vector<PingSample> PingInitiator::samples() const {
    std::vector<PingSample> out;
    for (const auto& [seq, p] : pending_) out.push_back(p.sample);
    return out;
}

// ------------------------------------------------------------- PingResponder

FlowUser PingResponder::flow_user() {
    FlowUser u;
    u.label = label();
    u.accept = [this](const FlowDescriptor& d) {
        if (deny_) {
            trace("APP_DENY", {{"from", d.src_apn.full()}});
            return false;
        }
        return true;
    };
    u.on_allocated = [this](PortIdValue port, const FlowDescriptor& d) {
        trace("APP_FLOW", {{"port", std::to_string(port)}, {"from", d.src_apn.full()}});
        node_.irm().note_incoming(port, label(), d.src_apn);
    };
    u.deliver = [this](PortIdValue port, const Sdu& sdu) { on_sdu(port, sdu); };
    u.on_released = [this](PortIdValue port) {
        trace("APP_FLOW_RELEASED", {{"port", std::to_string(port)}});
        node_.irm().note_released(port);
    };
    return u;
}

void PingResponder::on_sdu(PortIdValue port, const Sdu& sdu) {
    auto m = decode_ping(sdu);
    if (!m) return;
    if (m->kind == PingMsg::kRequest) {
        trace("APP_RECV", {{"kind", "request"}, {"seq", std::to_string(m->seq)}});
        PingMsg resp;
        resp.kind = PingMsg::kResponse;
        resp.seq = m->seq;
        resp.send_ns = m->send_ns;
        resp.recv_ns = engine_.now();
        node_.write_down(port, encode_ping(resp, sdu.size()));  // echo, equal size
        trace("APP_SEND", {{"kind", "response"}, {"seq", std::to_string(m->seq)}});
    } else if (m->kind == PingMsg::kRelease) {
        trace("APP_RECV", {{"kind", "release"}, {"seq", "0"}});
    }
}

// ----------------------------------------------------------------------- Irm

void Irm::allocate(AppEntity& ae, const Apn& dst, const QosRequirements& reqs, AllocCallback cb) {
    auto placements = net_.da().lookup(dst);
    if (placements.empty()) {
        cb(AllocResult{std::nullopt, "NoRoute:unknown-destination-apn"});
        return;
    }
    const auto& placement = placements.front();
    Ipcp* member = net_.member_on_node(node_.name(), placement.dif);
    if (!member) {
        cb(AllocResult{std::nullopt, "NoRoute:no-local-ipcp-in-dif:" + placement.dif});
        return;
    }
    auto pending_port = std::make_shared<std::optional<PortIdValue>>();
    auto port = member->fa().submit_allocate(
        ae.flow_user(), ae.apn(), dst, reqs,
        [this, cb, pending_port](const AllocResult& r) {
            if (r.ok()) {
                table_[*r.port].status = "allocated";
            } else if (*pending_port) {
                table_.erase(**pending_port);  // request died with the FAI
            }
            cb(r);
        });
    if (port) {
        table_[*port] = Entry{ae.label(), dst, "pending"};
        *pending_port = *port;
    }
}

void Irm::deallocate(PortIdValue port, std::function<void()> done) {
    const Node::Binding* b = node_.binding(port);
    if (!b || !b->provider) {
        throw SimError("NoSuchFlow: port " + std::to_string(port) + " is not bound on " +
                       node_.name());
    }
    b->provider->fa().deallocate(port, [this, port, done = std::move(done)] {
        table_.erase(port);
        if (done) done();
    });
}

}  // namespace rina
