#include "rina/rmt.hpp"

#include "rina/error.hpp"

namespace rina {

std::optional<PortIdValue> ForwardingTable::lookup(Address dst, QosId qos) const {
    if (auto it = entries.find({dst, qos}); it != entries.end()) return it->second;
    for (const auto& [key, port] : entries) {
        if (key.first == dst) return port;  // any-qos fallback
    }
    return default_port;
}

std::uint64_t ForwardingTable::digest() const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [key, port] : entries) {
        mix(key.first);
        mix(key.second);
        mix(port);
    }
    mix(default_port ? *default_port : 0);
    return h;
}

Sdu rmt_mux(const Pdu& pdu) {
    return serialize_pdu(pdu);
}

Pdu rmt_demux(const Sdu& sdu) {
    return parse_pdu(sdu);
}

void Rmt::add_port(PortIdValue id, std::function<Duration(Pdu)> transmit) {
    Port p;
    p.id = id;
    p.transmit = std::move(transmit);
    ports_.emplace(id, std::move(p));
}

void Rmt::remove_port(PortIdValue id) {
    ports_.erase(id);
}

void Rmt::trace_q(const char* ev, const Pdu& pdu, PortIdValue port, Dir dir, std::size_t len) {
    tracer_.emit(engine_.now(), node_, comp_, ev,
                 {{"port", std::to_string(port)},
                  {"dir", dir == Dir::kIn ? "in" : "out"},
                  {"qlen", std::to_string(len)},
                  {"kind", to_string(pdu.kind)},
                  {"seq", std::to_string(pdu.seq)}});
}

bool Rmt::enqueue(Pdu pdu, PortIdValue port, Dir dir) {
    auto it = ports_.find(port);
    if (it == ports_.end()) {
        throw SimError("rmt_enqueue: no port " + std::to_string(port) + " on " + comp_);
    }
    Port& p = it->second;
    auto& q = dir == Dir::kIn ? p.in_q : p.out_q;
    if (q.size() >= capacity_) {
        ++queue_drops_;
        trace_q("RMT_QUEUE_DROP", pdu, port, dir, q.size());
        return false;
    }
    q.push_back(std::move(pdu));
    trace_q("RMT_ENQ", q.back(), port, dir, q.size());
    if (on_occupancy) on_occupancy(port, dir, q.size());
    if (dir == Dir::kOut) {
        kick_out(p);
    } else if (!p.drain_scheduled) {
        p.drain_scheduled = true;
        const PortIdValue id = port;
        engine_.schedule(engine_.now(), [this, id] { drain_in(id); });
    }
    return true;
}

void Rmt::kick_out(Port& p) {
    if (p.departure_scheduled || p.out_q.empty()) return;
    p.departure_scheduled = true;
    const PortIdValue id = p.id;
    engine_.schedule(std::max(engine_.now(), p.busy_until), [this, id] { depart(id); });
}

void Rmt::depart(PortIdValue id) {
    auto it = ports_.find(id);
    if (it == ports_.end()) return;  // port torn down with a departure in flight
    Port& p = it->second;
    p.departure_scheduled = false;
    if (p.out_q.empty()) return;
    Pdu pdu = std::move(p.out_q.front());
    p.out_q.pop_front();
    trace_q("RMT_DEQ", pdu, id, Dir::kOut, p.out_q.size());
    if (on_occupancy) on_occupancy(id, Dir::kOut, p.out_q.size());
    const Duration occupancy = p.transmit(std::move(pdu));
    p.busy_until = engine_.now() + occupancy;
    kick_out(p);
}

void Rmt::drain_in(PortIdValue id) {
    auto it = ports_.find(id);
    if (it == ports_.end()) return;
    Port& p = it->second;
    p.drain_scheduled = false;
    if (p.in_q.empty()) return;
    Pdu pdu = std::move(p.in_q.front());
    p.in_q.pop_front();
    trace_q("RMT_DEQ", pdu, id, Dir::kIn, p.in_q.size());
    if (on_occupancy) on_occupancy(id, Dir::kIn, p.in_q.size());
    if (!p.in_q.empty()) {
        p.drain_scheduled = true;
        engine_.schedule(engine_.now(), [this, id] { drain_in(id); });
    }
    if (on_ingress) on_ingress(std::move(pdu), id);
}

}  // namespace rina
