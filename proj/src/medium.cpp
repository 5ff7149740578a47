#include "rina/medium.hpp"

#include <cmath>

#include "rina/error.hpp"

namespace rina {

std::size_t Medium::add_link(Endpoint a, Endpoint b, std::int64_t rate_bps, Duration delay,
                             double ber, std::uint32_t metric) {
    Link l;
    l.ends[0] = std::move(a);
    l.ends[1] = std::move(b);
    l.rate_bps = rate_bps;
    l.delay = delay;
    l.ber = ber;
    l.metric = metric;
    l.name = l.ends[0].node + "." + l.ends[0].ipcp + "-" + l.ends[1].node + "." + l.ends[1].ipcp;
    l.rng = RngStream(seed_, links_.size());
    links_.push_back(std::move(l));
    return links_.size() - 1;
}

void Medium::attach(std::size_t link_id, int end, std::function<void(Pdu)> deliver) {
    links_.at(link_id).deliver[end] = std::move(deliver);
}

std::optional<std::pair<std::size_t, int>> Medium::find_link(const Endpoint& a,
                                                             const Endpoint& b) const {
    for (std::size_t i = 0; i < links_.size(); ++i) {
        if (links_[i].ends[0] == a && links_[i].ends[1] == b) return {{i, 0}};
        if (links_[i].ends[1] == a && links_[i].ends[0] == b) return {{i, 1}};
    }
    return std::nullopt;
}

std::pair<std::size_t, int> Medium::allocate(const Endpoint& requester, const Endpoint& peer) {
    auto found = find_link(requester, peer);
    if (!found) {
        throw SimError("NoSuchLink: no link between " + requester.node + "." + requester.ipcp +
                       " and " + peer.node + "." + peer.ipcp);
    }
    links_[found->first].allocated[found->second] = true;
    return *found;
}

double Medium::corrupt_probability(std::size_t id, std::int64_t bits) const {
    const Link& l = links_.at(id);
    if (l.ber <= 0.0) return 0.0;
    if (l.ber >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - l.ber, static_cast<double>(bits));
}

Duration Medium::transmit(std::size_t link_id, int from_end, Pdu pdu) {
    Link& l = links_.at(link_id);
    const int to_end = 1 - from_end;
    const Duration tx = transmission_ns(pdu.wire_bits(), l.rate_bps);
    const SimTime now = engine_.now();

    ++l.tx_count;
    tracer_.emit(now, l.ends[from_end].node, "medium", "MEDIUM_TX",
                 {{"link", l.name},
                  {"kind", to_string(pdu.kind)},
                  {"seq", std::to_string(pdu.seq)},
                  {"bytes", std::to_string(pdu.wire_bytes())}});

    bool corrupted = false;
    if (pdu.kind != PduKind::kMgmt) {
        const double p = corrupt_probability(link_id, pdu.wire_bits());
        if (p >= 1.0) {
            corrupted = true;
        } else if (p > 0.0) {
            corrupted = l.rng.uniform01() < p;
        }
    }
    if (corrupted) {
        ++l.drop_count;
        tracer_.emit(now, l.ends[from_end].node, "medium", "MEDIUM_DROP",
                     {{"link", l.name},
                      {"kind", to_string(pdu.kind)},
                      {"seq", std::to_string(pdu.seq)},
                      {"bytes", std::to_string(pdu.wire_bytes())}});
        return tx;
    }

    engine_.schedule(now + tx + l.delay, [this, link_id, to_end, p = std::move(pdu)]() mutable {
        Link& lk = links_[link_id];
        ++lk.rx_count;
        tracer_.emit(engine_.now(), lk.ends[to_end].node, "medium", "MEDIUM_RX",
                     {{"link", lk.name},
                      {"kind", to_string(p.kind)},
                      {"seq", std::to_string(p.seq)},
                      {"bytes", std::to_string(p.wire_bytes())}});
        if (lk.deliver[to_end]) lk.deliver[to_end](std::move(p));
    });
    return tx;
}

}  // namespace rina
