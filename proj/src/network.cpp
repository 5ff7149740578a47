#include "rina/network.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "rina/error.hpp"

namespace rina {

Network::Network(const Scenario& scenario, std::optional<std::uint64_t> seed_override)
    : scenario_(scenario) {
    if (seed_override) scenario_.seed = *seed_override;
    tracer_.add_sink([this](const TraceEvent& e) { count_event(e); });
    build();
}

Network::~Network() = default;

Node* Network::node(const std::string& name) {
    for (auto& n : nodes_) {
        if (n->name() == name) return n.get();
    }
    return nullptr;
}

Ipcp* Network::ipcp(const std::string& name) {
    auto it = ipcp_registry_.find(name);
    return it == ipcp_registry_.end() ? nullptr : it->second.ipcp;
}

const Network::IpcpRecord* Network::ipcp_record(const std::string& apn_name) const {
    auto it = ipcp_registry_.find(apn_name);
    return it == ipcp_registry_.end() ? nullptr : &it->second;
}

Ipcp* Network::member_on_node(const std::string& node_name, const std::string& dif) const {
    for (const auto& [name, rec] : ipcp_registry_) {
        if (rec.node == node_name && rec.dif == dif) return rec.ipcp;
    }
    return nullptr;
}

std::optional<Address> Network::resolve_dst(const Apn& dst, const std::string& dif) const {
    // An IPCP name resolves through the registry, an application through
    // the DA directory; either way the answer is the member address of
    // `dif` on the hosting node.
    std::string host_node;
    if (const auto* rec = ipcp_record(dst.name)) {
        host_node = rec->node;
    } else {
        auto placements = da_.lookup(dst);
        for (const auto& p : placements) {
            if (p.dif == dif) {
                host_node = p.node;
                break;
            }
        }
        if (host_node.empty() && !placements.empty()) host_node = placements.front().node;
    }
    if (host_node.empty()) return std::nullopt;
    Ipcp* member = member_on_node(host_node, dif);
    if (!member) return std::nullopt;
    return member->address();
}

void Network::build() {
    medium_ = std::make_unique<Medium>(engine_, tracer_, scenario_.seed);

    for (const auto& e : scenario_.da_directory) {
        da_.add(DaDirectory::Entry{e.apn, e.dif, e.node});
    }

    for (const auto& nd : scenario_.nodes) {
        nodes_.push_back(std::make_unique<Node>(engine_, tracer_, *this, nd.name, nd.kind));
        Node& node = *nodes_.back();
        for (const auto& ip : nd.ipcps) {
            const DifConfig* dif = scenario_.dif(ip.dif);
            Ipcp& ipcp = node.add_ipcp(*dif, ip.name, ip.address);
            node.set_stacking(ip.name, ip.over);
            ipcp_registry_[ip.name] = IpcpRecord{&ipcp, nd.name, ip.dif, ip.address};
            comp_dif_[ip.name] = ip.dif;
            max_rank_ = std::max(max_rank_, dif->rank);
        }
    }

    // Physical links: register with the medium, give each bottom IPCP an RMT
    // port (a node port-id) per attachment, and wire delivery callbacks.
    for (const auto& l : scenario_.links) {
        const std::size_t id = medium_->add_link({l.a_node, l.a_ipcp}, {l.b_node, l.b_ipcp},
                                                 l.rate_bps, l.delay, l.ber, l.metric);
        Ipcp* ends[2] = {ipcp(l.a_ipcp), ipcp(l.b_ipcp)};
        for (int e = 0; e < 2; ++e) {
            Node* n = node(e == 0 ? l.a_node : l.b_node);
            const PortIdValue port = n->alloc_port();
            ends[e]->add_link_port(port, id, e);
            Ipcp* target = ends[e];
            medium_->attach(id, e, [target, port](Pdu p) {
                target->on_medium_pdu(port, std::move(p));
            });
        }
    }

    for (const auto& ad : scenario_.apps) {
        Node* n = node(ad.node);
        if (ad.role == "ping-initiator") {
            PingConfig cfg;
            cfg.dst = ad.dst;
            cfg.qos = ad.qos;
            cfg.count = ad.count;
            cfg.interval = ad.interval;
            cfg.payload_bytes = ad.payload_bytes;
            cfg.start_at = ad.start_at;
            cfg.sample_timeout = ad.sample_timeout;
            n->add_app(std::make_unique<PingInitiator>(engine_, tracer_, *this, *n, ad.apn, cfg));
        } else {
            n->add_app(
                std::make_unique<PingResponder>(engine_, tracer_, *this, *n, ad.apn, ad.deny));
        }
    }

    derive_adjacencies();
    schedule_bootstraps();

    for (auto& n : nodes_) {
        for (auto& app : n->apps()) app->start();
    }
}

void Network::derive_adjacencies() {
    // Rank 0: neighbors are the link endpoints.
    for (std::size_t id = 0; id < medium_->link_count(); ++id) {
        const auto& link = medium_->link(id);
        Ipcp* a = ipcp(link.ends[0].ipcp);
        Ipcp* b = ipcp(link.ends[1].ipcp);
        NeighborPath pa;
        pa.metric = link.metric;
        pa.via_medium = true;
        pa.link_id = id;
        pa.link_end = 0;
        a->add_neighbor(b->address(), pa);
        NeighborPath pb = pa;
        pb.link_end = 1;
        b->add_neighbor(a->address(), pb);
    }

    // Rank >= 1: two members are neighbors when they hold lower IPCPs in a
    // common (N-1) DIF; the first such pair in declaration order is the
    // recipe the RA uses for the recursive descent.
    for (const auto& nd : scenario_.nodes) {
        for (const auto& ip : nd.ipcps) {
            const DifConfig* dif = scenario_.dif(ip.dif);
            if (dif->rank == 0) continue;
            Ipcp* self = ipcp(ip.name);
            for (const auto& od : scenario_.nodes) {
                if (od.name == nd.name) continue;
                for (const auto& op : od.ipcps) {
                    if (op.dif != ip.dif) continue;
                    // find a shared lower dif
                    for (const auto& my_lower : ip.over) {
                        const auto* my_rec = ipcp_record(my_lower);
                        bool linked = false;
                        for (const auto& their_lower : op.over) {
                            const auto* their_rec = ipcp_record(their_lower);
                            if (my_rec && their_rec && my_rec->dif == their_rec->dif) {
                                linked = true;
                            }
                        }
                        if (!linked) continue;
                        NeighborPath p;
                        p.metric = 1;
                        p.via_medium = false;
                        p.lower_ipcp = ipcp(my_lower);
                        p.peer_apn = Apn{op.name, ""};
                        if (!self->is_neighbor(op.address)) {
                            self->add_neighbor(op.address, p);
                        }
                        break;
                    }
                }
            }
        }
    }
}

void Network::schedule_bootstraps() {
    // Every statically declared DIF member joins its DIF at t=0 by enrolling
    // with its derived neighbors; the lower-address side initiates. Highest
    // rank first: the top-level bootstrap then pulls its (N-1) flows up
    // through the recursive descent, and the lower-rank entries scheduled
    // afterwards find their flows already in place.
    struct Entry {
        int rank;
        std::string dif;
        Address self_addr;
        Address peer;
        Ipcp* self;
    };
    std::vector<Entry> entries;
    for (const auto& nd : scenario_.nodes) {
        for (const auto& ip : nd.ipcps) {
            Ipcp* self = ipcp(ip.name);
            for (const auto& [peer, path] : self->neighbors()) {
                if (self->address() < peer) {
                    entries.push_back({self->dif().rank, ip.dif, self->address(), peer, self});
                }
            }
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.rank != b.rank) return a.rank > b.rank;
        if (a.dif != b.dif) return a.dif < b.dif;
        if (a.self_addr != b.self_addr) return a.self_addr < b.self_addr;
        return a.peer < b.peer;
    });
    for (const auto& e : entries) {
        engine_.schedule(0, [self = e.self, peer = e.peer] { self->bootstrap_neighbor(peer); });
    }
}

void Network::count_event(const TraceEvent& e) {
    auto dif_of_comp = [this](const std::string& comp) -> std::string {
        auto dot = comp.find('.');
        auto it = comp_dif_.find(dot == std::string::npos ? comp : comp.substr(0, dot));
        return it == comp_dif_.end() ? std::string{} : it->second;
    };
    if (e.ev == "EFCP_FLOW_ERROR") ++flow_errors_;
    static const std::set<std::string> kPerDif = {
        "EFCP_SEND", "EFCP_RECV", "EFCP_ACK", "EFCP_RTX", "EFCP_UNKNOWN_CEP",
        "RIBD_SEND", "RIBD_RECV", "RMT_QUEUE_DROP", "RMT_NO_ROUTE", "EFCP_STATE_DISCARD"};
    if (kPerDif.count(e.ev)) {
        const std::string dif = dif_of_comp(e.comp);
        if (!dif.empty()) ++counters_["dif." + dif + "." + e.ev];
    }
    if (e.ev == "MEDIUM_TX" || e.ev == "MEDIUM_RX" || e.ev == "MEDIUM_DROP") {
        ++counters_["medium." + e.ev];
    }
    if (e.ev == "FAI_STATE") {
        if (e.has("new", "ALLOCATED")) ++counters_["flows.allocated"];
        if (e.has("new", "DEALLOCATED")) ++counters_["flows.deallocated"];
    }
}

RunSummary Network::run(std::optional<SimTime> stop_override) {
    const SimTime stop = stop_override.value_or(scenario_.stop_time);
    RunSummary out;
    out.events_processed += engine_.run_until_idle(stop);
    if (engine_.empty()) {
        teardown(stop);
        out.leak_check_ran = true;
        leak_check(out);
    }
    out.end_time = engine_.now();
    for (auto& n : nodes_) {
        for (auto& ip : n->ipcps()) {
            out.flows_allocated += ip->fa().flows_allocated;
            out.flows_deallocated += ip->fa().flows_deallocated;
        }
    }
    out.flow_errors = flow_errors_;
    out.counters = counters_;
    return out;
}

void Network::teardown(SimTime cap) {
    if (torn_down_) return;
    torn_down_ = true;
    // Deallocate every remaining flow through the regular three-phase
    // choreography, top rank first so the management traffic of rank r still
    // rides the rank r-1 flows below it.
    for (int rank = max_rank_; rank >= 0; --rank) {
        for (auto& n : nodes_) {
            for (auto& ip : n->ipcps()) {
                if (ip->dif().rank != rank) continue;
                for (PortIdValue port : ip->fa().allocated_initiator_ports()) {
                    ip->fa().deallocate(port);
                }
            }
        }
        engine_.run_until_idle(cap);
    }
    // A peer that timed out leaves a half-open record behind that the delete
    // exchange can never finish; reclaim those locally.
    for (auto& n : nodes_) {
        for (auto& ip : n->ipcps()) ip->fa().force_release_all();
    }
    engine_.run_until_idle(cap);
    // Management flows are records without ids; link attachments are
    // build-time ports released here.
    for (auto& n : nodes_) {
        for (auto& ip : n->ipcps()) {
            ip->ribd().drop_all_channels();
            for (PortIdValue p : ip->link_ports()) {
                ip->rmt().remove_port(p);
                n->release_port(p);
            }
        }
    }
}

void Network::leak_check(RunSummary& out) {
    out.leak_details = audit_impl_after_teardown();
    out.leak_check_ok = out.leak_details.empty();
}

std::vector<std::string> Network::audit_impl_after_teardown() const {
    std::vector<std::string> bad;
    for (const auto& n : nodes_) {
        if (n->live_port_count() != 0) {
            bad.push_back("node " + n->name() + ": " + std::to_string(n->live_port_count()) +
                          " port-ids still allocated");
        }
        if (n->binding_count() != 0) {
            bad.push_back("node " + n->name() + ": " + std::to_string(n->binding_count()) +
                          " port bindings left");
        }
        for (const auto& ip : n->ipcps()) {
            if (ip->live_cep_count() != 0) {
                bad.push_back(ip->name() + ": " + std::to_string(ip->live_cep_count()) +
                              " cep-ids still allocated");
            }
            if (ip->fa().live_count() != 0) {
                bad.push_back(ip->name() + ": " + std::to_string(ip->fa().live_count()) +
                              " live FAIs");
            }
            if (ip->efcp_count() != 0) {
                bad.push_back(ip->name() + ": " + std::to_string(ip->efcp_count()) +
                              " live EFCP instances");
            }
        }
        if (!n->irm().table().empty()) {
            bad.push_back("node " + n->name() + ": IRM table not empty");
        }
    }
    return bad;
}

std::vector<std::string> Network::audit() const {
    std::vector<std::string> bad;
    for (const auto& n : nodes_) {
        // Port-id uniqueness is enforced by the pool; check bindings and the
        // IRM table stay consistent with the FAI records instead.
        std::size_t app_fais = 0;
        for (const auto& ip : n->ipcps()) {
            std::size_t efcps = 0;
            for (const auto& [port, fai] : ip->fa().fais()) {
                if (fai.efcp) ++efcps;
                if (fai.state == FaiState::kAllocated && !fai.efcp) {
                    bad.push_back(ip->name() + ": ALLOCATED fai without EFCP (port " +
                                  std::to_string(port) + ")");
                }
                if (fai.state == FaiState::kAllocated && !n->port_pool().is_live(port)) {
                    bad.push_back(ip->name() + ": fai port " + std::to_string(port) +
                                  " not live in node pool");
                }
                if (fai.user.label.rfind("app:", 0) == 0) {
                    ++app_fais;  // non-DEALLOCATED records only live in the map
                    if (!n->irm().table().count(port)) {
                        bad.push_back(n->name() + ": app flow port " + std::to_string(port) +
                                      " missing from IRM table");
                    }
                }
            }
            if (efcps != ip->efcp_count()) {
                bad.push_back(ip->name() + ": EFCP demux registry out of sync");
            }
        }
        if (n->irm().table().size() != app_fais) {
            bad.push_back(n->name() + ": IRM table has " + std::to_string(n->irm().table().size()) +
                          " entries, expected " + std::to_string(app_fais));
        }
    }
    return bad;
}

std::vector<std::pair<std::string, PingSample>> Network::collect_samples() const {
    std::vector<std::pair<std::string, PingSample>> out;
    for (const auto& n : nodes_) {
        for (const auto& app : n->apps()) {
            for (const auto& s : app->samples()) {
                out.emplace_back(app->apn().full(), s);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second.seq < b.second.seq;
    });
    return out;
}

std::string Network::metrics_csv() const {
    std::ostringstream os;
    os << "seq,send_time_ns,responder_recv_ns,response_recv_ns,one_way_ns,rtt_ns,lost\n";
    for (const auto& [apn, s] : collect_samples()) {
        if (s.lost) {
            os << s.seq << ',' << s.send_ns << ",0,0,0,0,1\n";
        } else {
            os << s.seq << ',' << s.send_ns << ',' << s.responder_recv_ns << ','
               << s.response_recv_ns << ',' << s.one_way_ns << ',' << s.rtt_ns << ",0\n";
        }
    }
    return os.str();
}

}  // namespace rina
