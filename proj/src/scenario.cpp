#include "rina/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rina {

using nlohmann::json;

namespace {

Duration ms_to_ns(double ms) {
    return static_cast<Duration>(std::llround(ms * 1e6));
}

double ns_to_ms(Duration ns) {
    return static_cast<double>(ns) / 1e6;
}

Apn parse_apn(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Apn{s, ""};
    return Apn{s.substr(0, slash), s.substr(slash + 1)};
}

struct Ctx {
    std::vector<std::string>& diags;

    void err(const std::string& path, const std::string& msg) {
        diags.push_back(path + ": " + msg);
    }

    bool require(bool cond, const std::string& path, const std::string& msg) {
        if (!cond) err(path, msg);
        return cond;
    }
};

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

QosRequirements parse_qos_req(const json& j) {
    QosRequirements q;
    q.reliable = get_opt<bool>(j, "reliable");
    q.ordered = get_opt<bool>(j, "ordered");
    if (auto ms = get_opt<double>(j, "max_delay_ms")) q.max_delay = ms_to_ns(*ms);
    q.avg_bandwidth = get_opt<std::int64_t>(j, "avg_bandwidth_bps");
    return q;
}

}  // namespace

ParseResult parse_scenario(const std::string& text) {
    ParseResult result;
    auto& diags = result.diagnostics;
    Ctx c{diags};

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        diags.push_back(std::string("/: ParseError: ") + e.what());
        return result;
    }
    if (!j.is_object()) {
        diags.push_back("/: ParseError: top level must be an object");
        return result;
    }

    Scenario s;
    try {
        s.name = j.value("name", std::string{});
        if (s.name.empty()) c.err("/name", "required non-empty string");
        s.seed = j.value("seed", std::uint64_t{1});
        s.stop_time = static_cast<SimTime>(std::llround(j.value("stop_time_s", 60.0) * 1e9));
        c.require(s.stop_time > 0, "/stop_time_s", "must be > 0");

        // --- qos cubes
        std::set<QosId> cube_ids;
        for (std::size_t i = 0; i < j.value("qos_cubes", json::array()).size(); ++i) {
            const json& cj = j["qos_cubes"][i];
            const std::string path = "/qos_cubes/" + std::to_string(i);
            QosCube cube;
            cube.id = cj.value("id", 0);
            c.require(cube.id >= 1, path + "/id", "cube id must be >= 1 (0 is reserved)");
            c.require(cube_ids.insert(cube.id).second, path + "/id", "duplicate cube id");
            cube.reliable = cj.value("reliable", false);
            cube.ordered = cj.value("ordered", false);
            if (auto ms = get_opt<double>(cj, "max_delay_ms")) {
                c.require(*ms > 0, path + "/max_delay_ms", "must be > 0 when present");
                cube.max_delay = ms_to_ns(*ms);
            }
            if (auto bw = get_opt<std::int64_t>(cj, "avg_bandwidth_bps")) {
                c.require(*bw > 0, path + "/avg_bandwidth_bps", "must be > 0 when present");
                cube.avg_bandwidth = *bw;
            }
            s.qos_cubes.push_back(cube);
        }
        c.require(!s.qos_cubes.empty(), "/qos_cubes", "at least one QoS cube required");

        // --- difs
        std::set<std::string> dif_names;
        for (std::size_t i = 0; i < j.value("difs", json::array()).size(); ++i) {
            const json& dj = j["difs"][i];
            const std::string path = "/difs/" + std::to_string(i);
            DifConfig d;
            d.name = dj.value("name", std::string{});
            c.require(!d.name.empty(), path + "/name", "required");
            c.require(dif_names.insert(d.name).second, path + "/name", "duplicate dif name");
            d.rank = dj.value("rank", 0);
            c.require(d.rank >= 0, path + "/rank", "must be >= 0");
            const double mpl = dj.value("mpl_ms", 0.0);
            const double a = dj.value("a_timer_ms", 0.0);
            const double r = dj.value("r_timer_ms", 0.0);
            c.require(mpl > 0, path + "/mpl_ms", "must be > 0");
            c.require(a > 0, path + "/a_timer_ms", "must be > 0");
            c.require(r > 0, path + "/r_timer_ms", "must be > 0");
            d.timers.mpl = ms_to_ns(mpl);
            d.timers.a_timer = ms_to_ns(a);
            d.timers.r_timer = ms_to_ns(r);
            d.timers.sender_discard_multiple = dj.value("sender_discard_multiple", 3);
            d.timers.receiver_discard_multiple = dj.value("receiver_discard_multiple", 2);
            for (const char* key : {"sender_discard_multiple", "receiver_discard_multiple"}) {
                const int v = dj.value(key, std::string(key)[0] == 's' ? 3 : 2);
                c.require(v == 2 || v == 3, path + "/" + key, "must be 2 or 3");
            }
            d.rto = dj.contains("rto_ms") ? ms_to_ns(dj["rto_ms"].get<double>())
                                          : d.timers.r_timer / 4;
            c.require(d.rto > 0, path + "/rto_ms", "must be > 0");
            const Duration ten_delta = 10 * d.timers.delta_t();
            d.allocate_timeout = dj.contains("allocate_timeout_ms")
                                     ? ms_to_ns(dj["allocate_timeout_ms"].get<double>())
                                     : ten_delta;
            d.enroll_timeout = dj.contains("enroll_timeout_ms")
                                   ? ms_to_ns(dj["enroll_timeout_ms"].get<double>())
                                   : ten_delta;
            d.queue_capacity = dj.value("queue_capacity", 64);
            c.require(d.queue_capacity >= 1, path + "/queue_capacity", "must be >= 1");
            d.max_pdu_payload = dj.value("max_pdu_payload_bytes", 1024);
            c.require(d.max_pdu_payload >= 1, path + "/max_pdu_payload_bytes", "must be >= 1");
            d.auth = dj.value("auth", std::string{});
            d.routing_policy = dj.value("routing_policy", std::string{"link-state"});
            c.require(d.routing_policy == "link-state", path + "/routing_policy",
                      "unknown policy (only 'link-state' ships)");
            d.scheduling_policy = dj.value("scheduling_policy", std::string{"fifo"});
            c.require(d.scheduling_policy == "fifo", path + "/scheduling_policy",
                      "unknown policy (only 'fifo' ships)");
            if (dj.contains("cube_ids")) {
                for (const auto& idj : dj["cube_ids"]) {
                    const QosId id = idj.get<QosId>();
                    bool found = false;
                    for (const auto& cube : s.qos_cubes) {
                        if (cube.id == id) {
                            d.cubes.push_back(cube);
                            found = true;
                        }
                    }
                    c.require(found, path + "/cube_ids", "unknown cube id " + std::to_string(id));
                }
            } else {
                d.cubes = s.qos_cubes;
            }
            s.difs.push_back(std::move(d));
        }
        c.require(!s.difs.empty(), "/difs", "at least one dif required");

        // --- nodes
        std::set<std::string> node_names, ipcp_names;
        std::map<std::string, std::set<Address>> addr_per_dif;
        for (std::size_t i = 0; i < j.value("nodes", json::array()).size(); ++i) {
            const json& nj = j["nodes"][i];
            const std::string path = "/nodes/" + std::to_string(i);
            Scenario::NodeDecl n;
            n.name = nj.value("name", std::string{});
            c.require(!n.name.empty(), path + "/name", "required");
            c.require(node_names.insert(n.name).second, path + "/name", "duplicate node name");
            const std::string kind = nj.value("kind", std::string{"host"});
            if (kind == "host") {
                n.kind = NodeKind::kHost;
            } else if (kind == "interior-router") {
                n.kind = NodeKind::kInteriorRouter;
            } else if (kind == "border-router") {
                n.kind = NodeKind::kBorderRouter;
            } else {
                c.err(path + "/kind", "unknown kind '" + kind + "'");
            }
            std::set<std::string> difs_on_node;
            std::set<int> ranks;
            for (std::size_t k = 0; k < nj.value("ipcps", json::array()).size(); ++k) {
                const json& ij = nj["ipcps"][k];
                const std::string ipath = path + "/ipcps/" + std::to_string(k);
                Scenario::IpcpDecl ip;
                ip.name = ij.value("name", std::string{});
                c.require(!ip.name.empty(), ipath + "/name", "required");
                c.require(ipcp_names.insert(ip.name).second, ipath + "/name",
                          "ipcp names must be globally unambiguous");
                ip.dif = ij.value("dif", std::string{});
                const DifConfig* dif = s.dif(ip.dif);
                if (!c.require(dif != nullptr, ipath + "/dif", "unknown dif '" + ip.dif + "'")) {
                    continue;
                }
                c.require(difs_on_node.insert(ip.dif).second, ipath + "/dif",
                          "a node joins a dif at most once");
                ranks.insert(dif->rank);
                ip.address = ij.value("address", 0u);
                c.require(ip.address >= 1, ipath + "/address", "must be >= 1 (0 is unset)");
                c.require(addr_per_dif[ip.dif].insert(ip.address).second, ipath + "/address",
                          "address must be unambiguous within dif " + ip.dif);
                if (ij.contains("over")) {
                    for (const auto& o : ij["over"]) ip.over.push_back(o.get<std::string>());
                }
                n.ipcps.push_back(std::move(ip));
            }
            const std::size_t rank_count = ranks.size();
            switch (n.kind) {
                case NodeKind::kHost:
                case NodeKind::kInteriorRouter:
                    c.require(rank_count >= 2, path,
                              std::string(to_string(n.kind)) +
                                  " must have >= 2 DIF ranks represented");
                    break;
                case NodeKind::kBorderRouter:
                    c.require(rank_count >= 3, path,
                              "border-router must have >= 3 DIF ranks represented");
                    break;
            }
            s.nodes.push_back(std::move(n));
        }
        c.require(!s.nodes.empty(), "/nodes", "at least one node required");

        // stacking: resolve `over` lists, defaulting to every next-lower-rank
        // ipcp on the node, and check the non-bottom rule.
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            auto& n = s.nodes[i];
            for (std::size_t k = 0; k < n.ipcps.size(); ++k) {
                auto& ip = n.ipcps[k];
                const DifConfig* dif = s.dif(ip.dif);
                if (!dif) continue;
                const std::string ipath =
                    "/nodes/" + std::to_string(i) + "/ipcps/" + std::to_string(k);
                if (dif->rank == 0) {
                    c.require(ip.over.empty(), ipath + "/over",
                              "bottom (rank 0) ipcps sit on the medium, not on lower ipcps");
                    continue;
                }
                if (ip.over.empty()) {
                    for (const auto& other : n.ipcps) {
                        const DifConfig* od = s.dif(other.dif);
                        if (od && od->rank == dif->rank - 1) ip.over.push_back(other.name);
                    }
                }
                c.require(!ip.over.empty(), ipath,
                          "non-bottom ipcp must sit above >= 1 ipcp of the next lower rank");
                for (const auto& o : ip.over) {
                    bool found = false;
                    for (const auto& other : n.ipcps) {
                        if (other.name != o) continue;
                        found = true;
                        const DifConfig* od = s.dif(other.dif);
                        c.require(od && od->rank == dif->rank - 1, ipath + "/over",
                                  "'" + o + "' is not of rank " + std::to_string(dif->rank - 1));
                    }
                    c.require(found, ipath + "/over", "'" + o + "' is not an ipcp on this node");
                }
            }
        }

        // --- links
        auto find_ipcp = [&s](const std::string& node,
                              const std::string& ipcp) -> const Scenario::IpcpDecl* {
            for (const auto& n : s.nodes) {
                if (n.name != node) continue;
                for (const auto& ip : n.ipcps) {
                    if (ip.name == ipcp) return &ip;
                }
            }
            return nullptr;
        };
        auto split_ref = [](const std::string& ref) -> std::pair<std::string, std::string> {
            auto dot = ref.find('.');
            if (dot == std::string::npos) return {ref, ""};
            return {ref.substr(0, dot), ref.substr(dot + 1)};
        };
        for (std::size_t i = 0; i < j.value("links", json::array()).size(); ++i) {
            const json& lj = j["links"][i];
            const std::string path = "/links/" + std::to_string(i);
            Scenario::LinkDecl l;
            std::tie(l.a_node, l.a_ipcp) = split_ref(lj.value("a", std::string{}));
            std::tie(l.b_node, l.b_ipcp) = split_ref(lj.value("b", std::string{}));
            const auto* a = find_ipcp(l.a_node, l.a_ipcp);
            const auto* b = find_ipcp(l.b_node, l.b_ipcp);
            c.require(a != nullptr, path + "/a", "unknown endpoint");
            c.require(b != nullptr, path + "/b", "unknown endpoint");
            if (a && b) {
                const DifConfig *da = s.dif(a->dif), *db = s.dif(b->dif);
                c.require(da && da->rank == 0, path + "/a", "links join rank-0 (bottom) ipcps");
                c.require(db && db->rank == 0, path + "/b", "links join rank-0 (bottom) ipcps");
                c.require(a->dif == b->dif, path, "link endpoints must share a dif");
            }
            l.rate_bps = lj.value("rate_bps", std::int64_t{0});
            c.require(l.rate_bps > 0, path + "/rate_bps", "must be > 0");
            l.delay = ms_to_ns(lj.value("delay_ms", 0.0));
            c.require(l.delay >= 0, path + "/delay_ms", "must be >= 0");
            l.ber = lj.value("ber", 0.0);
            c.require(l.ber >= 0.0 && l.ber <= 1.0, path + "/ber", "must be in [0,1]");
            l.metric = lj.value("metric", 1u);
            c.require(l.metric >= 1, path + "/metric", "must be >= 1");
            s.links.push_back(std::move(l));
        }

        // --- apps
        std::set<std::string> app_apns;
        for (std::size_t i = 0; i < j.value("apps", json::array()).size(); ++i) {
            const json& aj = j["apps"][i];
            const std::string path = "/apps/" + std::to_string(i);
            Scenario::AppDecl a;
            a.node = aj.value("node", std::string{});
            const Scenario::NodeDecl* host = nullptr;
            for (const auto& n : s.nodes) {
                if (n.name == a.node) host = &n;
            }
            c.require(host != nullptr, path + "/node", "unknown node '" + a.node + "'");
            if (host) {
                c.require(host->kind == NodeKind::kHost, path + "/node",
                          "applications run on host nodes only");
            }
            a.apn = parse_apn(aj.value("apn", std::string{}));
            c.require(!a.apn.name.empty(), path + "/apn", "required");
            c.require(app_apns.insert(a.apn.full()).second, path + "/apn",
                      "application names must be globally unambiguous");
            c.require(!ipcp_names.count(a.apn.name), path + "/apn",
                      "collides with an ipcp name");
            a.role = aj.value("role", std::string{});
            const bool initiator = a.role == "ping-initiator";
            c.require(initiator || a.role == "ping-responder", path + "/role",
                      "role must be ping-initiator or ping-responder");
            if (initiator) {
                a.dst = parse_apn(aj.value("dst", std::string{}));
                c.require(!a.dst.name.empty(), path + "/dst", "initiator requires dst");
                a.count = aj.value("count", std::uint64_t{1});
                a.interval = ms_to_ns(aj.value("interval_ms", 1000.0));
                c.require(a.count <= 1 || a.interval > 0, path + "/interval_ms",
                          "must be > 0 when count > 1");
                a.payload_bytes = aj.value("payload_bytes", 64u);
                c.require(a.payload_bytes >= kPingMsgBytes, path + "/payload_bytes",
                          "must be >= " + std::to_string(kPingMsgBytes));
                a.sample_timeout = ms_to_ns(aj.value("sample_timeout_ms", 1000.0));
                c.require(a.sample_timeout > 0, path + "/sample_timeout_ms", "must be > 0");
                if (aj.contains("qos")) {
                    a.qos = parse_qos_req(aj["qos"]);
                    c.require(!a.qos.max_delay || *a.qos.max_delay > 0,
                              path + "/qos/max_delay_ms", "must be > 0 when present");
                }
            }
            a.start_at = ms_to_ns(aj.value("start_ms", 0.0));
            c.require(a.start_at >= 0, path + "/start_ms", "must be >= 0");
            a.deny = aj.value("deny", false);
            s.apps.push_back(std::move(a));
        }

        // --- da directory
        for (std::size_t i = 0; i < j.value("da_directory", json::array()).size(); ++i) {
            const json& ej = j["da_directory"][i];
            const std::string path = "/da_directory/" + std::to_string(i);
            Scenario::DaDecl e;
            e.apn = parse_apn(ej.value("apn", std::string{}));
            e.dif = ej.value("dif", std::string{});
            e.node = ej.value("node", std::string{});
            c.require(s.dif(e.dif) != nullptr, path + "/dif", "unknown dif");
            c.require(node_names.count(e.node) > 0, path + "/node", "unknown node");
            bool member = false;
            for (const auto& n : s.nodes) {
                if (n.name != e.node) continue;
                for (const auto& ip : n.ipcps) {
                    if (ip.dif == e.dif) member = true;
                }
            }
            c.require(member, path, "node '" + e.node + "' has no ipcp in dif '" + e.dif + "'");
            s.da_directory.push_back(std::move(e));
        }
        for (const auto& a : s.apps) {
            bool listed = false;
            for (const auto& e : s.da_directory) {
                if (e.apn == a.apn) listed = true;
            }
            c.require(listed, "/da_directory",
                      "app '" + a.apn.full() + "' must appear in the directory");
        }

        // Stacked DIFs carry (N-1) flows requested reliable+ordered, so they
        // must offer such a cube.
        std::set<std::string> lower_difs;
        for (const auto& n : s.nodes) {
            for (const auto& ip : n.ipcps) {
                for (const auto& lower_name : ip.over) {
                    for (const auto& other : n.ipcps) {
                        if (other.name == lower_name) lower_difs.insert(other.dif);
                    }
                }
            }
        }
        for (const auto& dn : lower_difs) {
            const DifConfig* d = s.dif(dn);
            if (!d) continue;
            bool has_reliable = false;
            for (const auto& cube : d->cubes) {
                if (cube.reliable && cube.ordered) has_reliable = true;
            }
            c.require(has_reliable, "/difs",
                      "dif '" + dn + "' carries (N-1) flows and must offer a reliable+ordered cube");
        }
    } catch (const json::exception& e) {
        diags.push_back(std::string("/: ParseError: ") + e.what());
        return result;
    }

    if (!diags.empty()) return result;
    result.scenario = std::move(s);
    return result;
}

ParseResult parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back("/: cannot open file: " + path);
        return r;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string emit_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["stop_time_s"] = static_cast<double>(s.stop_time) / 1e9;
    j["qos_cubes"] = json::array();
    for (const auto& cube : s.qos_cubes) {
        json cj;
        cj["id"] = cube.id;
        cj["reliable"] = cube.reliable;
        cj["ordered"] = cube.ordered;
        if (cube.max_delay) cj["max_delay_ms"] = ns_to_ms(*cube.max_delay);
        if (cube.avg_bandwidth) cj["avg_bandwidth_bps"] = *cube.avg_bandwidth;
        j["qos_cubes"].push_back(cj);
    }
    j["difs"] = json::array();
    for (const auto& d : s.difs) {
        json dj;
        dj["name"] = d.name;
        dj["rank"] = d.rank;
        dj["mpl_ms"] = ns_to_ms(d.timers.mpl);
        dj["a_timer_ms"] = ns_to_ms(d.timers.a_timer);
        dj["r_timer_ms"] = ns_to_ms(d.timers.r_timer);
        dj["sender_discard_multiple"] = d.timers.sender_discard_multiple;
        dj["receiver_discard_multiple"] = d.timers.receiver_discard_multiple;
        dj["rto_ms"] = ns_to_ms(d.rto);
        dj["allocate_timeout_ms"] = ns_to_ms(d.allocate_timeout);
        dj["enroll_timeout_ms"] = ns_to_ms(d.enroll_timeout);
        dj["queue_capacity"] = d.queue_capacity;
        dj["max_pdu_payload_bytes"] = d.max_pdu_payload;
        if (!d.auth.empty()) dj["auth"] = d.auth;
        dj["routing_policy"] = d.routing_policy;
        dj["scheduling_policy"] = d.scheduling_policy;
        json ids = json::array();
        for (const auto& cube : d.cubes) ids.push_back(cube.id);
        dj["cube_ids"] = ids;
        j["difs"].push_back(dj);
    }
    j["nodes"] = json::array();
    for (const auto& n : s.nodes) {
        json nj;
        nj["name"] = n.name;
        nj["kind"] = to_string(n.kind);
        nj["ipcps"] = json::array();
        for (const auto& ip : n.ipcps) {
            json ij;
            ij["name"] = ip.name;
            ij["dif"] = ip.dif;
            ij["address"] = ip.address;
            if (!ip.over.empty()) ij["over"] = ip.over;
            nj["ipcps"].push_back(ij);
        }
        j["nodes"].push_back(nj);
    }
    j["links"] = json::array();
    for (const auto& l : s.links) {
        json lj;
        lj["a"] = l.a_node + "." + l.a_ipcp;
        lj["b"] = l.b_node + "." + l.b_ipcp;
        lj["rate_bps"] = l.rate_bps;
        lj["delay_ms"] = ns_to_ms(l.delay);
        lj["ber"] = l.ber;
        lj["metric"] = l.metric;
        j["links"].push_back(lj);
    }
    j["apps"] = json::array();
    for (const auto& a : s.apps) {
        json aj;
        aj["node"] = a.node;
        aj["apn"] = a.apn.full();
        aj["role"] = a.role;
        if (a.role == "ping-initiator") {
            aj["dst"] = a.dst.full();
            aj["count"] = a.count;
            aj["interval_ms"] = ns_to_ms(a.interval);
            aj["payload_bytes"] = a.payload_bytes;
            aj["sample_timeout_ms"] = ns_to_ms(a.sample_timeout);
            json qj = json::object();
            if (a.qos.reliable) qj["reliable"] = *a.qos.reliable;
            if (a.qos.ordered) qj["ordered"] = *a.qos.ordered;
            if (a.qos.max_delay) qj["max_delay_ms"] = ns_to_ms(*a.qos.max_delay);
            if (a.qos.avg_bandwidth) qj["avg_bandwidth_bps"] = *a.qos.avg_bandwidth;
            aj["qos"] = qj;
        }
        aj["start_ms"] = ns_to_ms(a.start_at);
        if (a.deny) aj["deny"] = true;
        j["apps"].push_back(aj);
    }
    j["da_directory"] = json::array();
    for (const auto& e : s.da_directory) {
        json ej;
        ej["apn"] = e.apn.full();
        ej["dif"] = e.dif;
        ej["node"] = e.node;
        j["da_directory"].push_back(ej);
    }
    return j.dump(2);
}

}  // namespace rina
