// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion runs a shipped scenario (or a programmatic batch)
// and checks the trace, metrics and registries against independently
// computed expectations.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rina/error.hpp"
#include "rina/network.hpp"
#include "rina/pdu.hpp"
#include "rina/rmt.hpp"
#include "rina/scenario.hpp"

using namespace rina;

namespace {

const std::string kDir = TEST_SCENARIO_DIR;

struct Run {
    Scenario scenario;
    std::vector<TraceEvent> trace;
    RunSummary summary;
    std::vector<std::pair<std::string, PingSample>> samples;
    std::string trace_text;
    double wall_seconds = 0;
};

}  // namespace

namespace {

Run run_scenario(const Scenario& s, std::optional<std::uint64_t> seed = {}) {
    Run out;
    out.scenario = s;
    Network net(s, seed);
    std::ostringstream text;
    net.tracer().add_sink([&out, &text](const TraceEvent& e) {
        out.trace.push_back(e);
        text << e.line() << '\n';
    });
    const auto t0 = std::chrono::steady_clock::now();
    out.summary = net.run();
    const auto t1 = std::chrono::steady_clock::now();
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.samples = net.collect_samples();
    out.trace_text = text.str();
    return out;
}

Run run_file(const std::string& file, std::optional<std::uint64_t> seed = {}) {
    auto parsed = parse_scenario_file(kDir + file);
    if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics) std::cerr << d << "\n";
        throw SimError("fixture failed to parse: " + file);
    }
    return run_scenario(*parsed.scenario, seed);
}

struct Checker {
    int failures = 0;

    void report(int criterion, const std::string& what, bool ok,
                const std::string& detail = {}) {
        std::printf("%s  criterion %d: %s%s\n", ok ? "PASS" : "FAIL", criterion, what.c_str(),
                    detail.empty() ? "" : ("  [" + detail + "]").c_str());
        if (!ok) ++failures;
    }
};

std::string comp_ipcp(const std::string& comp) {
    auto dot = comp.find('.');
    return dot == std::string::npos ? comp : comp.substr(0, dot);
}

// index of the first event matching pred, or -1
long first_idx(const std::vector<TraceEvent>& tr,
               const std::function<bool(const TraceEvent&)>& pred, long from = 0) {
    for (long i = from; i < static_cast<long>(tr.size()); ++i) {
        if (pred(tr[i])) return i;
    }
    return -1;
}

}  // namespace

// --------------------------------------------------------------- criterion 1

void criterion1(Checker& c) {
    Run r = run_file("/relay_ping.json");
    const auto& tr = r.trace;
    std::ostringstream why;
    bool ok = true;

    // Generic five-phase scan: for every (ipcp, peer) that carries a data
    // CreateFlowRequest, the management flow came up first, enrollment
    // reached ENROLLED next, and only then was the request sent.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : tr) {
        if (e.ev == "RIBD_SEND" && e.get("kind") == "CreateFlowRequest") {
            pairs.insert({comp_ipcp(e.comp), e.get("dst")});
        }
    }
    if (pairs.empty()) {
        ok = false;
        why << "no CreateFlowRequest seen;";
    }
    for (const auto& [ipcp, peer] : pairs) {
        const long i_req = first_idx(tr, [&](const TraceEvent& e) {
            return e.ev == "RIBD_SEND" && e.get("kind") == "CreateFlowRequest" &&
                   comp_ipcp(e.comp) == ipcp && e.get("dst") == peer;
        });
        const long i_up = first_idx(tr, [&](const TraceEvent& e) {
            return e.ev == "MGMT_FLOW_UP" && comp_ipcp(e.comp) == ipcp && e.get("peer") == peer;
        });
        const long i_enr = first_idx(tr, [&](const TraceEvent& e) {
            return e.ev == "ENROLL_STATE" && comp_ipcp(e.comp) == ipcp &&
                   e.get("peer") == peer && e.get("new") == "ENROLLED";
        });
        if (i_up < 0 || i_up > i_req) {
            ok = false;
            why << ipcp << "->" << peer << " mgmt flow not up before request;";
        }
        if (i_enr < 0 || i_enr > i_req) {
            ok = false;
            why << ipcp << "->" << peer << " not enrolled before request;";
        }
        // Enrollment begins only after the management flow is available.
        const long i_mc = first_idx(tr, [&](const TraceEvent& e) {
            return e.ev == "RIBD_SEND" && e.get("kind") == "MConnect" &&
                   comp_ipcp(e.comp) == ipcp && e.get("dst") == peer;
        });
        if (i_mc >= 0 && i_mc < i_up) {
            ok = false;
            why << ipcp << "->" << peer << " MConnect before mgmt flow;";
        }
    }

    // hA1's management transport: the (N-1) flow allocation completed
    // before its first enrollment exchange went out.
    const long i_n1_up = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "RA_N1_ALLOC" && e.comp == "hA1.ra" && e.get("phase") == "up";
    });
    const long i_first_mc = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "RIBD_SEND" && e.comp == "hA1.ribd" && e.get("kind") == "MConnect";
    });
    if (i_n1_up < 0 || i_first_mc < 0 || i_n1_up > i_first_mc) {
        ok = false;
        why << "hA1 (N-1) alloc not before enrollment;";
    }

    // Every recursive (N-1) allocation completes before the port carries
    // anything: request has a matching up, up precedes first RMT_DEQ on it.
    for (long i = 0; i < static_cast<long>(tr.size()); ++i) {
        const auto& e = tr[i];
        if (e.ev != "RA_N1_ALLOC" || e.get("phase") != "request") continue;
        const std::string ipcp = comp_ipcp(e.comp);
        const long i_up2 = first_idx(tr, [&](const TraceEvent& f) {
            return f.ev == "RA_N1_ALLOC" && comp_ipcp(f.comp) == ipcp &&
                   f.get("peer") == e.get("peer") && f.get("phase") == "up";
        }, i);
        if (i_up2 < 0) {
            ok = false;
            why << "unfinished N1 alloc at " << ipcp << ";";
        }
    }

    // Positive CreateFlowResponse precedes the first data PDU of the flow.
    const long i_resp = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "RIBD_RECV" && e.comp == "hA1.ribd" &&
               e.get("kind") == "CreateFlowResponse" && e.get("result") == "+";
    });
    const long i_data = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "EFCP_SEND" && e.comp == "hA1.efcp" && e.get("kind") == "DATA";
    });
    if (i_resp < 0 || i_data < 0 || i_resp > i_data) {
        ok = false;
        why << "data before positive response;";
    }

    c.report(1, "five-phase allocation order on the two-host/one-router scenario", ok, why.str());
}

// --------------------------------------------------------------- criterion 2

void criterion2(Checker& c) {
    Run r = run_file("/relay_ping.json");
    const auto& tr = r.trace;
    std::ostringstream why;
    bool ok = true;

    const long i_rel = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "APP_RELEASE" && e.comp == "app.A";
    });
    const long i_dreq = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "RIBD_SEND" && e.comp == "hA1.ribd" &&
               e.get("kind") == "DeleteFlowRequest";
    });
    const long i_peer_down = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "FAI_STATE" && e.comp == "hB1.fa" && e.get("old") == "ALLOCATED" &&
               e.get("new") == "DEALLOCATED";
    });
    const long i_dresp = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "RIBD_SEND" && e.comp == "hB1.ribd" &&
               e.get("kind") == "DeleteFlowResponse";
    });
    const long i_init_done = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "FAI_STATE" && e.comp == "hA1.fa" &&
               e.get("old") == "DEALLOC_PENDING" && e.get("new") == "DEALLOCATED";
    });
    if (i_rel < 0 || i_dreq < 0 || i_peer_down < 0 || i_dresp < 0 || i_init_done < 0) {
        ok = false;
        why << "missing deallocation events;";
    } else if (!(i_rel < i_dreq && i_dreq < i_peer_down && i_peer_down <= i_dresp &&
                 i_dresp < i_init_done)) {
        ok = false;
        why << "order " << i_rel << "," << i_dreq << "," << i_peer_down << "," << i_dresp << ","
            << i_init_done << ";";
    }
    // The application on the far side heard the release before the teardown.
    const long i_rel_rx = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "APP_RECV" && e.comp == "app.B" && e.get("kind") == "release";
    });
    if (i_rel_rx < 0 || i_peer_down < 0 || i_rel_rx > i_peer_down) {
        ok = false;
        why << "peer app did not hear the release first;";
    }
    if (!r.summary.leak_check_ran || !r.summary.leak_check_ok) {
        ok = false;
        why << "leak check failed;";
        for (const auto& d : r.summary.leak_details) why << d << ";";
    }
    c.report(2, "three-phase deallocation order and zero-leak finish", ok, why.str());
}

// --------------------------------------------------------------- criterion 3

void criterion3(Checker& c) {
    auto parsed = parse_scenario_file(kDir + "/relay_ping.json");
    Scenario base = *parsed.scenario;
    std::ostringstream why;
    bool ok = true;
    for (std::size_t payload : {64u, 200u, 600u}) {
        Scenario s = base;
        s.apps[0].payload_bytes = payload;
        Run r = run_scenario(s);
        // One PDU per layer (no fragmentation): wire bits of the bottom PDU
        // carrying the request are 8 * (payload + two simulated headers).
        const std::int64_t bits = 8 * static_cast<std::int64_t>(payload + 2 * kPduHeaderBytes);
        Duration one_way = 0;
        for (const auto& l : s.links) {
            one_way += l.delay + transmission_ns(bits, l.rate_bps);
        }
        const Duration expect_rtt = 2 * one_way;
        if (r.samples.size() != s.apps[0].count) {
            ok = false;
            why << "payload " << payload << ": sample count " << r.samples.size() << ";";
            continue;
        }
        for (const auto& [apn, sample] : r.samples) {
            if (sample.lost || sample.rtt_ns != expect_rtt || sample.one_way_ns != one_way) {
                ok = false;
                why << "payload " << payload << ": rtt " << sample.rtt_ns << " != "
                    << expect_rtt << " or one-way " << sample.one_way_ns << " != " << one_way
                    << ";";
            }
        }
    }
    c.report(3, "analytic RTT equals 2*sum(delay + bits/rate) exactly for 3 payload sizes", ok,
             why.str());
}

// --------------------------------------------------------------- criterion 4

void criterion4(Checker& c) {
    Run r = run_file("/relay_lossy.json");
    std::ostringstream why;
    bool ok = true;

    std::vector<std::uint64_t> b_request_seqs;
    for (const auto& e : r.trace) {
        if (e.ev == "APP_RECV" && e.comp == "app.B" && e.get("kind") == "request") {
            b_request_seqs.push_back(std::stoull(e.get("seq")));
        }
    }
    const std::uint64_t n = r.scenario.apps[0].count;
    if (b_request_seqs.size() != n) {
        ok = false;
        why << "delivered " << b_request_seqs.size() << "/" << n << ";";
    }
    for (std::size_t i = 0; i < b_request_seqs.size(); ++i) {
        if (b_request_seqs[i] != i + 1) {
            ok = false;
            why << "order/dup violation at " << i << ";";
            break;
        }
    }
    std::size_t lost = 0;
    for (const auto& [apn, s] : r.samples) lost += s.lost;
    if (r.samples.size() != n || lost != 0) {
        ok = false;
        why << "samples " << r.samples.size() << " lost " << lost << ";";
    }
    auto counter = [&r](const std::string& k) {
        auto it = r.summary.counters.find(k);
        return it == r.summary.counters.end() ? std::uint64_t{0} : it->second;
    };
    std::uint64_t rtx = 0;
    for (const auto& [k, v] : r.summary.counters) {
        if (k.find("EFCP_RTX") != std::string::npos) rtx += v;
    }
    if (rtx == 0) {
        ok = false;
        why << "no retransmissions;";
    }
    if (counter("medium.MEDIUM_DROP") == 0) {
        ok = false;
        why << "no medium loss;";
    }
    if (r.wall_seconds >= 5.0) {
        ok = false;
        why << "runtime " << r.wall_seconds << "s;";
    }
    if (!r.summary.leak_check_ok) {
        ok = false;
        why << "leak;";
    }
    c.report(4, "reliable ordered flow under ~10% loss: 1000/1000 in order, rtx > 0, < 5 s", ok,
             why.str());
}

// --------------------------------------------------------------- criterion 5

void criterion5(Checker& c) {
    Run r = run_file("/relay_discard.json");
    const auto& tr = r.trace;
    std::ostringstream why;
    bool ok = true;

    const long i_first_data = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "EFCP_SEND" && e.comp == "hA1.efcp" && e.get("kind") == "DATA";
    });
    const long i_release = first_idx(tr, [](const TraceEvent& e) {
        return e.ev == "APP_RELEASE" && e.comp == "app.A";
    });
    const long i_discard = first_idx(tr, [&](const TraceEvent& e) {
        return e.ev == "EFCP_STATE_DISCARD" && e.comp == "hB1.efcp" &&
               e.get("side") == "receiver";
    }, std::max(0L, i_first_data));
    if (i_first_data < 0 || i_release < 0 || i_discard < 0 || i_discard > i_release) {
        ok = false;
        why << "no mid-flow receiver discard;";
    } else {
        // Discard fires exactly at receiver_multiple * delta_t of idle time.
        // Receiver-half activity is a DATA arrival or an ACK emission; an
        // arriving ACK touches only the send half.
        SimTime last_activity = -1;
        for (long i = i_discard - 1; i >= 0; --i) {
            if (tr[i].comp != "hB1.efcp") continue;
            if ((tr[i].ev == "EFCP_RECV" && tr[i].get("kind") == "DATA") ||
                tr[i].ev == "EFCP_ACK") {
                last_activity = tr[i].t;
                break;
            }
        }
        const DifConfig* top = r.scenario.dif("top");
        const Duration bound = top->timers.receiver_discard_multiple * top->timers.delta_t();
        if (last_activity < 0 || tr[i_discard].t - last_activity != bound) {
            ok = false;
            why << "discard after " << (tr[i_discard].t - last_activity) << " ns, want "
                << bound << ";";
        }
        // Port-ids unchanged across the discard: no PORT_* events in the
        // whole data phase.
        for (long i = i_first_data; i < i_release; ++i) {
            if (tr[i].ev == "PORT_ALLOC" || tr[i].ev == "PORT_FREE") {
                ok = false;
                why << "port change mid-flow;";
                break;
            }
        }
        // Subsequent traffic reopened a fresh state vector and completed.
        const long i_after = first_idx(tr, [](const TraceEvent& e) {
            return e.ev == "APP_RECV" && e.comp == "app.A" && e.get("kind") == "response";
        }, i_discard);
        if (i_after < 0) {
            ok = false;
            why << "no traffic completed after discard;";
        }
    }
    std::size_t lost = 0;
    for (const auto& [apn, s] : r.samples) lost += s.lost;
    if (r.samples.size() != r.scenario.apps[0].count || lost != 0) {
        ok = false;
        why << "samples incomplete;";
    }
    c.report(5, "idle receiver state discard at exactly 2*delta_t, flow survives", ok, why.str());
}

// --------------------------------------------------------------- criterion 6

void criterion6(Checker& c) {
    std::ostringstream why;
    bool ok = true;
    for (const char* file : {"/relay_ping.json", "/relay_lossy.json", "/border.json"}) {
        Run a = run_file(file);
        Run b = run_file(file);
        if (a.trace_text != b.trace_text) {
            ok = false;
            why << file << " not reproducible;";
        }
        if (a.trace_text.empty()) {
            ok = false;
            why << file << " empty trace;";
        }
    }
    Run lossy1 = run_file("/relay_lossy.json");
    Run lossy2 = run_file("/relay_lossy.json", 987654321);
    if (lossy1.trace_text == lossy2.trace_text) {
        ok = false;
        why << "different seeds produced identical lossy traces;";
    }
    c.report(6, "same seed -> byte-identical traces; different seed differs on lossy runs", ok,
             why.str());
}

// --------------------------------------------------------------- criterion 7

void criterion7(Checker& c) {
    Run r = run_file("/border.json");
    const auto& tr = r.trace;
    std::ostringstream why;
    bool ok = true;

    auto idx_of = [&](const char* comp, const char* phase, const char* via, long from = 0) {
        return first_idx(tr, [&](const TraceEvent& e) {
            return e.ev == "RA_N1_ALLOC" && e.comp == comp && e.get("phase") == phase &&
                   (via == nullptr || e.get("via") == via);
        }, from);
    };
    // Two nested (N-1) allocation descents on the initiator host: the top
    // IPCP needs a mid-DIF flow, which needs a bottom-DIF flow, which the
    // medium satisfies inherently.
    const long rq_top = idx_of("h1t.ra", "request", "midL");
    const long rq_mid = idx_of("h1m1.ra", "request", "botL");
    const long rq_bot = idx_of("h1b0.ra", "request", "medium");
    const long up_bot = idx_of("h1b0.ra", "up", "medium");
    const long up_mid = idx_of("h1m1.ra", "up", nullptr);
    const long up_top = idx_of("h1t.ra", "up", nullptr);
    if (rq_top < 0 || rq_mid < 0 || rq_bot < 0 || up_bot < 0 || up_mid < 0 || up_top < 0) {
        ok = false;
        why << "missing descent events " << rq_top << "," << rq_mid << "," << rq_bot << ","
            << up_bot << "," << up_mid << "," << up_top << ";";
    } else if (!(rq_top < rq_mid && rq_mid < rq_bot && rq_bot <= up_bot && up_bot < up_mid &&
                 up_mid < up_top)) {
        ok = false;
        why << "descents not nested: " << rq_top << "<" << rq_mid << "<" << rq_bot
            << "<=" << up_bot << "<" << up_mid << "<" << up_top << ";";
    }
    std::size_t lost = 0;
    for (const auto& [apn, s] : r.samples) lost += s.lost;
    if (r.samples.size() != r.scenario.apps[0].count || lost != 0) {
        ok = false;
        why << "ping incomplete over 3 ranks;";
    }
    if (!r.summary.leak_check_ok) {
        ok = false;
        why << "leak;";
    }
    c.report(7, "border-router scenario: two nested (N-1) descents ending at the medium", ok,
             why.str());
}

// --------------------------------------------------------------- criterion 8

namespace {

struct RandomTopology {
    int n = 0;
    std::map<std::pair<int, int>, std::uint32_t> edges;  // (lo,hi) -> metric
};

RandomTopology random_connected(std::mt19937& rng, int n) {
    RandomTopology t;
    t.n = n;
    for (int v = 2; v <= n; ++v) {
        const int u = 1 + static_cast<int>(rng() % (v - 1));
        t.edges[{u, v}] = 1 + rng() % 4;
    }
    const int extra = rng() % (n > 3 ? n : 2);
    for (int k = 0; k < extra; ++k) {
        int u = 1 + static_cast<int>(rng() % n), v = 1 + static_cast<int>(rng() % n);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (!t.edges.count({u, v})) t.edges[{u, v}] = 1 + rng() % 4;
    }
    return t;
}

Scenario topology_scenario(const RandomTopology& t) {
    Scenario s;
    s.name = "routing-rand";
    s.seed = 1;
    s.stop_time = from_sec(30);
    QosCube cube;
    cube.id = 1;
    cube.reliable = true;
    cube.ordered = true;
    s.qos_cubes = {cube};
    DifConfig bot;
    bot.name = "net";
    bot.rank = 0;
    bot.timers.mpl = from_ms(1);
    bot.timers.a_timer = from_ms(1);
    bot.timers.r_timer = from_ms(100);
    bot.rto = from_ms(20);
    bot.allocate_timeout = 10 * bot.timers.delta_t();
    bot.enroll_timeout = 10 * bot.timers.delta_t();
    bot.cubes = s.qos_cubes;
    DifConfig top = bot;
    top.name = "overlay";
    top.rank = 1;
    s.difs = {bot, top};
    for (int v = 1; v <= t.n; ++v) {
        Scenario::NodeDecl nd;
        nd.name = "n" + std::to_string(v);
        nd.kind = NodeKind::kHost;
        Scenario::IpcpDecl b;
        b.name = "b" + std::to_string(v);
        b.dif = "net";
        b.address = static_cast<Address>(v);
        Scenario::IpcpDecl o;
        o.name = "o" + std::to_string(v);
        o.dif = "overlay";
        o.address = static_cast<Address>(100 + v);
        o.over = {b.name};
        nd.ipcps = {b, o};
        s.nodes.push_back(nd);
    }
    for (const auto& [uv, metric] : t.edges) {
        Scenario::LinkDecl l;
        l.a_node = "n" + std::to_string(uv.first);
        l.a_ipcp = "b" + std::to_string(uv.first);
        l.b_node = "n" + std::to_string(uv.second);
        l.b_ipcp = "b" + std::to_string(uv.second);
        l.rate_bps = 10'000'000;
        l.delay = from_ms(1);
        l.ber = 0.0;
        l.metric = metric;
        s.links.push_back(l);
    }
    return s;
}

// Independent all-pairs oracle over the topology graph.
std::map<std::pair<int, int>, std::uint64_t> floyd_warshall(const RandomTopology& t) {
    constexpr std::uint64_t kInf = ~0ull / 4;
    std::map<std::pair<int, int>, std::uint64_t> d;
    for (int i = 1; i <= t.n; ++i) {
        for (int j = 1; j <= t.n; ++j) d[{i, j}] = i == j ? 0 : kInf;
    }
    for (const auto& [uv, m] : t.edges) {
        d[{uv.first, uv.second}] = std::min<std::uint64_t>(d[{uv.first, uv.second}], m);
        d[{uv.second, uv.first}] = d[{uv.first, uv.second}];
    }
    for (int k = 1; k <= t.n; ++k) {
        for (int i = 1; i <= t.n; ++i) {
            for (int j = 1; j <= t.n; ++j) {
                d[{i, j}] = std::min(d[{i, j}], d[{i, k}] + d[{k, j}]);
            }
        }
    }
    return d;
}

}  // namespace

void criterion8(Checker& c) {
    std::mt19937 rng(20260811);
    std::ostringstream why;
    bool ok = true;
    int checked_pairs = 0;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        RandomTopology topo = random_connected(rng, 3 + trial % 6);
        Scenario s = topology_scenario(topo);
        Network net(s);
        net.run();
        auto oracle = floyd_warshall(topo);
        auto metric = [&topo](int u, int v) {
            if (u > v) std::swap(u, v);
            return topo.edges.at({u, v});
        };
        for (int src = 1; src <= topo.n && ok; ++src) {
            for (int dst = 1; dst <= topo.n && ok; ++dst) {
                if (src == dst) continue;
                // Walk the installed next hops and accumulate the real cost.
                std::uint64_t cost = 0;
                int at = src;
                bool reached = false;
                for (int hops = 0; hops <= topo.n; ++hops) {
                    if (at == dst) {
                        reached = true;
                        break;
                    }
                    Ipcp* cur = net.ipcp("b" + std::to_string(at));
                    auto nh = cur->routing().next_hop(static_cast<Address>(dst));
                    if (!nh) break;
                    // The forwarding table must point at the (N-1) port of
                    // that very next hop, for every configured qos id.
                    auto port = cur->rmt().table().lookup(static_cast<Address>(dst), 1);
                    auto expect = cur->ra().port_to(*nh);
                    if (!port || !expect || *port != *expect) {
                        ok = false;
                        why << "table/port mismatch at b" << at << "->" << dst << ";";
                        break;
                    }
                    cost += metric(at, static_cast<int>(*nh));
                    at = static_cast<int>(*nh);
                }
                if (!ok) break;
                if (!reached || cost != oracle.at({src, dst})) {
                    ok = false;
                    why << "trial " << trial << " cost " << src << "->" << dst << " = " << cost
                        << " want " << oracle.at({src, dst}) << ";";
                }
                ++checked_pairs;
            }
        }
    }
    if (checked_pairs < 50) {
        ok = false;
        why << "too few pairs;";
    }
    c.report(8, "installed tables realize brute-force shortest-path costs on 50 topologies", ok,
             why.str());
}

// --------------------------------------------------------------- criterion 9

void criterion9(Checker& c) {
    std::ostringstream why;
    bool ok = true;

    // Encapsulation identity over 10^4 random PDUs.
    std::mt19937_64 rng(55);
    for (int i = 0; i < 10000; ++i) {
        Pdu p;
        p.src_addr = static_cast<Address>(rng());
        p.dst_addr = static_cast<Address>(rng());
        p.qos_id = static_cast<QosId>(rng());
        p.src_cep = static_cast<CepIdValue>(rng() & 0xffff);
        p.dst_cep = static_cast<CepIdValue>(rng() & 0xffff);
        p.kind = static_cast<PduKind>(1 + rng() % 3);
        p.last_fragment = rng() % 2;
        p.seq = rng();
        p.sdu_id = static_cast<std::uint32_t>(rng());
        p.frag_offset = static_cast<std::uint32_t>(rng());
        p.payload.resize(rng() % 500);
        for (auto& byte : p.payload) byte = static_cast<std::uint8_t>(rng());
        if (!(rmt_demux(rmt_mux(p)) == p)) {
            ok = false;
            why << "mux/demux mismatch at " << i << ";";
            break;
        }
    }

    // Exact per-rank counter reconciliation on every shipped scenario.
    for (const char* file : {"/relay_ping.json", "/relay_lossy.json", "/relay_discard.json",
                             "/border.json", "/twohost.json", "/deny.json",
                             "/slow_response.json", "/unknown_apn.json"}) {
        Run r = run_file(file);
        std::map<std::string, std::string> ipcp_dif;   // ipcp -> dif
        std::map<std::string, std::string> link_dif;   // link name -> dif
        std::map<std::string, int> dif_rank;
        for (const auto& nd : r.scenario.nodes) {
            for (const auto& ip : nd.ipcps) ipcp_dif[ip.name] = ip.dif;
        }
        for (const auto& d : r.scenario.difs) dif_rank[d.name] = d.rank;
        for (const auto& l : r.scenario.links) {
            link_dif[l.a_node + "." + l.a_ipcp + "-" + l.b_node + "." + l.b_ipcp] =
                ipcp_dif[l.a_ipcp];
        }
        std::map<std::string, std::int64_t> tx, rx, drop, med_tx, med_rx, med_drop;
        for (const auto& e : r.trace) {
            if (e.ev == "MEDIUM_TX" || e.ev == "MEDIUM_RX" || e.ev == "MEDIUM_DROP") {
                const std::string dif = link_dif[e.get("link")];
                (e.ev == "MEDIUM_TX" ? med_tx : e.ev == "MEDIUM_RX" ? med_rx : med_drop)[dif]++;
                continue;
            }
            const std::string dif = ipcp_dif.count(comp_ipcp(e.comp))
                                        ? ipcp_dif[comp_ipcp(e.comp)]
                                        : std::string{};
            if (dif.empty()) continue;
            if (e.ev == "EFCP_SEND" || e.ev == "EFCP_RTX" || e.ev == "EFCP_ACK" ||
                e.ev == "RIBD_SEND") {
                ++tx[dif];
            } else if (e.ev == "EFCP_RECV" || e.ev == "RIBD_RECV" ||
                       e.ev == "EFCP_UNKNOWN_CEP") {
                ++rx[dif];
            } else if (e.ev == "RMT_QUEUE_DROP" || e.ev == "RMT_NO_ROUTE") {
                ++drop[dif];
            }
        }
        for (const auto& d : r.scenario.difs) {
            if (dif_rank[d.name] == 0) {
                // sends = medium transmissions + rmt drops; medium conserves
                // every PDU as exactly one of delivered/dropped.
                if (tx[d.name] != med_tx[d.name] + drop[d.name] ||
                    med_tx[d.name] != med_rx[d.name] + med_drop[d.name] ||
                    rx[d.name] != med_rx[d.name]) {
                    ok = false;
                    why << file << " dif " << d.name << ": tx " << tx[d.name] << " med_tx "
                        << med_tx[d.name] << " med_rx " << med_rx[d.name] << " med_drop "
                        << med_drop[d.name] << " rmt_drop " << drop[d.name] << " rx "
                        << rx[d.name] << ";";
                }
            } else {
                // Upper ranks ride reliable (N-1) flows: every PDU sent is
                // received or dropped at a queue/forwarding decision.
                if (tx[d.name] != rx[d.name] + drop[d.name]) {
                    ok = false;
                    why << file << " dif " << d.name << ": tx " << tx[d.name] << " != rx "
                        << rx[d.name] << " + drop " << drop[d.name] << ";";
                }
            }
        }
    }
    c.report(9, "encapsulation identity (10^4 PDUs) and exact per-rank PDU accounting", ok,
             why.str());
}

int main() {
    Checker c;
    try {
        criterion1(c);
        criterion2(c);
        criterion3(c);
        criterion4(c);
        criterion5(c);
        criterion6(c);
        criterion7(c);
        criterion8(c);
        criterion9(c);
    } catch (const std::exception& e) {
        std::printf("FAIL  acceptance aborted: %s\n", e.what());
        return 1;
    }
    if (c.failures == 0) {
        std::printf("all 9 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", c.failures);
    return 1;
}
