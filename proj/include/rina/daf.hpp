#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rina/engine.hpp"
#include "rina/flow_alloc.hpp"
#include "rina/ids.hpp"
#include "rina/trace.hpp"

namespace rina {

class Network;
class Node;

// Static directory mapping application names to the DIFs and nodes where
// they can be found. Declaration order is the lookup order.
class DaDirectory {
  public:
    struct Entry {
        Apn apn;
        std::string dif;
        std::string node;
    };

    void add(Entry e) { entries_.push_back(std::move(e)); }
    std::vector<Entry> lookup(const Apn& apn) const {
        std::vector<Entry> out;
        for (const auto& e : entries_) {
            if (e.apn == apn) out.push_back(e);
        }
        return out;
    }
    const std::vector<Entry>& entries() const { return entries_; }

  private:
    std::vector<Entry> entries_;
};

// One ping latency record.
struct PingSample {
    std::uint64_t seq = 0;
    SimTime send_ns = 0;
    SimTime responder_recv_ns = 0;
    SimTime response_recv_ns = 0;
    Duration one_way_ns = 0;
    Duration rtt_ns = 0;
    bool lost = false;
};

// Ping application messages ride as ordinary SDU bytes. Fixed 25-byte record
// plus zero padding up to the configured payload size.
struct PingMsg {
    enum Kind : std::uint8_t { kRequest = 1, kResponse = 2, kRelease = 3 };
    std::uint8_t kind = kRequest;
    std::uint64_t seq = 0;
    SimTime send_ns = 0;
    SimTime recv_ns = 0;
};

inline constexpr std::size_t kPingMsgBytes = 25;

Sdu encode_ping(const PingMsg& m, std::size_t total_len);
std::optional<PingMsg> decode_ping(const Sdu& bytes);

class AppEntity {
  public:
    AppEntity(EventQueue& engine, Tracer& tracer, Network& net, Node& node, Apn apn)
        : engine_(engine), tracer_(tracer), net_(net), node_(node), apn_(std::move(apn)) {}
    virtual ~AppEntity() = default;

    const Apn& apn() const { return apn_; }
    std::string label() const { return "app:" + apn_.full(); }

    virtual void start() {}
    virtual FlowUser flow_user() = 0;
    virtual bool done() const { return true; }
    virtual std::vector<PingSample> samples() const { return {}; }
    virtual bool saw_flow_error() const { return false; }

  protected:
    void trace(const std::string& ev, std::vector<std::pair<std::string, std::string>> kv);

    EventQueue& engine_;
    Tracer& tracer_;
    Network& net_;
    Node& node_;
    Apn apn_;
};

struct PingConfig {
    Apn dst;
    QosRequirements qos;
    std::uint64_t count = 0;
    Duration interval = 0;
    std::size_t payload_bytes = 64;
    SimTime start_at = 0;
    Duration sample_timeout = from_ms(1000);
};

// Sends `count` requests at the configured interval, measures one-way and
// round-trip latency from the global simulated clock, then releases the
// connection at application level and deallocates the flow.
class PingInitiator : public AppEntity {
  public:
    PingInitiator(EventQueue& engine, Tracer& tracer, Network& net, Node& node, Apn apn,
                  PingConfig cfg)
        : AppEntity(engine, tracer, net, node, std::move(apn)), cfg_(std::move(cfg)) {}

    void start() override;
    FlowUser flow_user() override;
    bool done() const override { return done_; }
    std::vector<PingSample> samples() const override;
    bool saw_flow_error() const override { return flow_error_; }
    std::string alloc_error() const { return alloc_error_; }

  private:
    void on_allocated(PortIdValue port);
    void send_ping(std::uint64_t seq);
    void on_sdu(const Sdu& sdu);
    void on_sample_timeout(std::uint64_t seq);
    void maybe_finish();
    void finish();

    struct Pending {
        PingSample sample;
        bool resolved = false;
        EventHandle timeout;
    };

    PingConfig cfg_;
    std::optional<PortIdValue> port_;
    std::map<std::uint64_t, Pending> pending_;
    std::uint64_t sent_ = 0;
    bool finishing_ = false;
    bool done_ = false;
    bool flow_error_ = false;
    std::string alloc_error_;
};

// Echoes each request back with the same payload size, stamping its local
// receive time so the initiator can compute one-way latency.
class PingResponder : public AppEntity {
  public:
    PingResponder(EventQueue& engine, Tracer& tracer, Network& net, Node& node, Apn apn,
                  bool deny = false)
        : AppEntity(engine, tracer, net, node, std::move(apn)), deny_(deny) {}

    FlowUser flow_user() override;

  private:
    void on_sdu(PortIdValue port, const Sdu& sdu);

    bool deny_;
};

// IPC Resource Manager: delegates application (de)allocate calls to the
// right IPCP's flow allocator and tracks every app-visible flow.
class Irm {
  public:
    struct Entry {
        std::string ae_label;
        Apn remote;
        std::string status;  // pending | allocated
    };

    Irm(Network& net, Node& node) : net_(net), node_(node) {}

    void allocate(AppEntity& ae, const Apn& dst, const QosRequirements& reqs, AllocCallback cb);
    void deallocate(PortIdValue port, std::function<void()> done = {});

    // Responder-side bookkeeping: incoming flows enter and leave the table
    // through the app's flow-user callbacks.
    void note_incoming(PortIdValue port, const std::string& ae_label, const Apn& remote) {
        table_[port] = Entry{ae_label, remote, "allocated"};
    }
    void note_released(PortIdValue port) { table_.erase(port); }

    const std::map<PortIdValue, Entry>& table() const { return table_; }

  private:
    Network& net_;
    Node& node_;
    std::map<PortIdValue, Entry> table_;
};

}  // namespace rina
