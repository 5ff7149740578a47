#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "rina/engine.hpp"
#include "rina/ids.hpp"
#include "rina/pdu.hpp"
#include "rina/trace.hpp"

namespace rina {

// Watson timer bounds. Delta-t is always derived, never stored.
struct DeltaTParams {
    Duration mpl = 0;
    Duration a_timer = 0;
    Duration r_timer = 0;
    int sender_discard_multiple = 3;    // 2 or 3
    int receiver_discard_multiple = 2;  // 2 or 3

    Duration delta_t() const { return mpl + a_timer + r_timer; }
};

struct EfcpConfig {
    DeltaTParams timers;
    Duration rto = 0;  // retransmission interval; parser defaults it to r_timer/4
    std::size_t max_pdu_payload = 1024;
    bool reliable = false;
    bool ordered = false;
    std::optional<std::int64_t> rate_limit_bps;  // cube avg_bandwidth, when set
};

// One EFCP instance per flow endpoint. DTP (tightly bound): fragmentation,
// reassembly, sequencing. DTCP (loosely bound): cumulative acks with A-timer
// coalescing, per-PDU retransmission bounded by the R-timer, and token-bucket
// rate limiting. Both halves of the state vector are soft: after enough idle
// Delta-t periods they are discarded, which resets sequencing but leaves the
// flow's port bindings untouched.
class Efcp {
  public:
    enum class Side { kSender, kReceiver };
    enum class DiscardVerdict { kKeep, kDiscard };

    struct Hooks {
        std::function<void(Pdu)> emit;                   // to RMT egress
        std::function<void(Sdu)> deliver;                // complete SDU upward
        std::function<void(std::uint64_t)> flow_error;   // R-bound exhausted (seq)
    };

    Efcp(EventQueue& engine, Tracer& tracer, std::string node, std::string comp,
         Address local_addr, Address remote_addr, CepIdValue local_cep, QosId qos_id,
         EfcpConfig cfg, Hooks hooks);
    ~Efcp();

    Efcp(const Efcp&) = delete;
    Efcp& operator=(const Efcp&) = delete;

    void set_remote_cep(CepIdValue cep) { remote_cep_ = cep; }
    CepIdValue local_cep() const { return local_cep_; }
    CepIdValue remote_cep() const { return remote_cep_; }
    ConnectionId connection_id() const { return {local_cep_, remote_cep_, qos_id_}; }

    // Fragments the SDU into DATA PDUs with consecutive sequence numbers and
    // emits them, subject to the rate limiter. Returns the number of
    // fragments. Throws SimError("FlowNotAllocated...") before the remote
    // CEP is known.
    std::size_t send_sdu(Sdu sdu);

    // Entry point for every PDU addressed to this instance (DATA and ACK).
    void receive(const Pdu& pdu);

    // keep|discard decision for one side at time `now`; pure, used by the
    // idle timer and directly by tests.
    DiscardVerdict check_state_discard(Side side, SimTime now) const;

    // Cancels every pending timer. Must be called before destruction.
    void close();

    // Introspection.
    std::size_t rtx_queue_size() const { return rtx_.size(); }
    std::uint64_t next_send_seq() const { return next_send_seq_; }
    std::uint64_t highest_acked() const { return highest_acked_; }
    std::uint64_t next_expected_seq() const { return next_expected_; }
    bool send_half_open() const { return send_open_; }
    bool recv_half_open() const { return recv_open_; }
    std::uint64_t retransmission_count() const { return rtx_count_; }
    std::uint64_t sdus_delivered() const { return sdus_delivered_; }
    std::uint64_t sdus_submitted() const { return sdus_submitted_; }
    bool errored() const { return errored_; }

  private:
    struct RtxEntry {
        Pdu pdu;
        SimTime first_sent_at = 0;
        int retries = 0;
        EventHandle rto_event;
    };

    struct Reassembly {
        std::map<std::uint32_t, Sdu> parts;  // offset -> bytes
        bool have_last = false;
        std::uint32_t end_offset = 0;  // one past the final byte once last seen
    };

    void emit_data_pdu(Pdu pdu, bool is_retransmission);
    void drain_limiter();
    Duration limiter_wait(std::int64_t cost_bits) const;
    void limiter_refill();
    void accept_in_order(const Pdu& pdu);
    void feed_reassembly(const Pdu& pdu);
    void schedule_ack();
    void send_ack_now();
    void on_rto(std::uint64_t seq);
    void touch_send_half();
    void touch_recv_half();
    void arm_idle_check(Side side);
    void run_idle_check(Side side);
    void discard_half(Side side);
    void trace(const std::string& ev, std::vector<std::pair<std::string, std::string>> kv);

    EventQueue& engine_;
    Tracer& tracer_;
    std::string node_;
    std::string comp_;
    Address local_addr_;
    Address remote_addr_;
    CepIdValue local_cep_;
    CepIdValue remote_cep_ = 0;
    QosId qos_id_;
    EfcpConfig cfg_;
    Hooks hooks_;

    // send half
    bool send_open_ = false;
    std::uint64_t next_send_seq_ = 1;
    std::uint32_t next_sdu_id_ = 1;
    std::uint64_t highest_acked_ = 0;
    std::map<std::uint64_t, RtxEntry> rtx_;
    // Run-opener conservatism: until the first PDU of a send-run is acked,
    // later PDUs wait here. A receiver with discarded state treats whatever
    // seq arrives first as the new baseline, so the opener must be the true
    // start of the run or a lost opener would be skipped for good.
    std::deque<Pdu> opener_queue_;
    SimTime send_last_activity_ = 0;
    EventHandle send_idle_check_;
    // rate limiter: token balance scaled by 1e9 so refills are exact integers
    std::int64_t tokens_scaled_ = 0;
    SimTime tokens_refilled_at_ = 0;
    std::deque<Pdu> limiter_queue_;
    EventHandle limiter_event_;

    // receive half
    bool recv_open_ = false;
    std::uint64_t next_expected_ = 1;
    std::map<std::uint64_t, Pdu> out_of_order_;
    std::map<std::uint32_t, Reassembly> reassembly_;
    SimTime recv_last_activity_ = 0;
    EventHandle recv_idle_check_;
    bool ack_pending_ = false;
    EventHandle ack_event_;

    bool errored_ = false;
    bool closed_ = false;
    std::uint64_t rtx_count_ = 0;
    std::uint64_t sdus_delivered_ = 0;
    std::uint64_t sdus_submitted_ = 0;
};

}  // namespace rina
