#include "rina/efcp.hpp"

#include "rina/error.hpp"

namespace rina {

namespace {
constexpr std::int64_t kScale = 1'000'000'000;  // token units: bit-ns
}

Efcp::Efcp(EventQueue& engine, Tracer& tracer, std::string node, std::string comp,
           Address local_addr, Address remote_addr, CepIdValue local_cep, QosId qos_id,
           EfcpConfig cfg, Hooks hooks)
    : engine_(engine),
      tracer_(tracer),
      node_(std::move(node)),
      comp_(std::move(comp)),
      local_addr_(local_addr),
      remote_addr_(remote_addr),
      local_cep_(local_cep),
      qos_id_(qos_id),
      cfg_(cfg),
      hooks_(std::move(hooks)) {
    tokens_scaled_ = static_cast<std::int64_t>(cfg_.max_pdu_payload) * 8 * kScale;
    tokens_refilled_at_ = engine_.now();
}

Efcp::~Efcp() {
    close();
}

void Efcp::trace(const std::string& ev, std::vector<std::pair<std::string, std::string>> kv) {
    kv.insert(kv.begin(), {"cid", connection_id().str()});
    tracer_.emit(engine_.now(), node_, comp_, ev, std::move(kv));
}

std::size_t Efcp::send_sdu(Sdu sdu) {
    if (remote_cep_ == 0) {
        throw SimError("FlowNotAllocated: cep " + std::to_string(local_cep_) +
                       " has no remote endpoint yet");
    }
    if (sdu.empty()) {
        throw SimError("send_sdu: empty SDU");
    }
    ++sdus_submitted_;
    const std::uint32_t sdu_id = next_sdu_id_++;
    const std::size_t max_payload = cfg_.max_pdu_payload;
    const std::size_t fragments = (sdu.size() + max_payload - 1) / max_payload;

    for (std::size_t i = 0; i < fragments; ++i) {
        const std::size_t begin = i * max_payload;
        const std::size_t end = std::min(sdu.size(), begin + max_payload);
        Pdu p;
        p.src_addr = local_addr_;
        p.dst_addr = remote_addr_;
        p.qos_id = qos_id_;
        p.src_cep = local_cep_;
        p.dst_cep = remote_cep_;
        p.kind = PduKind::kData;
        p.seq = next_send_seq_++;
        p.sdu_id = sdu_id;
        p.frag_offset = static_cast<std::uint32_t>(begin);
        p.last_fragment = end == sdu.size();
        p.payload.assign(sdu.begin() + begin, sdu.begin() + end);
        if (cfg_.reliable && highest_acked_ == 0 && !rtx_.empty()) {
            opener_queue_.push_back(std::move(p));
        } else if (cfg_.rate_limit_bps) {
            limiter_queue_.push_back(std::move(p));
        } else {
            emit_data_pdu(std::move(p), false);
        }
    }
    if (cfg_.rate_limit_bps) drain_limiter();
    return fragments;
}

void Efcp::emit_data_pdu(Pdu pdu, bool is_retransmission) {
    const SimTime now = engine_.now();
    if (is_retransmission) {
        trace("EFCP_RTX", {{"seq", std::to_string(pdu.seq)},
                           {"bytes", std::to_string(pdu.payload.size())}});
    } else {
        trace("EFCP_SEND", {{"kind", "DATA"},
                            {"seq", std::to_string(pdu.seq)},
                            {"bytes", std::to_string(pdu.payload.size())}});
        if (cfg_.reliable) {
            RtxEntry e;
            e.pdu = pdu;
            e.first_sent_at = now;
            const std::uint64_t seq = pdu.seq;
            e.rto_event = engine_.schedule(now + cfg_.rto, [this, seq] { on_rto(seq); });
            rtx_.emplace(seq, std::move(e));
        }
    }
    touch_send_half();
    hooks_.emit(std::move(pdu));
}

Duration Efcp::limiter_wait(std::int64_t cost_scaled) const {
    if (tokens_scaled_ >= cost_scaled) return 0;
    const std::int64_t deficit = cost_scaled - tokens_scaled_;
    const std::int64_t rate = *cfg_.rate_limit_bps;
    return (deficit + rate - 1) / rate;  // ns until enough tokens accrue
}

void Efcp::limiter_refill() {
    const SimTime now = engine_.now();
    const std::int64_t capacity = static_cast<std::int64_t>(cfg_.max_pdu_payload) * 8 * kScale;
    const Duration elapsed = now - tokens_refilled_at_;
    const std::int64_t rate = *cfg_.rate_limit_bps;
    const std::int64_t deficit = capacity - tokens_scaled_;
    if (deficit > 0 && elapsed >= (deficit + rate - 1) / rate) {
        tokens_scaled_ = capacity;
    } else if (deficit > 0) {
        tokens_scaled_ += rate * elapsed;
        if (tokens_scaled_ > capacity) tokens_scaled_ = capacity;
    }
    tokens_refilled_at_ = now;
}

void Efcp::drain_limiter() {
    limiter_refill();
    while (!limiter_queue_.empty()) {
        const std::int64_t cost =
            static_cast<std::int64_t>(limiter_queue_.front().payload.size()) * 8 * kScale;
        if (tokens_scaled_ < cost) break;
        tokens_scaled_ -= cost;
        Pdu p = std::move(limiter_queue_.front());
        limiter_queue_.pop_front();
        emit_data_pdu(std::move(p), false);
    }
    if (!limiter_queue_.empty() && !limiter_event_.valid()) {
        const std::int64_t cost =
            static_cast<std::int64_t>(limiter_queue_.front().payload.size()) * 8 * kScale;
        limiter_event_ = engine_.schedule_in(limiter_wait(cost), [this] {
            limiter_event_ = {};
            drain_limiter();
        });
    }
}

void Efcp::receive(const Pdu& pdu) {
    trace("EFCP_RECV", {{"kind", to_string(pdu.kind)}, {"seq", std::to_string(pdu.seq)}});

    if (pdu.kind == PduKind::kAck) {
        if (!cfg_.reliable) return;
        const std::uint64_t ack = std::min(pdu.seq, next_send_seq_ - 1);
        touch_send_half();
        if (ack <= highest_acked_) return;  // stale, no-op
        for (auto it = rtx_.begin(); it != rtx_.end() && it->first <= ack;) {
            engine_.cancel(it->second.rto_event);
            it = rtx_.erase(it);
        }
        const bool run_opened = highest_acked_ == 0;
        highest_acked_ = ack;
        if (run_opened) {
            auto held = std::move(opener_queue_);
            opener_queue_.clear();
            for (auto& held_pdu : held) {
                if (cfg_.rate_limit_bps) {
                    limiter_queue_.push_back(std::move(held_pdu));
                } else {
                    emit_data_pdu(std::move(held_pdu), false);
                }
            }
            if (cfg_.rate_limit_bps) drain_limiter();
        }
        return;
    }
    if (pdu.kind != PduKind::kData) return;

    const bool was_open = recv_open_;
    touch_recv_half();
    if (!was_open) {
        // New-run opener: a DATA PDU arriving with no receiver state starts a
        // fresh state vector with the arriving seq as baseline.
        next_expected_ = pdu.seq;
        out_of_order_.clear();
        reassembly_.clear();
    }

    if (!cfg_.reliable) {
        feed_reassembly(pdu);
        return;
    }

    if (pdu.seq < next_expected_ || out_of_order_.count(pdu.seq)) {
        trace("EFCP_DUP", {{"seq", std::to_string(pdu.seq)}});
        schedule_ack();  // re-ack so a lost ACK cannot strand the sender
        return;
    }
    out_of_order_.emplace(pdu.seq, pdu);
    while (!out_of_order_.empty() && out_of_order_.begin()->first == next_expected_) {
        Pdu next = std::move(out_of_order_.begin()->second);
        out_of_order_.erase(out_of_order_.begin());
        accept_in_order(next);
    }
    schedule_ack();
}

void Efcp::accept_in_order(const Pdu& pdu) {
    ++next_expected_;
    feed_reassembly(pdu);
}

void Efcp::feed_reassembly(const Pdu& pdu) {
    Reassembly& r = reassembly_[pdu.sdu_id];
    r.parts[pdu.frag_offset] = pdu.payload;
    if (pdu.last_fragment) {
        r.have_last = true;
        r.end_offset = pdu.frag_offset + static_cast<std::uint32_t>(pdu.payload.size());
    }
    if (!r.have_last) return;
    std::uint32_t off = 0;
    for (const auto& [o, bytes] : r.parts) {
        if (o != off) return;
        off += static_cast<std::uint32_t>(bytes.size());
    }
    if (off != r.end_offset) return;
    Sdu sdu;
    sdu.reserve(off);
    for (const auto& [o, bytes] : r.parts) {
        sdu.insert(sdu.end(), bytes.begin(), bytes.end());
    }
    reassembly_.erase(pdu.sdu_id);
    ++sdus_delivered_;
    hooks_.deliver(std::move(sdu));
}

void Efcp::schedule_ack() {
    if (!cfg_.reliable || ack_pending_) return;
    ack_pending_ = true;
    ack_event_ = engine_.schedule_in(cfg_.timers.a_timer, [this] { send_ack_now(); });
}

void Efcp::send_ack_now() {
    ack_pending_ = false;
    ack_event_ = {};
    Pdu p;
    p.src_addr = local_addr_;
    p.dst_addr = remote_addr_;
    p.qos_id = qos_id_;
    p.src_cep = local_cep_;
    p.dst_cep = remote_cep_;
    p.kind = PduKind::kAck;
    p.seq = next_expected_ - 1;  // cumulative
    trace("EFCP_ACK", {{"ack", std::to_string(p.seq)}});
    touch_recv_half();
    hooks_.emit(std::move(p));
}

void Efcp::on_rto(std::uint64_t seq) {
    auto it = rtx_.find(seq);
    if (it == rtx_.end()) return;
    const SimTime now = engine_.now();
    if (now - it->second.first_sent_at < cfg_.timers.r_timer) {
        ++it->second.retries;
        ++rtx_count_;
        it->second.rto_event = engine_.schedule(now + cfg_.rto, [this, seq] { on_rto(seq); });
        emit_data_pdu(it->second.pdu, true);
        return;
    }
    // R bound exhausted: reliability cannot be met on this flow.
    trace("EFCP_FLOW_ERROR", {{"seq", std::to_string(seq)},
                              {"retries", std::to_string(it->second.retries)}});
    errored_ = true;
    for (auto& [s, e] : rtx_) engine_.cancel(e.rto_event);
    rtx_.clear();
    opener_queue_.clear();
    if (hooks_.flow_error) hooks_.flow_error(seq);
}

Efcp::DiscardVerdict Efcp::check_state_discard(Side side, SimTime now) const {
    if (side == Side::kSender) {
        if (!send_open_) return DiscardVerdict::kKeep;
        const Duration bound = cfg_.timers.sender_discard_multiple * cfg_.timers.delta_t();
        if (now - send_last_activity_ >= bound && rtx_.empty() && limiter_queue_.empty() &&
            opener_queue_.empty()) {
            return DiscardVerdict::kDiscard;
        }
        return DiscardVerdict::kKeep;
    }
    if (!recv_open_) return DiscardVerdict::kKeep;
    const Duration bound = cfg_.timers.receiver_discard_multiple * cfg_.timers.delta_t();
    return now - recv_last_activity_ >= bound ? DiscardVerdict::kDiscard : DiscardVerdict::kKeep;
}

void Efcp::touch_send_half() {
    send_last_activity_ = engine_.now();
    if (!send_open_) send_open_ = true;
    arm_idle_check(Side::kSender);
}

void Efcp::touch_recv_half() {
    recv_last_activity_ = engine_.now();
    if (!recv_open_) recv_open_ = true;
    arm_idle_check(Side::kReceiver);
}

void Efcp::arm_idle_check(Side side) {
    EventHandle& h = side == Side::kSender ? send_idle_check_ : recv_idle_check_;
    if (h.valid()) engine_.cancel(h);
    const int mult = side == Side::kSender ? cfg_.timers.sender_discard_multiple
                                           : cfg_.timers.receiver_discard_multiple;
    const SimTime base = side == Side::kSender ? send_last_activity_ : recv_last_activity_;
    h = engine_.schedule(base + mult * cfg_.timers.delta_t(), [this, side] { run_idle_check(side); });
}

void Efcp::run_idle_check(Side side) {
    if (closed_) return;
    (side == Side::kSender ? send_idle_check_ : recv_idle_check_) = {};
    if (check_state_discard(side, engine_.now()) == DiscardVerdict::kDiscard) {
        discard_half(side);
        return;
    }
    if (side == Side::kSender ? send_open_ : recv_open_) arm_idle_check(side);
}

void Efcp::discard_half(Side side) {
    trace("EFCP_STATE_DISCARD", {{"side", side == Side::kSender ? "sender" : "receiver"}});
    if (side == Side::kSender) {
        send_open_ = false;
        next_send_seq_ = 1;
        next_sdu_id_ = 1;
        highest_acked_ = 0;
    } else {
        recv_open_ = false;
        out_of_order_.clear();
        reassembly_.clear();
        if (ack_pending_) {
            engine_.cancel(ack_event_);
            ack_pending_ = false;
        }
    }
}

void Efcp::close() {
    if (closed_) return;
    closed_ = true;
    for (auto& [s, e] : rtx_) engine_.cancel(e.rto_event);
    rtx_.clear();
    if (ack_event_.valid()) engine_.cancel(ack_event_);
    if (send_idle_check_.valid()) engine_.cancel(send_idle_check_);
    if (recv_idle_check_.valid()) engine_.cancel(recv_idle_check_);
    if (limiter_event_.valid()) engine_.cancel(limiter_event_);
    limiter_queue_.clear();
    opener_queue_.clear();
}

}  // namespace rina
