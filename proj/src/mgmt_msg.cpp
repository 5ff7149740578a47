#include "rina/mgmt_msg.hpp"

#include "rina/error.hpp"

namespace rina {

namespace {

struct Writer {
    Sdu out;
    void u8(std::uint8_t v) { out.push_back(v); }
    void u16(std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u16(static_cast<std::uint16_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
};

struct Reader {
    const Sdu& in;
    std::size_t at = 0;

    void need(std::size_t n) const {
        if (at + n > in.size()) throw SimError("decode_mgmt: truncated message");
    }
    std::uint8_t u8() {
        need(1);
        return in[at++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
        at += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + i];
        at += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | in[at + i];
        at += 8;
        return v;
    }
    std::string str() {
        const std::uint16_t n = u16();
        need(n);
        std::string s(in.begin() + at, in.begin() + at + n);
        at += n;
        return s;
    }
};

void write_apn(Writer& w, const Apn& a) {
    w.str(a.name);
    w.str(a.instance);
}

Apn read_apn(Reader& r) {
    Apn a;
    a.name = r.str();
    a.instance = r.str();
    return a;
}

}  // namespace

const char* to_string(MgmtKind k) {
    switch (k) {
        case MgmtKind::kCreateFlowRequest: return "CreateFlowRequest";
        case MgmtKind::kCreateFlowResponse: return "CreateFlowResponse";
        case MgmtKind::kDeleteFlowRequest: return "DeleteFlowRequest";
        case MgmtKind::kDeleteFlowResponse: return "DeleteFlowResponse";
        case MgmtKind::kMConnect: return "MConnect";
        case MgmtKind::kMConnectResponse: return "MConnectResponse";
        case MgmtKind::kRoutingUpdate: return "RoutingUpdate";
    }
    return "?";
}

Sdu encode_mgmt(const MgmtMessage& m) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.u32(m.src_addr);
    w.u32(m.dst_addr);
    w.u8(m.result_positive ? 1 : 0);
    w.str(m.reason);
    switch (m.kind) {
        case MgmtKind::kCreateFlowRequest:
        case MgmtKind::kCreateFlowResponse:
        case MgmtKind::kDeleteFlowRequest:
        case MgmtKind::kDeleteFlowResponse:
            write_apn(w, m.flow.src_apn);
            write_apn(w, m.flow.dst_apn);
            w.u32(m.flow.src_addr);
            w.u32(m.flow.dst_addr);
            w.u32(m.flow.src_port);
            w.u32(m.flow.dst_port);
            w.u32(m.flow.src_cep);
            w.u32(m.flow.dst_cep);
            w.u16(m.flow.qos_id);
            break;
        case MgmtKind::kMConnect:
        case MgmtKind::kMConnectResponse:
            w.str(m.dif_name);
            w.str(m.auth);
            break;
        case MgmtKind::kRoutingUpdate:
            w.u32(m.lsa.origin);
            w.u64(m.lsa.version);
            w.u16(static_cast<std::uint16_t>(m.lsa.neighbors.size()));
            for (const auto& [addr, metric] : m.lsa.neighbors) {
                w.u32(addr);
                w.u32(metric);
            }
            break;
    }
    return std::move(w.out);
}

MgmtMessage decode_mgmt(const Sdu& bytes) {
    Reader r{bytes};
    MgmtMessage m;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 7) {
        throw SimError("decode_mgmt: unknown kind " + std::to_string(kind));
    }
    m.kind = static_cast<MgmtKind>(kind);
    m.src_addr = r.u32();
    m.dst_addr = r.u32();
    m.result_positive = r.u8() != 0;
    m.reason = r.str();
    switch (m.kind) {
        case MgmtKind::kCreateFlowRequest:
        case MgmtKind::kCreateFlowResponse:
        case MgmtKind::kDeleteFlowRequest:
        case MgmtKind::kDeleteFlowResponse:
            m.flow.src_apn = read_apn(r);
            m.flow.dst_apn = read_apn(r);
            m.flow.src_addr = r.u32();
            m.flow.dst_addr = r.u32();
            m.flow.src_port = r.u32();
            m.flow.dst_port = r.u32();
            m.flow.src_cep = r.u32();
            m.flow.dst_cep = r.u32();
            m.flow.qos_id = r.u16();
            break;
        case MgmtKind::kMConnect:
        case MgmtKind::kMConnectResponse:
            m.dif_name = r.str();
            m.auth = r.str();
            break;
        case MgmtKind::kRoutingUpdate: {
            m.lsa.origin = r.u32();
            m.lsa.version = r.u64();
            const std::uint16_t n = r.u16();
            for (std::uint16_t i = 0; i < n; ++i) {
                const Address addr = r.u32();
                const std::uint32_t metric = r.u32();
                m.lsa.neighbors.emplace_back(addr, metric);
            }
            break;
        }
    }
    return m;
}

}  // namespace rina
