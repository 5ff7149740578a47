#include "rina/pdu.hpp"

#include "rina/error.hpp"

namespace rina {

namespace {

void put_u16(Sdu& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Sdu& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Sdu& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const Sdu& in, std::size_t at) {
    return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(const Sdu& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + i];
    return v;
}

std::uint64_t get_u64(const Sdu& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | in[at + i];
    return v;
}

}  // namespace

const char* to_string(PduKind k) {
    switch (k) {
        case PduKind::kData: return "DATA";
        case PduKind::kAck: return "ACK";
        case PduKind::kMgmt: return "MGMT";
    }
    return "?";
}

std::size_t Pdu::wire_bytes() const {
    return kPduHeaderBytes + payload.size();
}

Sdu serialize_pdu(const Pdu& p) {
    Sdu out;
    out.reserve(kPduHeaderBytes + p.payload.size());
    put_u32(out, p.src_addr);
    put_u32(out, p.dst_addr);
    put_u16(out, p.qos_id);
    put_u16(out, static_cast<std::uint16_t>(p.src_cep));
    put_u16(out, static_cast<std::uint16_t>(p.dst_cep));
    out.push_back(static_cast<std::uint8_t>(p.kind));
    out.push_back(p.last_fragment ? 1 : 0);
    put_u64(out, p.seq);
    put_u32(out, p.sdu_id);
    put_u32(out, p.frag_offset);
    out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

Pdu parse_pdu(const Sdu& bytes) {
    if (bytes.size() < kPduHeaderBytes) {
        throw SimError("parse_pdu: short buffer (" + std::to_string(bytes.size()) + " bytes)");
    }
    Pdu p;
    p.src_addr = get_u32(bytes, 0);
    p.dst_addr = get_u32(bytes, 4);
    p.qos_id = get_u16(bytes, 8);
    p.src_cep = get_u16(bytes, 10);
    p.dst_cep = get_u16(bytes, 12);
    const std::uint8_t kind = bytes[14];
    if (kind < 1 || kind > 3) {
        throw SimError("parse_pdu: bad kind " + std::to_string(kind));
    }
    p.kind = static_cast<PduKind>(kind);
    p.last_fragment = bytes[15] != 0;
    p.seq = get_u64(bytes, 16);
    p.sdu_id = get_u32(bytes, 24);
    p.frag_offset = get_u32(bytes, 28);
    p.payload.assign(bytes.begin() + kPduHeaderBytes, bytes.end());
    return p;
}

}  // namespace rina
