#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rina/ids.hpp"

namespace rina {

// Service data unit: what the layer user submits; delivered byte-identical.
using Sdu = std::vector<std::uint8_t>;

enum class PduKind : std::uint8_t {
    kData = 1,
    kAck = 2,
    kMgmt = 3,
};

const char* to_string(PduKind k);

// Protocol data unit with the simulated fixed-size header. The wire size is
// kPduHeaderBytes + payload.size(); nothing else rides for free, so latency
// arithmetic stays analytic.
//
// Header layout (little-endian, 32 bytes):
//   src_addr u32 | dst_addr u32 | qos_id u16 | src_cep u16 | dst_cep u16 |
//   kind u8 | flags u8 | seq u64 | sdu_id u32 | frag_offset u32
struct Pdu {
    Address src_addr = 0;
    Address dst_addr = 0;
    QosId qos_id = 0;
    CepIdValue src_cep = 0;
    CepIdValue dst_cep = 0;
    PduKind kind = PduKind::kData;
    bool last_fragment = true;
    std::uint64_t seq = 0;       // DATA: sequence number; ACK: cumulative ack
    std::uint32_t sdu_id = 0;    // which SDU this fragment belongs to
    std::uint32_t frag_offset = 0;  // byte offset of the fragment in its SDU
    Sdu payload;

    std::size_t wire_bytes() const;
    std::int64_t wire_bits() const { return static_cast<std::int64_t>(wire_bytes()) * 8; }

    ConnectionId connection_id() const { return {src_cep, dst_cep, qos_id}; }

    bool operator==(const Pdu&) const = default;
};

inline constexpr std::size_t kPduHeaderBytes = 32;

// Encapsulation onto an (N-1) flow: the PDU becomes the lower flow's SDU.
Sdu serialize_pdu(const Pdu& p);

// Inverse of serialize_pdu. Throws SimError on malformed input.
Pdu parse_pdu(const Sdu& bytes);

}  // namespace rina
