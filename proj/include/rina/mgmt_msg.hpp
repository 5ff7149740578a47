#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rina/ids.hpp"
#include "rina/pdu.hpp"

namespace rina {

enum class MgmtKind : std::uint8_t {
    kCreateFlowRequest = 1,
    kCreateFlowResponse = 2,
    kDeleteFlowRequest = 3,
    kDeleteFlowResponse = 4,
    kMConnect = 5,
    kMConnectResponse = 6,
    kRoutingUpdate = 7,
};

const char* to_string(MgmtKind k);

// Flow descriptor carried by the CreateFlow*/DeleteFlow* messages. Responses
// echo the request's descriptor with the responder-side fields filled in.
struct FlowDescriptor {
    Apn src_apn;
    Apn dst_apn;
    Address src_addr = 0;
    Address dst_addr = 0;
    PortIdValue src_port = 0;
    PortIdValue dst_port = 0;
    CepIdValue src_cep = 0;
    CepIdValue dst_cep = 0;
    QosId qos_id = 0;

    bool operator==(const FlowDescriptor&) const = default;
};

// One origin's link-state advertisement.
struct LinkStateAd {
    Address origin = 0;
    std::uint64_t version = 0;
    std::vector<std::pair<Address, std::uint32_t>> neighbors;  // (addr, metric)

    bool operator==(const LinkStateAd&) const = default;
};

struct MgmtMessage {
    MgmtKind kind = MgmtKind::kCreateFlowRequest;
    Address src_addr = 0;
    Address dst_addr = 0;
    bool result_positive = true;     // response kinds only
    std::string reason;              // response kinds, failure detail
    FlowDescriptor flow;             // *Flow* kinds
    std::string dif_name;            // MConnect*
    std::string auth;                // MConnect
    LinkStateAd lsa;                 // RoutingUpdate

    bool operator==(const MgmtMessage&) const = default;
};

Sdu encode_mgmt(const MgmtMessage& m);
MgmtMessage decode_mgmt(const Sdu& bytes);  // throws SimError on malformed input

}  // namespace rina
