#include <doctest.h>

#include <cmath>
#include <vector>

#include "rina/error.hpp"
#include "rina/medium.hpp"

using namespace rina;

namespace {

struct Rig {
    EventQueue engine;
    Tracer tracer;
    Medium medium{engine, tracer, 42};
    std::vector<std::pair<SimTime, Pdu>> delivered_b;

    std::size_t link(std::int64_t rate, Duration delay, double ber) {
        auto id = medium.add_link({"na", "a"}, {"nb", "b"}, rate, delay, ber, 1);
        medium.attach(id, 1, [this](Pdu p) { delivered_b.emplace_back(engine.now(), p); });
        return id;
    }

    static Pdu data_pdu(std::size_t total_bytes, std::uint64_t seq = 1) {
        Pdu p;
        p.kind = PduKind::kData;
        p.seq = seq;
        p.payload.assign(total_bytes - kPduHeaderBytes, 0x5a);
        return p;
    }
};

}  // namespace

TEST_CASE("delivery at now + delay + size/rate") {
    Rig r;
    // 1000-byte PDU on a 10^6 bit/s link with 1 ms delay: 8 ms serialization
    // plus 1 ms propagation.
    auto id = r.link(1'000'000, from_ms(1), 0.0);
    const Duration tx = r.medium.transmit(id, 0, Rig::data_pdu(1000));
    CHECK(tx == from_ms(8));
    r.engine.run_until(from_sec(1));
    REQUIRE(r.delivered_b.size() == 1);
    CHECK(r.delivered_b[0].first == from_ms(9));
}

TEST_CASE("ber = 0 always delivers, ber = 1 always drops") {
    Rig r;
    auto clean = r.link(1'000'000, 0, 0.0);
    for (int i = 0; i < 50; ++i) r.medium.transmit(clean, 0, Rig::data_pdu(100, i));
    r.engine.run_until(from_sec(1));
    CHECK(r.delivered_b.size() == 50);

    Rig r2;
    auto lossy = r2.link(1'000'000, 0, 1.0);
    for (int i = 0; i < 50; ++i) r2.medium.transmit(lossy, 0, Rig::data_pdu(100, i));
    r2.engine.run_until(from_sec(1));
    CHECK(r2.delivered_b.empty());
    CHECK(r2.medium.link(lossy).drop_count == 50);
}

TEST_CASE("management pdus ride reliably even on lossy links") {
    Rig r;
    auto lossy = r.link(1'000'000, 0, 1.0);
    Pdu p;
    p.kind = PduKind::kMgmt;
    p.payload.assign(40, 1);
    r.medium.transmit(lossy, 0, p);
    r.engine.run_until(from_sec(1));
    CHECK(r.delivered_b.size() == 1);
}

TEST_CASE("unknown link pair raises NoSuchLink") {
    Rig r;
    r.link(1'000'000, 0, 0.0);
    CHECK_THROWS_AS(r.medium.allocate({"na", "a"}, {"nc", "c"}), SimError);
    // Repeated allocation on a configured link is idempotent success.
    auto first = r.medium.allocate({"na", "a"}, {"nb", "b"});
    auto second = r.medium.allocate({"nb", "b"}, {"na", "a"});
    CHECK(first.first == second.first);
}

TEST_CASE("empirical drop rate converges to 1-(1-ber)^bits") {
    Rig r;
    const double ber = 1e-4;
    auto id = r.link(1'000'000'000, 0, ber);
    const std::size_t total_bytes = 125;  // 1000 bits
    const int n = 10000;
    for (int i = 0; i < n; ++i) r.medium.transmit(id, 0, Rig::data_pdu(total_bytes, i));
    r.engine.run_until(from_sec(10));

    const double bits = total_bytes * 8.0;
    const double p = 1.0 - std::pow(1.0 - ber, bits);  // independent oracle
    const double drops = static_cast<double>(r.medium.link(id).drop_count);
    const double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(drops > n * p - 3 * sigma);
    CHECK(drops < n * p + 3 * sigma);
}

TEST_CASE("fifo per direction with sequential serialization starts") {
    Rig r;
    auto id = r.link(1'000'000, from_ms(2), 0.0);
    SimTime start = 0;
    std::mt19937_64 rng(5);
    for (std::uint64_t i = 0; i < 20; ++i) {
        r.engine.run_until(start);
        const Duration tx = r.medium.transmit(id, 0, Rig::data_pdu(50 + rng() % 900, i));
        start += tx;  // next serialization begins when this one ends
    }
    r.engine.run_until(from_sec(5));
    REQUIRE(r.delivered_b.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r.delivered_b[i].second.seq == i);  // in order
        if (i > 0) CHECK(r.delivered_b[i].first >= r.delivered_b[i - 1].first);
    }
}
