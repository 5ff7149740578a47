#include <doctest.h>

#include <random>

#include "rina/error.hpp"
#include "rina/ids.hpp"

using namespace rina;

TEST_CASE("id pool allocates smallest free value starting at 1") {
    IdPool pool;
    CHECK(pool.allocate() == 1);
    CHECK(pool.allocate() == 2);
    CHECK(pool.allocate() == 3);
    pool.release(1);
    CHECK(pool.allocate() == 1);  // smallest-free policy
    pool.release(2);
    pool.release(3);
    CHECK(pool.allocate() == 2);
    CHECK(pool.allocate() == 3);
    CHECK(pool.allocate() == 4);
}

TEST_CASE("id pool exhaustion") {
    IdPool pool(3);
    pool.allocate();
    pool.allocate();
    pool.allocate();
    CHECK_THROWS_AS(pool.allocate(), SimError);
    pool.release(2);
    CHECK(pool.allocate() == 2);  // freed values may be reused
}

TEST_CASE("id pool never hands out a live value") {
    IdPool pool(64);
    std::mt19937 rng(7);
    std::set<std::uint32_t> live;
    for (int step = 0; step < 2000; ++step) {
        if (!live.empty() && rng() % 2 == 0) {
            auto it = live.begin();
            std::advance(it, rng() % live.size());
            pool.release(*it);
            live.erase(it);
        } else if (live.size() < 64) {
            auto v = pool.allocate();
            CHECK(live.insert(v).second);
        }
        CHECK(pool.live_count() == live.size());
    }
}

TEST_CASE("connection id equality is componentwise") {
    ConnectionId a{1, 2, 3}, b{1, 2, 3}, c{2, 1, 3};
    CHECK(a == b);
    CHECK(a != c);
}

namespace {

std::vector<QosCube> two_cubes() {
    QosCube c1;
    c1.id = 1;
    QosCube c2;
    c2.id = 2;
    c2.reliable = true;
    c2.ordered = true;
    return {c1, c2};
}

}  // namespace

TEST_CASE("select_qos_cube picks the only satisfying cube") {
    QosRequirements req;
    req.reliable = true;
    CHECK(select_qos_cube(req, two_cubes()) == QosId{2});
}

TEST_CASE("select_qos_cube breaks ties toward the lowest id") {
    QosRequirements req;  // nothing set
    CHECK(select_qos_cube(req, two_cubes()) == QosId{1});
}

TEST_CASE("select_qos_cube enforces delay bound direction") {
    QosCube cube;
    cube.id = 1;
    cube.max_delay = from_ms(10);
    QosRequirements req;
    req.max_delay = from_ms(5);
    CHECK(select_qos_cube(req, {cube}) == std::nullopt);  // cube bound too loose
    req.max_delay = from_ms(10);
    CHECK(select_qos_cube(req, {cube}) == QosId{1});
    QosCube unbounded;
    unbounded.id = 2;
    CHECK(select_qos_cube(req, {unbounded}) == std::nullopt);
}

TEST_CASE("select_qos_cube bandwidth: cube must offer at least the request") {
    QosCube cube;
    cube.id = 1;
    cube.avg_bandwidth = 1000;
    QosRequirements req;
    req.avg_bandwidth = 2000;
    CHECK(select_qos_cube(req, {cube}) == std::nullopt);
    req.avg_bandwidth = 500;
    CHECK(select_qos_cube(req, {cube}) == QosId{1});
}

TEST_CASE("a flag requested false constrains nothing") {
    QosRequirements req;
    req.reliable = false;
    CHECK(select_qos_cube(req, two_cubes()) == QosId{1});
}

TEST_CASE("select_qos_cube is monotone: removing a non-selected cube never changes the result") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<QosCube> cubes;
        const int n = 1 + rng() % 6;
        for (int i = 0; i < n; ++i) {
            QosCube cube;
            cube.id = static_cast<QosId>(i + 1);
            cube.reliable = rng() % 2;
            cube.ordered = rng() % 2;
            if (rng() % 2) cube.max_delay = from_ms(1 + rng() % 20);
            if (rng() % 2) cube.avg_bandwidth = 100 * (1 + rng() % 10);
            cubes.push_back(cube);
        }
        QosRequirements req;
        if (rng() % 2) req.reliable = rng() % 2;
        if (rng() % 2) req.ordered = rng() % 2;
        if (rng() % 2) req.max_delay = from_ms(1 + rng() % 20);
        if (rng() % 2) req.avg_bandwidth = 100 * (1 + rng() % 10);
        if (!req.any_set()) req.ordered = true;

        auto selected = select_qos_cube(req, cubes);
        for (std::size_t drop = 0; drop < cubes.size(); ++drop) {
            if (selected && cubes[drop].id == *selected) continue;
            std::vector<QosCube> fewer;
            for (std::size_t k = 0; k < cubes.size(); ++k) {
                if (k != drop) fewer.push_back(cubes[k]);
            }
            CHECK(select_qos_cube(req, fewer) == selected);
        }
    }
}
