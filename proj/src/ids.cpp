#include "rina/ids.hpp"

#include "rina/error.hpp"

namespace rina {

std::optional<QosId> select_qos_cube(const QosRequirements& req,
                                     const std::vector<QosCube>& cubes) {
    std::optional<QosId> best;
    for (const auto& cube : cubes) {
        if (req.reliable && *req.reliable && !cube.reliable) continue;
        if (req.ordered && *req.ordered && !cube.ordered) continue;
        if (req.max_delay) {
            // The cube must guarantee a bound at least as tight as requested.
            if (!cube.max_delay || *cube.max_delay > *req.max_delay) continue;
        }
        if (req.avg_bandwidth) {
            if (!cube.avg_bandwidth || *cube.avg_bandwidth < *req.avg_bandwidth) continue;
        }
        if (!best || cube.id < *best) best = cube.id;
    }
    return best;
}

std::uint32_t IdPool::allocate() {
    std::uint32_t v;
    if (!freed_.empty()) {
        v = *freed_.begin();
        freed_.erase(freed_.begin());
    } else if (high_ < max_) {
        v = ++high_;
    } else {
        throw SimError("Exhausted: id space of size " + std::to_string(max_) +
                       " fully allocated");
    }
    live_.insert(v);
    return v;
}

void IdPool::release(std::uint32_t v) {
    if (live_.erase(v) == 0) {
        throw SimError("release of id " + std::to_string(v) + " that is not live");
    }
    freed_.insert(v);
}

}  // namespace rina
