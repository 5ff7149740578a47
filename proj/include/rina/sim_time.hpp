#pragma once

#include <cstdint>

namespace rina {

// Simulated time is integer nanoseconds. Every configured delay, rate and
// timer is converted to ns once at parse time, so event arithmetic is exact
// and traces are bit-reproducible.
using SimTime = std::int64_t;
using Duration = std::int64_t;

inline constexpr Duration kNsPerUs = 1'000;
inline constexpr Duration kNsPerMs = 1'000'000;
inline constexpr Duration kNsPerSec = 1'000'000'000;

constexpr Duration from_ms(std::int64_t ms) { return ms * kNsPerMs; }
constexpr Duration from_us(std::int64_t us) { return us * kNsPerUs; }
constexpr Duration from_sec(std::int64_t s) { return s * kNsPerSec; }

// Serialization time of `bits` at `rate_bps`, truncated to whole ns.
// Callers keep bits below ~9e9 so the multiply cannot overflow.
constexpr Duration transmission_ns(std::int64_t bits, std::int64_t rate_bps) {
    return bits * kNsPerSec / rate_bps;
}

}  // namespace rina
