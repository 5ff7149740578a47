#include "rina/engine.hpp"

#include "rina/error.hpp"

namespace rina {

EventHandle EventQueue::schedule(SimTime fire_at, std::function<void()> fn) {
    if (fire_at < now_) {
        throw SimError("SchedulingInPast: fire_at=" + std::to_string(fire_at) +
                       " now=" + std::to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(Entry{fire_at, seq, std::move(fn)});
    pending_.insert(seq);
    return EventHandle{seq};
}

bool EventQueue::cancel(EventHandle h) {
    return pending_.erase(h.seq) > 0;
}

bool EventQueue::pop_one() {
    // Only called when the top entry is within the processing bound; skips
    // cancelled entries without touching anything past the top.
    Entry e = heap_.top();
    heap_.pop();
    if (pending_.erase(e.seq) == 0) {
        return false;  // cancelled, dropped lazily
    }
    now_ = e.at;
    e.fn();
    if (post_hook_) post_hook_();
    return true;
}

std::uint64_t EventQueue::run_until(SimTime t) {
    std::uint64_t n = 0;
    while (!heap_.empty() && heap_.top().at <= t) {
        if (pop_one()) ++n;
    }
    if (t > now_) now_ = t;
    return n;
}

std::uint64_t EventQueue::run_until_idle(SimTime cap) {
    std::uint64_t n = 0;
    while (!heap_.empty() && heap_.top().at <= cap) {
        if (pop_one()) ++n;
    }
    return n;
}

namespace {

// splitmix64; mixes (seed, index) into a well-separated stream seed.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index)
    : eng_(mix(mix(seed) ^ mix(index + 0x517cc1b727220a95ULL))) {}

double RngStream::uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

}  // namespace rina
