#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <unordered_set>
#include <vector>

#include "rina/sim_time.hpp"

namespace rina {

struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
};

// Deterministic discrete-event core. Events fire in strict (fire_at, seq)
// order where seq is the insertion counter, so two events scheduled for the
// same instant fire in the order they were scheduled. That tie-break is what
// gives zero-delay intra-node deliveries a well-defined causal order.
class EventQueue {
  public:
    EventQueue() = default;

    SimTime now() const { return now_; }

    // Throws SimError if fire_at < now().
    EventHandle schedule(SimTime fire_at, std::function<void()> fn);
    EventHandle schedule_in(Duration delay, std::function<void()> fn) {
        return schedule(now_ + delay, std::move(fn));
    }

    // True if the event was still pending and is now removed.
    bool cancel(EventHandle h);

    // Processes every event with fire_at <= t, then advances the clock to t.
    // Returns the number of events processed.
    std::uint64_t run_until(SimTime t);

    // Processes events until the queue empties or the clock would pass `cap`.
    // The clock is left at the last processed event (not advanced to cap).
    std::uint64_t run_until_idle(SimTime cap);

    bool empty() const { return pending_.empty(); }
    std::size_t pending_count() const { return pending_.size(); }

    // Invoked after each processed event; used by tests for registry audits.
    void set_post_event_hook(std::function<void()> hook) { post_hook_ = std::move(hook); }

  private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Entry& o) const {
            return at != o.at ? at > o.at : seq > o.seq;
        }
    };

    bool pop_one();

    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
    std::unordered_set<std::uint64_t> pending_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 1;
    std::function<void()> post_hook_;
};

// One independent random stream per stochastic consumer (per link). Streams
// are derived from (global seed, stream index) so adding a link never
// perturbs the draws of existing links.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t index);

    // Uniform in [0,1) built from the top 53 bits; portable across stdlibs.
    double uniform01();

    std::uint64_t next_u64() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace rina
