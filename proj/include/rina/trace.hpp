#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rina/sim_time.hpp"

namespace rina {

// One trace line: `t=<ns> node=<name> comp=<component> ev=<NAME> k=v ...`
// Key order is exactly the order the emitter passed, so the file format is
// byte-stable for golden comparison.
struct TraceEvent {
    SimTime t = 0;
    std::string node;
    std::string comp;
    std::string ev;
    std::vector<std::pair<std::string, std::string>> kv;

    std::string line() const;
    // First value for `key`, or "" when absent.
    std::string get(const std::string& key) const;
    bool has(const std::string& key, const std::string& value) const;
};

class Tracer {
  public:
    using Sink = std::function<void(const TraceEvent&)>;

    void add_sink(Sink s) { sinks_.push_back(std::move(s)); }

    void emit(SimTime t, std::string node, std::string comp, std::string ev,
              std::vector<std::pair<std::string, std::string>> kv) {
        TraceEvent e{t, std::move(node), std::move(comp), std::move(ev), std::move(kv)};
        for (auto& s : sinks_) s(e);
    }

  private:
    std::vector<Sink> sinks_;
};

}  // namespace rina
