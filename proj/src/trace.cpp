#include "rina/trace.hpp"

namespace rina {

std::string TraceEvent::line() const {
    std::string out;
    out.reserve(64 + kv.size() * 16);
    out += "t=";
    out += std::to_string(t);
    out += " node=";
    out += node;
    out += " comp=";
    out += comp;
    out += " ev=";
    out += ev;
    for (const auto& [k, v] : kv) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

std::string TraceEvent::get(const std::string& key) const {
    for (const auto& [k, v] : kv) {
        if (k == key) return v;
    }
    return {};
}

bool TraceEvent::has(const std::string& key, const std::string& value) const {
    return get(key) == value;
}

}  // namespace rina
