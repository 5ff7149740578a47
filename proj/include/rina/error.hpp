#pragma once

#include <stdexcept>
#include <string>

namespace rina {

// Simulator-internal contract violations (scheduling in the past, unknown
// ports, exhausted id spaces). Protocol-level failures are values, not
// exceptions: they travel as negative responses, timeouts and trace events.
class SimError : public std::runtime_error {
  public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rina
