#pragma once

#include <string>
#include <vector>

namespace labscene {

// A single validation finding. Collected into lists rather than thrown so
// callers can report every problem in one pass.
struct Issue {
    std::string field;    // dotted path, e.g. "bbox.height" or "steps[2].location"
    std::string rule;     // short machine-readable rule id
    std::string message;  // human-readable detail
    bool warning = false; // warnings do not fail validation
};

std::string format_issues(const std::vector<Issue>& issues);

}  // namespace labscene
