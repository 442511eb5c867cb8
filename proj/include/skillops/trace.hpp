#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillops/contract.hpp"

namespace skillops {

enum class Outcome { success, failure };

std::string_view to_string(Outcome outcome);

struct TraceEntry {
    std::string task_id;
    SkillId skill;
    std::size_t step = 0;
    Outcome outcome = Outcome::success;
    std::optional<std::string> error_code;

    bool operator==(const TraceEntry&) const = default;
};

/// Append-only per-call log. `step` increases strictly within one task.
struct ExecutionTrace {
    std::vector<TraceEntry> entries;

    void append(const ExecutionTrace& other)
    {
        entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    }

    bool operator==(const ExecutionTrace&) const = default;
};

}  // namespace skillops
