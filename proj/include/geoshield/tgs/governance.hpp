#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geoshield/core/ids.hpp"

namespace geoshield::tgs {

// Replacement selection: among nodes that can still take a task replica,
// prefer the smallest flag counter and break ties on the numeric node id.
// Flag counters persist across reassignments; scores do not.
struct Candidate {
    core::NodeId id;
    std::uint64_t flag_count = 0;
    bool eligible = true;  // spare capacity and not already holding this task
};

inline std::optional<core::NodeId> select_replacement(const std::vector<Candidate>& cands) {
    std::optional<core::NodeId> best;
    std::uint64_t best_flags = 0;
    for (const Candidate& c : cands) {
        if (!c.eligible) continue;
        if (!best || c.flag_count < best_flags ||
            (c.flag_count == best_flags && c.id < *best)) {
            best = c.id;
            best_flags = c.flag_count;
        }
    }
    return best;
}

}  // namespace geoshield::tgs
