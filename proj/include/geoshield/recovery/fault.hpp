#pragma once

#include <cstdint>
#include <string>

#include "geoshield/core/ids.hpp"
#include "geoshield/core/time.hpp"

namespace geoshield::recovery {

// Commission: provably wrong content (bad signature set, unsupported accept,
// output without a correctness proof). Omission: provably withheld traffic
// on a synchronous path (missing dispute log, missing countersignature).
enum class FaultKind : std::uint8_t { kCommission, kOmission };

struct FaultRecord {
    core::NodeId suspect;
    FaultKind kind = FaultKind::kCommission;
    std::string reason;        // short machine-greppable tag
    core::SimTime t_detected;  // local time at the detecting node
};

inline const char* fault_kind_name(FaultKind k) {
    return k == FaultKind::kCommission ? "commission" : "omission";
}

}  // namespace geoshield::recovery
