#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoshield/core/ids.hpp"
#include "geoshield/core/time.hpp"

namespace geoshield::simnet {

enum class DropReason : std::uint8_t {
    kDelivered = 0,
    kCopyLoss = 1,
    kSenderBurst = 2,
    kReceiverBurst = 3,
    kAdversary = 4,
};

struct TraceRecord {
    std::uint64_t seq = 0;
    core::SimTime t_send;
    core::SimTime t_recv;  // meaningful only when delivered
    core::NodeId src;
    core::NodeId dst;
    std::uint16_t kind = 0;
    std::uint32_t wire_bytes = 0;
    DropReason drop = DropReason::kDelivered;
};

// CSV with a fixed header; identical runs serialize to identical bytes.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);

// Order-sensitive FNV-1a digest of the CSV bytes, for determinism checks.
std::uint64_t trace_digest(const std::vector<TraceRecord>& trace);

}  // namespace geoshield::simnet
