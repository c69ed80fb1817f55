#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace geoshield::core {

// Globally unique node identifier. Replacement selection tie-breaks on the
// numeric value, so assignment order is deterministic.
struct NodeId {
    std::uint32_t v = 0;
    constexpr auto operator<=>(const NodeId&) const = default;
};

struct RegionId {
    std::uint32_t v = 0;
    constexpr auto operator<=>(const RegionId&) const = default;
};

struct TaskId {
    std::uint32_t v = 0;
    constexpr auto operator<=>(const TaskId&) const = default;
};

// Job = one periodic invocation of a task. JobId is the invocation index, so
// (TaskId, JobId) names an output uniquely and stale replays are detectable.
struct JobId {
    std::uint64_t v = 0;
    constexpr auto operator<=>(const JobId&) const = default;
};

}  // namespace geoshield::core

template <>
struct std::hash<geoshield::core::NodeId> {
    size_t operator()(geoshield::core::NodeId id) const noexcept { return id.v; }
};
template <>
struct std::hash<geoshield::core::RegionId> {
    size_t operator()(geoshield::core::RegionId id) const noexcept { return id.v; }
};
template <>
struct std::hash<geoshield::core::TaskId> {
    size_t operator()(geoshield::core::TaskId id) const noexcept { return id.v; }
};
