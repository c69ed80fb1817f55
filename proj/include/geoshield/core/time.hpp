#pragma once

#include <cstdint>
#include <compare>
#include <cstdio>
#include <limits>
#include <string>

namespace geoshield::core {

// All simulation time lives on an integer nanosecond grid. Scheduling,
// protocol deadlines and physics steps are exact integers, so traces are
// reproducible bit-for-bit and deadline comparisons have no epsilon issues.
struct Duration {
    std::int64_t ns = 0;

    static constexpr Duration nanos(std::int64_t v) { return {v}; }
    static constexpr Duration micros(std::int64_t v) { return {v * 1000}; }
    static constexpr Duration millis(std::int64_t v) { return {v * 1000000}; }
    static constexpr Duration seconds(std::int64_t v) { return {v * 1000000000}; }

    constexpr double to_seconds() const { return static_cast<double>(ns) * 1e-9; }
    constexpr double to_millis() const { return static_cast<double>(ns) * 1e-6; }

    constexpr auto operator<=>(const Duration&) const = default;
    constexpr Duration operator+(Duration o) const { return {ns + o.ns}; }
    constexpr Duration operator-(Duration o) const { return {ns - o.ns}; }
    constexpr Duration operator-() const { return {-ns}; }
    constexpr Duration operator*(std::int64_t k) const { return {ns * k}; }
    constexpr Duration operator/(std::int64_t k) const { return {ns / k}; }
    Duration& operator+=(Duration o) { ns += o.ns; return *this; }
    Duration& operator-=(Duration o) { ns -= o.ns; return *this; }
};

struct SimTime {
    std::int64_t ns = 0;  // nanoseconds since simulation start

    static constexpr SimTime zero() { return {0}; }
    static constexpr SimTime nanos(std::int64_t v) { return {v}; }
    static constexpr SimTime millis(std::int64_t v) { return {v * 1000000}; }
    static constexpr SimTime seconds(std::int64_t v) { return {v * 1000000000}; }
    static constexpr SimTime max() { return {std::numeric_limits<std::int64_t>::max()}; }

    constexpr double to_seconds() const { return static_cast<double>(ns) * 1e-9; }

    constexpr auto operator<=>(const SimTime&) const = default;
    constexpr SimTime operator+(Duration d) const { return {ns + d.ns}; }
    constexpr SimTime operator-(Duration d) const { return {ns - d.ns}; }
    constexpr Duration operator-(SimTime o) const { return {ns - o.ns}; }
    SimTime& operator+=(Duration d) { ns += d.ns; return *this; }
};

// Fixed-format second stamps for CSV output: always 9 fractional digits so
// identical runs serialize to identical bytes.
inline std::string format_seconds(SimTime t) {
    char buf[40];
    std::int64_t ns = t.ns;
    const char* sign = "";
    if (ns < 0) { sign = "-"; ns = -ns; }
    std::snprintf(buf, sizeof buf, "%s%lld.%09lld", sign,
                  static_cast<long long>(ns / 1000000000),
                  static_cast<long long>(ns % 1000000000));
    return buf;
}

inline std::string format_seconds(Duration d) { return format_seconds(SimTime{d.ns}); }

}  // namespace geoshield::core
