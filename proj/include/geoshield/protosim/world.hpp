#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoshield/core/crypto.hpp"
#include "geoshield/measure/round.hpp"
#include "geoshield/measure/sender.hpp"
#include "geoshield/poc/poc.hpp"
#include "geoshield/protosim/scenario.hpp"
#include "geoshield/recovery/recovery.hpp"
#include "geoshield/simnet/event_queue.hpp"
#include "geoshield/simnet/network.hpp"
#include "geoshield/tgs/ledger.hpp"

namespace geoshield::protosim {

using core::Duration;
using core::JobId;
using core::NodeId;
using core::RegionId;
using core::SimTime;
using core::TaskId;
using measure::DirectionId;

// Per-(direction, round) measurement ground truth and outcome, for checking
// the protocol's analytical bounds against the simulated network.
struct TheoremRow {
    std::uint64_t round = 0;
    DirectionId dir;
    SimTime t_n;                      // nominal send instant
    bool any_send = false;
    SimTime earliest_valid_send;      // true time a valid heartbeat first hit the wire
    bool any_delivery = false;
    Duration min_true_delay;          // smallest true one-way delay among delivered copies
    bool decided = false;
    bool timeout = false;
    bool disputed = false;            // a dispute ran (resolved value below)
    Duration d_n;                     // final decided latency (post-dispute)
};

struct SafeModeRow {
    SimTime t;
    RegionId region;
    DirectionId dir;
    std::uint64_t round = 0;
    std::string cause;
};

// Application-visible input event (case studies hook this).
struct AppEvent {
    SimTime t_local;
    NodeId consumer;
    TaskId task;
    JobId job;
    std::vector<std::uint8_t> bytes;
    bool validated = false;  // came out of proof settlement (vs optimistic first use)
    bool corrected = false;  // replaced a previously used value
};

struct Results {
    std::vector<measure::RoundSummaryRow> rounds;
    std::vector<TheoremRow> theorems;
    std::vector<poc::VerdictRow> verdicts;
    std::vector<std::string> dispute_lines;
    std::vector<recovery::RecoveryAuditRow> recovery_rows;
    std::vector<tgs::TgsEventRow> tgs_rows;
    std::vector<SafeModeRow> safe_mode;
    std::vector<AppEvent> app_events;

    struct RpSummary {
        std::uint64_t rp_id = 0;
        NodeId suspect;
        SimTime t_first_detect;                 // true time of first detection
        std::map<std::uint32_t, SimTime> applied_at;  // node -> local apply time
    };
    std::map<std::uint64_t, RpSummary> rps;

    // One decision value per (direction, round) at every correct node or the
    // run is flagged inconsistent.
    bool decision_agreement = true;

    std::vector<simnet::NodeByteCounters> bytes;
    std::uint64_t messages = 0;
    SimTime t_end;
    std::map<std::uint32_t, double> final_scores;
    std::map<std::uint32_t, std::uint64_t> flag_counts;
    std::string trace_csv;  // only when tracing was enabled
};

// Full protocol stack on the simulated fabric: measurement rounds with
// dispute resolution, proof-of-correctness validation, timeliness governance
// and recovery propagation, under the configured adversary.
class World {
  public:
    explicit World(const ScenarioSpec& spec);
    ~World();

    // Case-study hook: observes every application input event as it happens
    // (optimistic uses, validated settlements, corrections).
    void set_app_hook(std::function<void(const AppEvent&)> hook);
    // Case-study hook: safe-mode latches as they happen.
    void set_safe_mode_hook(std::function<void(const SafeModeRow&)> hook);
    // Extra deterministic events on a node's local clock (actuation models).
    void at_local(NodeId n, SimTime t_local, std::function<void()> fn);

    simnet::Simulator& simulator();
    const simnet::Network& network() const;
    SimTime local_now(NodeId n) const;

    Results run();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace geoshield::protosim
