#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoshield/core/ids.hpp"
#include "geoshield/core/time.hpp"
#include "geoshield/tgs/ledger.hpp"

namespace geoshield::adversary {

using core::Duration;
using core::JobId;
using core::NodeId;
using core::SimTime;
using core::TaskId;

enum class AttackKind : std::uint8_t {
    kNone,
    kAggressive,         // drop all assigned inter-region sends, lie as receiver
    kAdaptive,           // same actions, gated so the mirrored score stays > 0
    kEarlyHeartbeat,     // send the round heartbeat as early as possible
    kLateHeartbeat,      // send the round heartbeat late
    kEquivocateAccept,   // different accept values to different peers
    kIncorrectOutput,    // substitute own task output, countersign honestly
    kWithholdCountersign,// run jobs honestly but never countersign proofs
    kSelectivePocForward,// omit a validated proof from own heartbeat attachments
    kLyingReceiver,      // misreport measured heartbeat latencies
};

const char* attack_kind_name(AttackKind k);
std::optional<AttackKind> parse_attack_kind(const std::string& s);

// Per-corrupt-node attack configuration (fields used depend on kind).
struct AttackSpec {
    AttackKind kind = AttackKind::kNone;
    Duration delay;        // adaptive: added send delay (0 = drop instead)
    Duration hb_skew;      // early (negative) / late (positive) heartbeat shift
    Duration d_shrink;     // lying receiver: subtract from measured latency
    bool suppress_proposals = false;  // lying receiver: also claim not received
    std::int64_t accept_delta_ns = 0; // equivocation offset for odd peers
    bool accept_timeout_alt = false;  // equivocation alternative: claim timeout
    std::vector<std::uint8_t> output_bytes;  // substituted task output
};

// Shared state for colluding nodes: a mirror of the public claim stream run
// through the exact same ledger arithmetic, plus in-flight penalties the
// adversary has caused but the ledger has not applied yet. Everything here
// is derived from observable traffic, so strategies stay deterministic in
// (seed, trace prefix).
class Blackboard {
  public:
    explicit Blackboard(const tgs::TgsParams& p) : mirror_(p) {}

    tgs::Ledger& mirror() { return mirror_; }
    const tgs::Ledger& mirror() const { return mirror_; }

    // Claim stream observation (runtime calls this for every ledger event).
    void observe_claim(tgs::ClaimKind k, NodeId sender, NodeId receiver) {
        mirror_.on_claim(k, sender, receiver);
        if (k == tgs::ClaimKind::kSuspicious) {
            settle_pending(sender);
            settle_pending(receiver);
        }
    }

    // Pending self-inflicted penalties: booked when the strategy acts,
    // settled when the matching suspicious claim lands.
    void book_pending(NodeId n) { ++pending_[n.v]; }
    std::uint64_t pending(NodeId n) const {
        auto it = pending_.find(n.v);
        return it == pending_.end() ? 0 : it->second;
    }

    // Score the node would have once everything booked lands.
    std::int64_t projected_units(NodeId n) const {
        return mirror_.score_units(n) -
               static_cast<std::int64_t>(pending(n)) * mirror_.domain().penalty_step();
    }

  private:
    void settle_pending(NodeId n) {
        auto it = pending_.find(n.v);
        if (it != pending_.end() && it->second > 0) --it->second;
    }

    tgs::Ledger mirror_;
    std::map<std::uint32_t, std::uint64_t> pending_;
};

struct SendDecision {
    bool drop = false;
    Duration extra_delay{0};
};

// Per-node behavior hooks. The runtime calls these at its decision points;
// the defaults are the honest actions. Strategies never see signing keys of
// other nodes and cannot bypass the network: all they control is what their
// own node sends, when, and what it claims.
class Strategy {
  public:
    explicit Strategy(Blackboard* bb) : bb_(bb) {}
    virtual ~Strategy() = default;

    virtual SendDecision on_inter_send(NodeId self, NodeId dst, SimTime t_local) {
        (void)self, (void)dst, (void)t_local;
        return {};
    }
    // Claim an in-time arrival suspicious anyway.
    virtual bool claim_false_suspicious(NodeId self, NodeId src, SimTime t_local) {
        (void)self, (void)src, (void)t_local;
        return false;
    }
    virtual Duration heartbeat_skew(NodeId self, std::uint64_t round) {
        (void)self, (void)round;
        return Duration{0};
    }
    // Override the accept sent to `dst`: {timeout, d_acc}.
    virtual std::optional<std::pair<bool, Duration>> accept_override(
        NodeId self, NodeId dst, std::uint64_t round, bool honest_timeout,
        Duration honest_d) {
        (void)self, (void)dst, (void)round, (void)honest_timeout, (void)honest_d;
        return std::nullopt;
    }
    virtual std::optional<std::vector<std::uint8_t>> output_override(
        NodeId self, TaskId task, JobId job, const std::vector<std::uint8_t>& honest) {
        (void)self, (void)task, (void)job, (void)honest;
        return std::nullopt;
    }
    virtual bool withhold_countersign(NodeId self, TaskId task, JobId job) {
        (void)self, (void)task, (void)job;
        return false;
    }
    virtual bool omit_final_from_attachments(NodeId self, TaskId task, JobId job) {
        (void)self, (void)task, (void)job;
        return false;
    }
    virtual bool suppress_proposal(NodeId self, NodeId hb_sender, std::uint64_t round) {
        (void)self, (void)hb_sender, (void)round;
        return false;
    }
    virtual std::optional<Duration> proposal_value_override(NodeId self, NodeId hb_sender,
                                                            std::uint64_t round,
                                                            Duration honest_d) {
        (void)self, (void)hb_sender, (void)round, (void)honest_d;
        return std::nullopt;
    }

  protected:
    Blackboard* bb_;
};

std::unique_ptr<Strategy> make_strategy(const AttackSpec& spec, Blackboard* bb);

}  // namespace geoshield::adversary
