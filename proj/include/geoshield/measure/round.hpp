#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoshield/core/params.hpp"
#include "geoshield/measure/messages.hpp"

namespace geoshield::measure {

// Receiver-side state for one (direction, round) on one downstream measurer.
// The runtime feeds in heartbeats and peer proposals as they arrive; at the
// accept instant it asks for the accept value, and at the decide instant it
// tallies accepts. All times are the owning node's local clock.
class ReceiverRound {
  public:
    ReceiverRound() = default;
    ReceiverRound(std::uint64_t round, DirectionId dir, SimTime t_n, std::size_t quorum)
        : round_(round), dir_(dir), t_n_(t_n), quorum_(quorum) {}

    std::uint64_t round() const { return round_; }
    DirectionId dir() const { return dir_; }
    SimTime t_n() const { return t_n_; }

    // Phase 2: heartbeat from x arrived at local time t. Records the arrival
    // (first one per sender) and returns the measured latency if it made the
    // proposal cutoff; late arrivals are remembered for claim evaluation but
    // yield no proposal. The caller decides what to propose (a dishonest
    // node may misreport) and records it via add_own.
    std::optional<Duration> on_heartbeat(NodeId x, SimTime t_local, SimTime hb_cutoff) {
        if (seen_hb(x)) return std::nullopt;
        hb_arrivals_.push_back({x, t_local});
        if (t_local > hb_cutoff) return std::nullopt;
        return t_local - t_n_;
    }

    // Local arrival time of x's heartbeat, if any.
    std::optional<SimTime> hb_arrival(NodeId x) const {
        for (const auto& [node, t] : hb_arrivals_)
            if (node == x) return t;
        return std::nullopt;
    }

    // The latency this node actually proposed.
    void add_own(Duration d) { own_ds_.push_back(d); }

    // Phase 3a: record a peer proposal that already passed signature and
    // reasonableness checks.
    void on_peer_proposal(const Proposal& p) { peer_ds_.push_back(p.d); }

    // Phase 3b: the accept value at the accept instant. A_min over own
    // proposals, P_min over peer proposals; timeout when neither exists.
    Accept make_accept(const core::TimingParams& tp, NodeId self) const {
        Accept a;
        a.round = round_;
        a.dir = dir_;
        a.accepter = self;
        std::optional<Duration> best;
        for (Duration d : own_ds_)
            if (!best || d < *best) best = d;
        for (Duration d : peer_ds_)
            if (!best || d < *best) best = d;
        if (best) {
            a.timeout = false;
            a.d_acc = *best + tp.delta_inter;
        } else {
            a.timeout = true;
        }
        return a;
    }

    // Phase 4 bookkeeping: accepts as they arrive (one per accepter kept).
    void on_accept(const Accept& a) {
        if (std::any_of(accepts_.begin(), accepts_.end(),
                        [&](const Accept& b) { return b.accepter == a.accepter; }))
            return;
        accepts_.push_back(a);
    }

    // Phase 4: the decision at the decide instant. A value (timeout counts
    // as a value) wins with >= quorum matching accepts; otherwise the round
    // is disputed.
    Decision decide() const {
        // No accepts at all means the accepting side never ran: there is
        // nothing to dispute, only a silence to treat as a timeout.
        if (accepts_.empty()) return Decision{Decision::Kind::kTimeout, Duration{0}};
        // key: timeout flag + latency; count matching accepts.
        std::map<std::pair<bool, std::int64_t>, std::size_t> tally;
        for (const Accept& a : accepts_)
            ++tally[{a.timeout, a.timeout ? 0 : a.d_acc.ns}];
        std::optional<std::pair<bool, std::int64_t>> winner;
        for (const auto& [key, n] : tally) {
            if (n >= quorum_) {
                if (winner) {
                    // Two quorums can only coexist with equivocation beyond
                    // the fault budget; surface it as a dispute.
                    return Decision{Decision::Kind::kDisputed, Duration{0}};
                }
                winner = key;
            }
        }
        if (!winner) return Decision{Decision::Kind::kDisputed, Duration{0}};
        if (winner->first) return Decision{Decision::Kind::kTimeout, Duration{0}};
        return Decision{Decision::Kind::kValue, Duration{winner->second}};
    }

    const std::vector<Accept>& accepts() const { return accepts_; }
    const std::vector<Duration>& own_proposals() const { return own_ds_; }
    const std::vector<Duration>& peer_proposals() const { return peer_ds_; }
    std::size_t heartbeats_seen() const { return hb_arrivals_.size(); }

  private:
    bool seen_hb(NodeId x) const {
        return std::any_of(hb_arrivals_.begin(), hb_arrivals_.end(),
                           [&](const auto& e) { return e.first == x; });
    }

    std::uint64_t round_ = 0;
    DirectionId dir_;
    SimTime t_n_{};
    std::size_t quorum_ = 0;
    std::vector<std::pair<NodeId, SimTime>> hb_arrivals_;
    std::vector<Duration> own_ds_;   // own measured latencies (proposed)
    std::vector<Duration> peer_ds_;  // peer-proposed latencies that passed checks
    std::vector<Accept> accepts_;
};

// One line of the per-round measurement summary.
struct RoundSummaryRow {
    std::uint64_t round = 0;
    DirectionId dir;
    Decision decision;
    std::size_t heartbeats = 0;
    std::size_t proposals = 0;
    std::size_t accepts = 0;
};

std::string round_summary_csv(const std::vector<RoundSummaryRow>& rows);

}  // namespace geoshield::measure
