#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoshield/core/ids.hpp"
#include "geoshield/core/time.hpp"
#include "geoshield/tgs/score.hpp"

namespace geoshield::tgs {

using core::NodeId;
using core::SimTime;

enum class ClaimKind : std::uint8_t { kNormal, kSuspicious };

// Governance-relevant events worth persisting. Normal claims are implicit
// (silence at the deadline) and far too numerous to log individually.
struct TgsEventRow {
    SimTime t;
    enum class Kind : std::uint8_t { kSuspicious, kFlag, kReassign } kind;
    NodeId node;            // scored node / flagged node / incoming replacement
    NodeId counterpart;     // other endpoint (suspicious) or outgoing node (reassign)
    double score_after = 0; // scored node's score after the event
};

std::string tgs_event_csv(const std::vector<TgsEventRow>& rows);

// The canonical timeliness-score ledger: one score per governed node, exact
// fixed-point arithmetic, flag on score <= 0 with an immediate reset.
// The simulation keeps a single ledger instance (the state that claim
// dissemination makes every correct node agree on) and charges the claim
// traffic to the network separately.
class Ledger {
  public:
    explicit Ledger(const TgsParams& p) : params_(p), dom_(p) {}

    const TgsParams& params() const { return params_; }
    const ScoreDomain& domain() const { return dom_; }

    void ensure(NodeId n) { scores_.try_emplace(n.v, dom_.init()); }

    // Apply one message claim to both endpoints. Returns the nodes this
    // event flagged (score crossed to <= 0); their scores are already reset.
    std::vector<NodeId> on_claim(ClaimKind k, NodeId sender, NodeId receiver) {
        std::vector<NodeId> flagged;
        if (bump(sender, k)) flagged.push_back(sender);
        if (receiver.v != sender.v && bump(receiver, k)) flagged.push_back(receiver);
        return flagged;
    }

    // A freshly (re)assigned node starts from a clean score.
    void reset(NodeId n) { scores_[n.v] = dom_.init(); }

    std::int64_t score_units(NodeId n) const {
        auto it = scores_.find(n.v);
        return it == scores_.end() ? dom_.init() : it->second;
    }
    double score(NodeId n) const { return dom_.to_real(score_units(n)); }
    std::uint64_t flag_count(NodeId n) const {
        auto it = flags_.find(n.v);
        return it == flags_.end() ? 0 : it->second;
    }

  private:
    bool bump(NodeId n, ClaimKind k) {
        auto [it, fresh] = scores_.try_emplace(n.v, dom_.init());
        (void)fresh;
        if (k == ClaimKind::kSuspicious) {
            it->second = dom_.apply_penalty(it->second);
            if (ScoreDomain::flagged(it->second)) {
                ++flags_[n.v];
                it->second = dom_.init();
                return true;
            }
        } else {
            it->second = dom_.apply_award(it->second);
        }
        return false;
    }

    TgsParams params_;
    ScoreDomain dom_;
    std::unordered_map<std::uint32_t, std::int64_t> scores_;
    std::unordered_map<std::uint32_t, std::uint64_t> flags_;
};

}  // namespace geoshield::tgs
