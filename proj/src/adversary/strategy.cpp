#include "geoshield/adversary/strategy.hpp"

namespace geoshield::adversary {

const char* attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::kNone: return "none";
        case AttackKind::kAggressive: return "aggressive";
        case AttackKind::kAdaptive: return "adaptive";
        case AttackKind::kEarlyHeartbeat: return "early_heartbeat";
        case AttackKind::kLateHeartbeat: return "late_heartbeat";
        case AttackKind::kEquivocateAccept: return "equivocate_accept";
        case AttackKind::kIncorrectOutput: return "incorrect_output";
        case AttackKind::kWithholdCountersign: return "withhold_countersign";
        case AttackKind::kSelectivePocForward: return "selective_poc_forward";
        case AttackKind::kLyingReceiver: return "lying_receiver";
    }
    return "?";
}

std::optional<AttackKind> parse_attack_kind(const std::string& s) {
    for (AttackKind k :
         {AttackKind::kNone, AttackKind::kAggressive, AttackKind::kAdaptive,
          AttackKind::kEarlyHeartbeat, AttackKind::kLateHeartbeat,
          AttackKind::kEquivocateAccept, AttackKind::kIncorrectOutput,
          AttackKind::kWithholdCountersign, AttackKind::kSelectivePocForward,
          AttackKind::kLyingReceiver}) {
        if (s == attack_kind_name(k)) return k;
    }
    return std::nullopt;
}

namespace {

// Maximum damage, no self-preservation: drop every assigned inter-region
// send and claim every inter-region arrival missing.
class Aggressive final : public Strategy {
  public:
    using Strategy::Strategy;
    SendDecision on_inter_send(NodeId, NodeId, SimTime) override { return {true, {}}; }
    bool claim_false_suspicious(NodeId, NodeId, SimTime) override { return true; }
};

// Same action set, but every action is gated on the mirrored score staying
// strictly positive after the penalty it will cause lands.
class Adaptive final : public Strategy {
  public:
    Adaptive(Blackboard* bb, const AttackSpec& spec) : Strategy(bb), spec_(spec) {}

    SendDecision on_inter_send(NodeId self, NodeId, SimTime) override {
        if (!afford(self)) return {};
        bb_->book_pending(self);
        if (spec_.delay.ns > 0) return {false, spec_.delay};
        return {true, {}};
    }
    bool claim_false_suspicious(NodeId self, NodeId, SimTime) override {
        if (spec_.delay.ns > 0) return false;  // delay mode: sender-side only
        if (!afford(self)) return false;
        bb_->book_pending(self);
        return true;
    }

  private:
    bool afford(NodeId self) const {
        return bb_->projected_units(self) - bb_->mirror().domain().penalty_step() > 0;
    }
    AttackSpec spec_;
};

class HeartbeatSkew final : public Strategy {
  public:
    HeartbeatSkew(Blackboard* bb, Duration skew) : Strategy(bb), skew_(skew) {}
    Duration heartbeat_skew(NodeId, std::uint64_t) override { return skew_; }

  private:
    Duration skew_;
};

// Send the honest accept to peers with even index-parity and a doctored one
// (offset latency or a timeout claim) to the rest.
class EquivocateAccept final : public Strategy {
  public:
    EquivocateAccept(Blackboard* bb, const AttackSpec& spec) : Strategy(bb), spec_(spec) {}

    std::optional<std::pair<bool, Duration>> accept_override(NodeId, NodeId dst,
                                                             std::uint64_t, bool honest_timeout,
                                                             Duration honest_d) override {
        if (dst.v % 2 == 0) return std::nullopt;
        if (spec_.accept_timeout_alt) return std::make_pair(true, Duration{0});
        if (honest_timeout) return std::make_pair(false, Duration{spec_.accept_delta_ns});
        return std::make_pair(false, Duration{honest_d.ns + spec_.accept_delta_ns});
    }

  private:
    AttackSpec spec_;
};

// Substitute own transmitted output while countersigning peers' correct
// output, so the proof for the right value still forms (the stealthy
// variant; refusing to countersign is an overt omission handled separately).
class IncorrectOutput final : public Strategy {
  public:
    IncorrectOutput(Blackboard* bb, std::vector<std::uint8_t> bytes)
        : Strategy(bb), bytes_(std::move(bytes)) {}
    std::optional<std::vector<std::uint8_t>> output_override(
        NodeId, TaskId, JobId, const std::vector<std::uint8_t>&) override {
        return bytes_;
    }

  private:
    std::vector<std::uint8_t> bytes_;
};

class WithholdCountersign final : public Strategy {
  public:
    using Strategy::Strategy;
    bool withhold_countersign(NodeId, TaskId, JobId) override { return true; }
};

class SelectivePocForward final : public Strategy {
  public:
    using Strategy::Strategy;
    bool omit_final_from_attachments(NodeId, TaskId, JobId) override { return true; }
};

class LyingReceiver final : public Strategy {
  public:
    LyingReceiver(Blackboard* bb, const AttackSpec& spec) : Strategy(bb), spec_(spec) {}

    bool suppress_proposal(NodeId, NodeId, std::uint64_t) override {
        return spec_.suppress_proposals;
    }
    std::optional<Duration> proposal_value_override(NodeId, NodeId, std::uint64_t,
                                                    Duration honest_d) override {
        if (spec_.d_shrink.ns <= 0) return std::nullopt;
        Duration d{honest_d.ns - spec_.d_shrink.ns};
        if (d.ns < 0) d.ns = 0;
        return d;
    }

  private:
    AttackSpec spec_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(const AttackSpec& spec, Blackboard* bb) {
    switch (spec.kind) {
        case AttackKind::kNone: return std::make_unique<Strategy>(bb);
        case AttackKind::kAggressive: return std::make_unique<Aggressive>(bb);
        case AttackKind::kAdaptive: return std::make_unique<Adaptive>(bb, spec);
        case AttackKind::kEarlyHeartbeat:
        case AttackKind::kLateHeartbeat:
            return std::make_unique<HeartbeatSkew>(bb, spec.hb_skew);
        case AttackKind::kEquivocateAccept: return std::make_unique<EquivocateAccept>(bb, spec);
        case AttackKind::kIncorrectOutput:
            return std::make_unique<IncorrectOutput>(bb, spec.output_bytes);
        case AttackKind::kWithholdCountersign:
            return std::make_unique<WithholdCountersign>(bb);
        case AttackKind::kSelectivePocForward:
            return std::make_unique<SelectivePocForward>(bb);
        case AttackKind::kLyingReceiver: return std::make_unique<LyingReceiver>(bb, spec);
    }
    return std::make_unique<Strategy>(bb);
}

}  // namespace geoshield::adversary
