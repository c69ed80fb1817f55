#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoshield/core/crypto.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/measure/messages.hpp"
#include "geoshield/recovery/fault.hpp"

namespace geoshield::meas_dispute {

using core::Duration;
using core::NodeId;
using core::SimTime;
using measure::Accept;
using measure::DirectionId;
using measure::Proposal;

// Validation and decision processing allowances for the dispute stages.
struct DisputeParams {
    Duration e_dclr_v = Duration::micros(100);  // declaration validation
    Duration e_log_ex = Duration::micros(100);  // log assembly/exchange
    Duration e_log_v = Duration::micros(100);   // log cross-validation
    Duration e_decide = Duration::micros(100);  // final decision
};

// Stage deadlines, all relative to the declaration instant t_dclr.
// Stage 1: declaration broadcast (arrives within d_intra).
// Stage 2: forward-once, so every correct node holds it by +2*d_intra.
// Stage 3: holders broadcast proposal logs; direct copies arrive by
//          +3*d_intra (+ allowances), forwarded copies one hop later.
// Stage 4: decision once the log union is stable.
struct DisputeSchedule {
    SimTime t_dclr;
    SimTime t_fwd_done;   // declarations held everywhere
    SimTime t_logs_send;  // holders emit logs
    SimTime t_logs_due;   // direct log copies due (missing => omission fault)
    SimTime t_decide;
};

inline DisputeSchedule make_dispute_schedule(const core::TimingParams& tp,
                                             const DisputeParams& dp, SimTime t_dclr) {
    DisputeSchedule s;
    s.t_dclr = t_dclr;
    s.t_fwd_done = t_dclr + tp.d_intra * 2;
    s.t_logs_send = s.t_fwd_done + dp.e_dclr_v;
    s.t_logs_due = t_dclr + tp.d_intra * 3 + dp.e_dclr_v + dp.e_log_ex;
    s.t_decide = t_dclr + tp.d_intra * 5 + dp.e_dclr_v + dp.e_log_ex + dp.e_log_v + dp.e_decide;
    return s;
}

// Stage 1 declaration: the declarer's evidence. `own` is the declarer's own
// proposal when it has one (measurers); a bare accept-tally conflict is also
// a valid trigger, in which case only `offending` is set.
struct Declaration {
    std::uint64_t round = 0;
    DirectionId dir;
    NodeId declarer;
    std::optional<Proposal> own;
    std::vector<Accept> offending;
    core::Signature sig;

    core::ByteWriter payload() const {
        core::ByteWriter w;
        w.u64(round);
        w.u32(dir.src.v);
        w.u32(dir.dst.v);
        w.u32(declarer.v);
        w.u8(own ? 1 : 0);
        if (own) w.raw(own->payload().bytes());
        w.u64(offending.size());
        for (const Accept& a : offending) w.raw(a.payload().bytes());
        return w;
    }
};

// Stage 3 proposal log: everything one holder stored for the round. Entries
// were filtered at receipt time (valid signature, reasonableness bound,
// arrival before the accept instant).
struct HolderLog {
    std::uint64_t round = 0;
    DirectionId dir;
    NodeId holder;
    std::vector<Proposal> entries;
    core::Signature sig;

    core::ByteWriter payload() const {
        core::ByteWriter w;
        w.u64(round);
        w.u32(dir.src.v);
        w.u32(dir.dst.v);
        w.u32(holder.v);
        w.u64(entries.size());
        for (const Proposal& p : entries) w.raw(p.payload().bytes());
        return w;
    }
};

bool validate_declaration(const core::KeyStore& ks, const Declaration& d);
bool validate_holder_log(const core::KeyStore& ks, const HolderLog& log);

// A proposal pair attested by enough holder logs to be trusted.
struct CandidatePair {
    NodeId hb_sender;
    NodeId receiver;
    Duration d;
    std::size_t attesters = 0;
};

struct DisputeOutcome {
    bool timeout = false;       // no candidate pair survived
    Duration new_accept;        // min candidate latency + delta_inter
    std::vector<CandidatePair> candidates;
    std::vector<recovery::FaultRecord> faults;
};

// Stage 3/4 cross-validation. `logs` is the union of log messages this node
// holds (possibly several versions per holder when a holder equivocated);
// `expected_holders` is the full proposal-log quorum (measurers plus log
// keepers); `accepts` are the accepts this node saw for the round. The
// new-accept result depends only on the log union, which forward-once makes
// identical at all correct nodes.
DisputeOutcome cross_validate(const core::KeyStore& ks, const core::TimingParams& tp,
                              std::size_t quorum, const std::set<NodeId>& expected_holders,
                              const std::vector<HolderLog>& logs,
                              const std::vector<Accept>& accepts, SimTime t_now);

// One JSON line per resolved dispute for the audit stream.
std::string dispute_audit_json(std::uint64_t round, DirectionId dir, NodeId observer,
                               const Declaration& decl, const DisputeOutcome& out);

}  // namespace geoshield::meas_dispute
