#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoshield/core/crypto.hpp"
#include "geoshield/core/ids.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/core/time.hpp"
#include "geoshield/recovery/fault.hpp"

namespace geoshield::poc {

using core::Duration;
using core::Hash128;
using core::JobId;
using core::NodeId;
using core::SimTime;
using core::TaskId;

// Processing allowances for proof generation: local hashing/compare and
// countersignature checks.
struct PocParams {
    Duration e_poc = Duration::micros(200);
    Duration e_sig = Duration::micros(100);
};

// One replica's countersignature over a job output hash.
struct PocPartial {
    TaskId task;
    JobId job;
    Hash128 h_m;
    core::Signature sig;

    core::ByteWriter payload() const {
        core::ByteWriter w;
        w.u32(task.v);
        w.u64(job.v);
        w.u64(h_m.hi);
        w.u64(h_m.lo);
        return w;
    }
};

// Final proof: a signature quorum over the same (task, job, output hash).
// At most one final can exist per job: a second one would need a correct
// replica to sign a different hash for the same deterministic job.
struct PocFinal {
    TaskId task;
    JobId job;
    Hash128 h_m;
    std::vector<core::Signature> sigs;

    core::ByteWriter tuple_payload() const {
        PocPartial p{task, job, h_m, {}};
        return p.payload();
    }
};

bool validate_final(const core::KeyStore& ks, const PocFinal& f, std::size_t quorum);

// The slack between a job's completion and the first heartbeat round that
// can carry its proof: proof exchange, one intra hop each way, signature
// checks, the heartbeat assembly window, plus the clock-synchronization
// bound so that every node of the sender region holds the finished proof
// before its local signature-exchange instant — heartbeat bundles of
// honest co-signers then agree byte for byte.
inline Duration poc_gap(const core::TimingParams& tp, const PocParams& pp) {
    return pp.e_poc + tp.d_intra * 2 + pp.e_sig + tp.t_hb + tp.delta_syn;
}

// Smallest round whose send instant is at least t_m + gap.
inline std::uint64_t poc_round_for(const core::TimingParams& tp, const PocParams& pp,
                                   SimTime t_m) {
    return core::first_round_send_at_or_after(tp, t_m + poc_gap(tp, pp));
}

// Assembly of a final proof for one (task, job) from replica partials.
// Partials are grouped by claimed output hash; a final exists once any hash
// reaches the signature quorum. Every region node can run one of these (it
// needs no knowledge of the output itself), which is what lets proofs form
// region-wide within one intra hop of the partial broadcast.
class PocAssembler {
  public:
    PocAssembler() = default;
    PocAssembler(TaskId task, JobId job, std::size_t quorum)
        : task_(task), job_(job), quorum_(quorum) {}

    // Add a partial; returns true if this addition completed a final.
    bool add(const core::KeyStore& ks, const PocPartial& p) {
        if (p.task != task_ || p.job != job_) return false;
        if (!ks.verify(p.payload(), p.sig)) return false;
        Bucket& b = buckets_[p.h_m];
        if (b.signers.count(p.sig.signer.v)) return false;
        b.signers.insert(p.sig.signer.v);
        b.sigs.push_back(p.sig);
        return b.sigs.size() == quorum_;
    }

    bool ready() const {
        for (const auto& [h, b] : buckets_)
            if (b.sigs.size() >= quorum_) return true;
        return false;
    }

    std::optional<PocFinal> make_final() const {
        for (const auto& [h, b] : buckets_)
            if (b.sigs.size() >= quorum_) return PocFinal{task_, job_, h, b.sigs};
        return std::nullopt;
    }

  private:
    struct Bucket {
        std::set<std::uint32_t> signers;
        std::vector<core::Signature> sigs;
    };
    TaskId task_;
    JobId job_;
    std::size_t quorum_ = 0;
    std::map<Hash128, Bucket> buckets_;
};

// Downstream verdicts for one received input.
enum class Verdict : std::uint8_t { kPending, kCorrect, kIncorrect };

const char* verdict_name(Verdict v);

// Downstream-side tracking for one expected (task, job) input. Inputs are
// used optimistically on first arrival; the proof carried by the job's
// heartbeat round settles verdicts, possibly replacing the value in use.
class InputTracker {
  public:
    struct Event {
        NodeId sender;
        Hash128 h;
        Verdict verdict = Verdict::kPending;
        bool became_in_use = false;  // the validated value replaced the one in use
    };

    InputTracker() = default;
    InputTracker(TaskId task, JobId job) : task_(task), job_(job) {}

    TaskId task() const { return task_; }
    JobId job() const { return job_; }

    // Input copy arrived. Returns true when this hash went into optimistic
    // use (first distinct value wins until the proof says otherwise).
    bool on_input(NodeId sender, Hash128 h, SimTime t);

    // Settle against the set of validated finals carried by the job's
    // heartbeat round. A single valid heartbeat suffices to call this early:
    // its attachment set is attested by an upstream signature quorum, so a
    // missing proof at that point is already proof of incorrectness.
    // `finals_for_job` holds the output hashes of validated finals matching
    // (task, job); empty means no proof was generated in time.
    std::vector<Event> settle(const std::set<Hash128>& finals_for_job, SimTime t);

    // The measurement round carrying the proof timed out: timeliness of the
    // proof channel is unknown, so the consumer must fall back to safe mode.
    void mark_unjudgeable() { unjudgeable_ = true; }
    bool unjudgeable() const { return unjudgeable_; }

    bool settled() const { return settled_; }
    // A new-input retry went out: allow the retry's proof round to settle
    // the job again. Verdict history stands; nothing is in use meanwhile.
    void rearm() {
        settled_ = false;
        needs_new_input_ = false;
    }
    std::optional<Hash128> in_use() const { return in_use_; }
    // True when settle() found no proof: every received copy is invalid and
    // a fresh input must be requested upstream.
    bool needs_new_input() const { return needs_new_input_; }

  private:
    TaskId task_;
    JobId job_;
    struct Arrival {
        NodeId sender;
        SimTime t;
    };
    std::map<Hash128, std::vector<Arrival>> by_hash_;  // all copies per value
    std::optional<Hash128> in_use_;
    bool settled_ = false;
    bool needs_new_input_ = false;
    bool unjudgeable_ = false;
};

// Audit row for the verdict stream.
struct VerdictRow {
    SimTime t;
    TaskId task;
    JobId job;
    NodeId observer;
    NodeId sender;
    Verdict verdict;
    bool in_use = false;
};

std::string verdict_csv(const std::vector<VerdictRow>& rows);

}  // namespace geoshield::poc
