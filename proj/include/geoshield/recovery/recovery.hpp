#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoshield/core/bytes.hpp"
#include "geoshield/core/crypto.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/recovery/fault.hpp"

namespace geoshield::recovery {

using core::Duration;
using core::NodeId;
using core::RegionId;
using core::SimTime;

// Detection-to-release and heartbeat-assembly allowances used by the
// propagation bound.
struct RecoveryParams {
    Duration d_det = Duration::millis(1);  // evidence check before release
    Duration e_hb = Duration::micros(500); // payload attach/assembly slack
};

// A recovery notice: who is faulty, how, signed by the detecting node and
// attested again by the signature quorum of every heartbeat that carries
// it. The id makes independent detections of the same fault converge on
// one notice.
//
// `t_release` is the detector's release instant and is covered by the
// detector signature. `t_restamp` schedules the attachment window of a
// forwarded copy: at hop 0 it equals `t_release`; when a remote region
// forwards the notice one hop further, the copy is restamped to a value
// derived from the carrier round's grid so that every node of the
// forwarding region computes the identical window (and hence identical
// heartbeat bundles) without any extra agreement step. The restamp stays
// outside the detector signature but inside the carried bytes, so a lie
// about it can only delay or skip one copy's window, never alter the
// attested fault.
struct RecoveryNotice {
    std::uint64_t rp_id = 0;
    NodeId suspect;
    FaultKind kind = FaultKind::kCommission;
    std::string reason;
    RegionId origin;
    SimTime t_release;      // when the detecting node released it (signed)
    std::uint8_t hop = 0;   // 0 at origin; forwarded copies carry 1
    SimTime t_restamp;      // schedules this copy's attachment window
    core::Signature sig;    // detector signature over encode()

    core::ByteWriter encode() const {
        core::ByteWriter w;
        w.u64(rp_id);
        w.u32(suspect.v);
        w.u8(kind == FaultKind::kCommission ? 0 : 1);
        w.str(reason);
        w.u32(origin.v);
        w.i64(t_release.ns);
        // hop and restamp deliberately excluded: forwarding must not be
        // able to change the attested identity
        return w;
    }
};

inline bool validate_notice(const core::KeyStore& ks, const RecoveryNotice& n) {
    return ks.verify(n.encode(), n.sig);
}

// Stable notice id so that every correct detector of one fault releases the
// same notice.
std::uint64_t notice_id(NodeId suspect, FaultKind kind, const std::string& reason,
                        std::uint64_t round, std::uint32_t dir_src, std::uint32_t dir_dst);

// First round whose signature-exchange instant lies at or after the release:
// the payload digest is fixed at signing time, so a notice can only ride
// rounds it precedes.
inline std::uint64_t rp_round_for(const core::TimingParams& tp, const RecoveryParams& rp,
                                  SimTime t_detect) {
    return core::first_round_sig_at_or_after(tp, t_detect + rp.d_det);
}

// Worst-case detection-to-apply bound over two propagation legs (origin
// region to its peers, peers forwarding one hop further): each leg pays the
// release allowance, a full round-alignment wait, intra distribution both
// sides, assembly, and the heartbeat acceptance timeout.
inline Duration btr_deadline(const core::TimingParams& tp, const RecoveryParams& rp) {
    Duration leg = rp.d_det + tp.T_int + tp.d_intra * 2 + rp.e_hb + tp.hb_timeout;
    return leg * 2;
}

// First round a notice copy attaches to, from its restamp alone. The
// margin (one intra hop plus the synchronization bound) guarantees every
// node of the attaching region holds the copy before that round's
// signature-exchange instant, so all of them compute the same attachment
// set — bundle digests of honest co-signers can never diverge over notice
// timing.
inline std::uint64_t notice_attach_round(const core::TimingParams& tp,
                                         const RecoveryNotice& n) {
    return core::first_round_sig_at_or_after(tp, n.t_restamp + tp.d_intra + tp.delta_syn);
}

// Per-node recovery bookkeeping: which notices were applied when, which
// copies this node attaches to outgoing heartbeats.
class RecoveryState {
  public:
    // How a newly learned copy participates in this node's own heartbeats.
    enum class Carry : std::uint8_t {
        kNone,     // apply only (hop-1 copies are terminal)
        kAsIs,     // attach with the copy's own hop/restamp (origin region)
        kRestamp,  // attach a hop-1 copy restamped for this region's window
    };

    // Apply a notice copy. Returns true when the notice is new here.
    bool on_receive(const RecoveryNotice& n, SimTime t_now, Carry carry,
                    SimTime restamp = SimTime{0}) {
        if (applied_.count(n.rp_id)) return false;
        applied_[n.rp_id] = t_now;
        excluded_.insert(n.suspect.v);
        if (carry == Carry::kAsIs) {
            attach_.push_back(n);
        } else if (carry == Carry::kRestamp) {
            RecoveryNotice fwd = n;
            fwd.hop = 1;
            fwd.t_restamp = restamp;
            attach_.push_back(fwd);
        }
        return true;
    }

    // Notice copies to attach to outgoing heartbeats of `round`. Purely a
    // function of the stored copies and the round grid, so every node of a
    // region holding the same copies produces the same set. Each copy
    // rides a fixed number of consecutive rounds before retiring (the
    // acceptance timeout bounds per-round delivery).
    std::vector<RecoveryNotice> attachments_for_round(std::uint64_t round,
                                                      const core::TimingParams& tp) const {
        std::vector<RecoveryNotice> out;
        for (const RecoveryNotice& n : attach_) {
            std::uint64_t first = notice_attach_round(tp, n);
            if (round >= first && round < first + kRoundsToRide) out.push_back(n);
        }
        return out;
    }

    bool applied(std::uint64_t rp_id) const { return applied_.count(rp_id) != 0; }
    std::optional<SimTime> applied_at(std::uint64_t rp_id) const {
        auto it = applied_.find(rp_id);
        if (it == applied_.end()) return std::nullopt;
        return it->second;
    }
    const std::set<std::uint32_t>& excluded() const { return excluded_; }
    bool is_excluded(NodeId n) const { return excluded_.count(n.v) != 0; }

    static constexpr std::uint64_t kRoundsToRide = 2;

  private:
    std::map<std::uint64_t, SimTime> applied_;
    std::set<std::uint32_t> excluded_;  // nodes barred from future roles here
    std::vector<RecoveryNotice> attach_;
};

// Build and sign a fresh hop-0 notice for a locally detected fault.
inline RecoveryNotice make_notice(const FaultRecord& f, RegionId origin,
                                  std::uint64_t rp_id, SimTime t_release,
                                  const core::Signer& detector) {
    RecoveryNotice n;
    n.rp_id = rp_id;
    n.suspect = f.suspect;
    n.kind = f.kind;
    n.reason = f.reason;
    n.origin = origin;
    n.t_release = t_release;
    n.hop = 0;
    n.t_restamp = t_release;
    n.sig = detector.sign(n.encode());
    return n;
}

struct RecoveryAuditRow {
    SimTime t_apply;
    NodeId observer;
    std::uint64_t rp_id = 0;
    NodeId suspect;
    FaultKind kind = FaultKind::kCommission;
    std::string reason;
    std::uint8_t hop = 0;
};

std::string recovery_audit_csv(const std::vector<RecoveryAuditRow>& rows);

}  // namespace geoshield::recovery
