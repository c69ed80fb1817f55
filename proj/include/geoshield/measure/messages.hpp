#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geoshield/core/bytes.hpp"
#include "geoshield/core/crypto.hpp"
#include "geoshield/core/ids.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/core/time.hpp"

namespace geoshield::measure {

using core::Duration;
using core::Hash128;
using core::NodeId;
using core::RegionId;
using core::Signature;
using core::SimTime;

// One measured direction: heartbeats flow src -> dst.
struct DirectionId {
    RegionId src;
    RegionId dst;
    constexpr auto operator<=>(const DirectionId&) const = default;
};

// What the round's signature exchange covers: the round coordinates plus a
// digest over everything attached to the heartbeat (correctness proofs and
// recovery payloads). A heartbeat with a different attachment set cannot
// reuse the signature set.
struct RoundContent {
    std::uint64_t round = 0;
    DirectionId dir;
    Hash128 attach_digest;

    core::ByteWriter encode() const {
        core::ByteWriter w;
        w.u64(round);
        w.u32(dir.src.v);
        w.u32(dir.dst.v);
        w.u64(attach_digest.hi);
        w.u64(attach_digest.lo);
        return w;
    }
    constexpr auto operator<=>(const RoundContent&) const = default;
};

// Phase 1a: a sender-side measurer's signature share over the round content.
struct SigShare {
    RoundContent content;
    Signature sig;
};

// Phase 1b heartbeat: sender x, signature set S_n, outer signature binding
// x to (content, S_n). Attached payload bytes are carried by the runtime.
struct Heartbeat {
    RoundContent content;
    std::vector<Signature> sigs;  // distinct senders-side signers over content
    NodeId sender;
    Signature outer;

    core::ByteWriter outer_payload() const {
        core::ByteWriter w = content.encode();
        w.u64(sigs.size());
        for (const Signature& s : sigs) {
            w.u64(s.mac.hi);
            w.u64(s.mac.lo);
            w.u32(s.signer.v);
        }
        w.u32(sender.v);
        return w;
    }
};

// Phase 2 proposal: receiver y measured latency d for x's heartbeat.
struct Proposal {
    std::uint64_t round = 0;
    DirectionId dir;
    NodeId hb_sender;  // x
    NodeId receiver;   // y
    Duration d;
    Signature sig;

    core::ByteWriter payload() const {
        core::ByteWriter w;
        w.u64(round);
        w.u32(dir.src.v);
        w.u32(dir.dst.v);
        w.u32(hb_sender.v);
        w.u32(receiver.v);
        w.i64(d.ns);
        return w;
    }
};

// Phase 3b accept: either a latency value or an explicit timeout marker.
struct Accept {
    std::uint64_t round = 0;
    DirectionId dir;
    NodeId accepter;
    bool timeout = false;
    Duration d_acc;
    Signature sig;

    core::ByteWriter payload() const {
        core::ByteWriter w;
        w.u64(round);
        w.u32(dir.src.v);
        w.u32(dir.dst.v);
        w.u32(accepter.v);
        w.u8(timeout ? 1 : 0);
        w.i64(timeout ? 0 : d_acc.ns);
        return w;
    }
};

// Phase 4 outcome for one (direction, round) on one node.
struct Decision {
    enum class Kind : std::uint8_t { kValue, kTimeout, kDisputed };
    Kind kind = Kind::kTimeout;
    Duration d;  // meaningful for kValue
};

// --- validation -----------------------------------------------------------

// A heartbeat is valid iff the outer signature binds the claimed sender and
// the signature set holds >= quorum distinct valid signatures over content.
bool validate_heartbeat(const core::KeyStore& ks, const Heartbeat& hb, std::size_t quorum);

bool validate_proposal(const core::KeyStore& ks, const Proposal& p);
bool validate_accept(const core::KeyStore& ks, const Accept& a);

// Phase 3a reasonableness bound: a proposal received at local time t for
// round send instant t_n cannot claim a latency below
//   d_min = (t - t_n) - t_prop - d_intra - delta_syn.
Duration proposal_d_min(const core::TimingParams& tp, SimTime t_local_recv, SimTime t_n);

inline bool proposal_reasonable(const core::TimingParams& tp, const Proposal& p,
                                SimTime t_local_recv, SimTime t_n) {
    return p.d >= proposal_d_min(tp, t_local_recv, t_n);
}

}  // namespace geoshield::measure
