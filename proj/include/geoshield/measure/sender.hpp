#pragma once

#include <optional>
#include <set>
#include <vector>

#include "geoshield/core/crypto.hpp"
#include "geoshield/measure/messages.hpp"

namespace geoshield::measure {

// Sender-side state for one (direction, round): collects signature shares
// from fellow upstream measurers and assembles the heartbeat once a quorum
// over identical content exists.
class SenderRound {
  public:
    SenderRound() = default;
    SenderRound(RoundContent content, std::size_t quorum)
        : content_(content), quorum_(quorum) {}

    const RoundContent& content() const { return content_; }

    // Add a share (own or received). Shares over different content are
    // ignored: they cannot contribute to this heartbeat.
    void add_share(const core::KeyStore& ks, const SigShare& share) {
        if (!(share.content == content_)) return;
        if (!ks.verify(content_.encode(), share.sig)) return;
        if (signers_.count(share.sig.signer.v)) return;
        signers_.insert(share.sig.signer.v);
        sigs_.push_back(share.sig);
    }

    bool ready() const { return sigs_.size() >= quorum_; }

    // Whether a share from x over this round's content arrived. A missing
    // share is deliberately not treated as evidence against x: silence and
    // a diverging content view are indistinguishable here, and chronic
    // absence is the scoring layer's job.
    bool has_share(NodeId x) const { return signers_.count(x.v) != 0; }

    // Phase 1b: assemble the heartbeat, outer-signed by this node.
    std::optional<Heartbeat> make_heartbeat(const core::Signer& signer) const {
        if (!ready()) return std::nullopt;
        Heartbeat hb;
        hb.content = content_;
        hb.sigs = sigs_;
        hb.sender = signer.id();
        hb.outer = signer.sign(hb.outer_payload());
        return hb;
    }

  private:
    RoundContent content_;
    std::size_t quorum_ = 0;
    std::set<std::uint32_t> signers_;
    std::vector<core::Signature> sigs_;
};

}  // namespace geoshield::measure
