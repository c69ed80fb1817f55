#include "geoshield/measure/round.hpp"

#include <set>
#include <sstream>

namespace geoshield::measure {

bool validate_heartbeat(const core::KeyStore& ks, const Heartbeat& hb, std::size_t quorum) {
    if (!ks.verify(hb.outer_payload(), hb.outer)) return false;
    if (hb.outer.signer != hb.sender) return false;
    core::ByteWriter content = hb.content.encode();
    std::set<std::uint32_t> signers;
    for (const Signature& s : hb.sigs) {
        if (!ks.verify(content, s)) return false;
        signers.insert(s.signer.v);
    }
    return signers.size() >= quorum;
}

bool validate_proposal(const core::KeyStore& ks, const Proposal& p) {
    return ks.verify(p.payload(), p.sig) && p.sig.signer == p.receiver && p.d.ns >= 0;
}

bool validate_accept(const core::KeyStore& ks, const Accept& a) {
    return ks.verify(a.payload(), a.sig) && a.sig.signer == a.accepter;
}

Duration proposal_d_min(const core::TimingParams& tp, SimTime t_local_recv, SimTime t_n) {
    return (t_local_recv - t_n) - tp.t_prop - tp.d_intra - tp.delta_syn;
}

std::string round_summary_csv(const std::vector<RoundSummaryRow>& rows) {
    std::ostringstream os;
    os << "round,src,dst,outcome,latency_s,heartbeats,proposals,accepts\n";
    for (const RoundSummaryRow& r : rows) {
        os << r.round << ',' << r.dir.src.v << ',' << r.dir.dst.v << ',';
        switch (r.decision.kind) {
            case Decision::Kind::kValue:
                os << "value," << core::format_seconds(r.decision.d);
                break;
            case Decision::Kind::kTimeout:
                os << "timeout,";
                break;
            case Decision::Kind::kDisputed:
                os << "disputed,";
                break;
        }
        os << ',' << r.heartbeats << ',' << r.proposals << ',' << r.accepts << '\n';
    }
    return os.str();
}

}  // namespace geoshield::measure
