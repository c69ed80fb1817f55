#include "geoshield/meas_dispute/dispute.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace geoshield::meas_dispute {

using recovery::FaultKind;
using recovery::FaultRecord;

bool validate_declaration(const core::KeyStore& ks, const Declaration& d) {
    if (!ks.verify(d.payload(), d.sig) || d.sig.signer != d.declarer) return false;
    if (d.own) {
        if (!measure::validate_proposal(ks, *d.own)) return false;
        if (d.own->receiver != d.declarer) return false;
        if (d.own->round != d.round || !(d.own->dir == d.dir)) return false;
    }
    if (d.offending.empty()) return false;
    for (const Accept& a : d.offending) {
        if (!measure::validate_accept(ks, a)) return false;
        if (a.round != d.round || !(a.dir == d.dir)) return false;
    }
    return true;
}

bool validate_holder_log(const core::KeyStore& ks, const HolderLog& log) {
    return ks.verify(log.payload(), log.sig) && log.sig.signer == log.holder;
}

namespace {

// Key for grouping identical proposals across holder logs.
struct PairKey {
    std::uint32_t sender;
    std::uint32_t receiver;
    std::int64_t d_ns;
    auto operator<=>(const PairKey&) const = default;
};

}  // namespace

DisputeOutcome cross_validate(const core::KeyStore& ks, const core::TimingParams& tp,
                              std::size_t quorum, const std::set<NodeId>& expected_holders,
                              const std::vector<HolderLog>& logs,
                              const std::vector<Accept>& accepts, SimTime t_now) {
    DisputeOutcome out;

    // Group log versions per holder; detect equivocated logs. A holder whose
    // versions differ, or whose log fails validation, is faulted and all its
    // attestations are discarded.
    std::map<std::uint32_t, std::vector<const HolderLog*>> by_holder;
    for (const HolderLog& log : logs) by_holder[log.holder.v].push_back(&log);

    std::set<std::uint32_t> trusted;  // holders whose single log version is valid
    std::map<std::uint32_t, const HolderLog*> holder_log;
    for (const auto& [holder, versions] : by_holder) {
        bool equivocated = false;
        for (std::size_t i = 1; i < versions.size(); i++) {
            if (versions[i]->payload().bytes() != versions[0]->payload().bytes())
                equivocated = true;
        }
        if (equivocated) {
            out.faults.push_back({NodeId{holder}, FaultKind::kCommission,
                                  "dispute-log-equivocation", t_now});
            continue;
        }
        const HolderLog* log = versions[0];
        if (!validate_holder_log(ks, *log)) {
            out.faults.push_back({NodeId{holder}, FaultKind::kCommission,
                                  "dispute-log-bad-signature", t_now});
            continue;
        }
        bool tainted = false;
        for (const Proposal& p : log->entries) {
            if (!measure::validate_proposal(ks, p)) {
                tainted = true;
                break;
            }
        }
        if (tainted) {
            out.faults.push_back({NodeId{holder}, FaultKind::kCommission,
                                  "dispute-log-invalid-entry", t_now});
            continue;
        }
        trusted.insert(holder);
        holder_log[holder] = log;
    }

    for (NodeId h : expected_holders) {
        if (!by_holder.count(h.v)) {
            // Intra-region delivery is synchronous, so an absent log is the
            // holder's omission, not the network's.
            out.faults.push_back({h, FaultKind::kOmission, "dispute-log-missing", t_now});
        }
    }

    // Candidate pairs: identical proposals attested by a log quorum. At most
    // f faulty holders exist among 2f+1, so >= quorum (= f+1) attestations
    // guarantee at least one correct holder stored the proposal, which in
    // turn proves it was distributed during the round.
    std::map<PairKey, std::set<std::uint32_t>> attesters;
    for (std::uint32_t holder : trusted) {
        for (const Proposal& p : holder_log[holder]->entries) {
            attesters[{p.hb_sender.v, p.receiver.v, p.d.ns}].insert(holder);
        }
    }
    std::optional<Duration> best;
    for (const auto& [key, holders] : attesters) {
        if (holders.size() < quorum) continue;
        CandidatePair c{NodeId{key.sender}, NodeId{key.receiver}, Duration{key.d_ns},
                        holders.size()};
        out.candidates.push_back(c);
        if (!best || c.d < *best) best = c.d;
    }
    if (best) {
        out.timeout = false;
        out.new_accept = *best + tp.delta_inter;
    } else {
        out.timeout = true;
        out.new_accept = Duration{0};
    }

    // Accept attribution. Each candidate was broadcast to every holder, so
    // an accepter that ignored a smaller candidate, or claimed a timeout
    // despite candidates, is provably at fault; so is an accepter whose
    // value no trusted log supports, and one that signed conflicting values.
    std::map<std::uint32_t, const Accept*> first_accept;
    std::set<std::uint32_t> equivocators;
    for (const Accept& a : accepts) {
        if (!measure::validate_accept(ks, a)) continue;
        auto [it, fresh] = first_accept.try_emplace(a.accepter.v, &a);
        if (!fresh && !(a.payload().bytes() == it->second->payload().bytes()))
            equivocators.insert(a.accepter.v);
    }
    for (std::uint32_t z : equivocators)
        out.faults.push_back({NodeId{z}, FaultKind::kCommission, "accept-equivocation", t_now});
    for (const auto& [z, a] : first_accept) {
        if (equivocators.count(z)) continue;
        if (a->timeout) {
            if (best)
                out.faults.push_back({NodeId{z}, FaultKind::kCommission,
                                      "accept-timeout-despite-proposals", t_now});
            continue;
        }
        Duration claimed = a->d_acc - tp.delta_inter;
        // Support requires the same attestation quorum as candidacy: a lone
        // log entry (possibly the accepter's own) proves nothing.
        bool supported = false;
        for (const CandidatePair& c : out.candidates)
            if (c.d == claimed) supported = true;
        if (!supported) {
            out.faults.push_back(
                {NodeId{z}, FaultKind::kCommission, "accept-unsupported", t_now});
        } else if (best && *best < claimed) {
            out.faults.push_back(
                {NodeId{z}, FaultKind::kCommission, "accept-ignores-smaller", t_now});
        }
    }

    return out;
}

std::string dispute_audit_json(std::uint64_t round, DirectionId dir, NodeId observer,
                               const Declaration& decl, const DisputeOutcome& out) {
    nlohmann::json j;
    j["round"] = round;
    j["src"] = dir.src.v;
    j["dst"] = dir.dst.v;
    j["observer"] = observer.v;
    j["declarer"] = decl.declarer.v;
    if (decl.own) j["declared_d_s"] = decl.own->d.to_seconds();
    j["outcome"] = out.timeout ? "timeout" : "value";
    if (!out.timeout) j["new_accept_s"] = out.new_accept.to_seconds();
    j["candidates"] = out.candidates.size();
    nlohmann::json faults = nlohmann::json::array();
    for (const auto& f : out.faults) {
        faults.push_back({{"node", f.suspect.v},
                          {"kind", recovery::fault_kind_name(f.kind)},
                          {"reason", f.reason}});
    }
    j["faults"] = faults;
    return j.dump();
}

}  // namespace geoshield::meas_dispute
