#include "geoshield/poc/poc.hpp"

#include <algorithm>
#include <sstream>

namespace geoshield::poc {

bool validate_final(const core::KeyStore& ks, const PocFinal& f, std::size_t quorum) {
    core::ByteWriter payload = f.tuple_payload();
    std::set<std::uint32_t> signers;
    for (const core::Signature& s : f.sigs) {
        if (!ks.verify(payload, s)) return false;
        signers.insert(s.signer.v);
    }
    return signers.size() >= quorum;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::kPending: return "pending";
        case Verdict::kCorrect: return "correct";
        case Verdict::kIncorrect: return "incorrect";
    }
    return "?";
}

bool InputTracker::on_input(NodeId sender, Hash128 h, SimTime t) {
    by_hash_[h].push_back({sender, t});
    if (settled_) return false;  // verdicts already out; late copies never take over
    if (!in_use_) {
        in_use_ = h;
        return true;
    }
    return false;
}

std::vector<InputTracker::Event> InputTracker::settle(const std::set<Hash128>& finals_for_job,
                                                      SimTime t) {
    (void)t;
    std::vector<Event> events;
    if (settled_) return events;
    settled_ = true;

    // At most one proof can exist; if several hashes are claimed proven the
    // validation layer let something through, so be conservative and treat
    // the situation as proof-less.
    std::optional<Hash128> proven;
    if (finals_for_job.size() == 1) proven = *finals_for_job.begin();

    if (proven) {
        for (const auto& [h, arrivals] : by_hash_) {
            Verdict v = (h == *proven) ? Verdict::kCorrect : Verdict::kIncorrect;
            for (const Arrival& a : arrivals) events.push_back({a.sender, h, v, false});
        }
        bool switched = !(in_use_ && *in_use_ == *proven);
        in_use_ = *proven;
        if (!events.empty() && switched) {
            // Flag the first correct-copy event as the value taking over.
            for (Event& e : events) {
                if (e.verdict == Verdict::kCorrect) {
                    e.became_in_use = true;
                    break;
                }
            }
        }
        // The proven value may not have arrived as a data message at all
        // (sender omitted it); consumers learn the hash is good and fetch
        // the body from the proof carrier. Emit a synthetic correct event so
        // the caller can apply the corrected value.
        if (!by_hash_.count(*proven))
            events.push_back({NodeId{0xffffffff}, *proven, Verdict::kCorrect, switched});
    } else {
        // No proof in time: every received copy is untrustworthy.
        for (const auto& [h, arrivals] : by_hash_)
            for (const Arrival& a : arrivals)
                events.push_back({a.sender, h, Verdict::kIncorrect, false});
        in_use_.reset();
        needs_new_input_ = true;
    }
    return events;
}

std::string verdict_csv(const std::vector<VerdictRow>& rows) {
    std::ostringstream os;
    os << "t_s,task,job,observer,sender,verdict,in_use\n";
    for (const VerdictRow& r : rows) {
        os << core::format_seconds(r.t) << ',' << r.task.v << ',' << r.job.v << ','
           << r.observer.v << ',';
        if (r.sender.v == 0xffffffff)
            os << "proof";
        else
            os << r.sender.v;
        os << ',' << verdict_name(r.verdict) << ',' << (r.in_use ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace geoshield::poc
