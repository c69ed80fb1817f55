#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoshield/core/time.hpp"

namespace geoshield::core {

// Timing parameters of one inter-region measurement direction. All values are
// region-pair properties except t_0/T_int, which define the global round grid.
struct TimingParams {
    SimTime t_0;                                      // first round send instant
    Duration T_int = Duration::seconds(1);            // round period
    Duration d_intra = Duration::millis(2);           // intra-region link bound
    Duration delta_intra = Duration::micros(500);     // intra-region latency spread
    Duration t_hb = Duration::millis(1);              // heartbeat construction time
    Duration delta_hb = Duration::micros(200);        // construction time spread
    Duration delta_syn = Duration::micros(100);       // max pairwise clock offset
    Duration t_prop = Duration::millis(2);            // proposal processing bound
    Duration delta_prop = Duration::micros(500);      // proposal processing spread
    Duration hb_timeout = Duration::millis(200);      // accept deadline after send
    Duration delta_inter = Duration::millis(1);       // inter-region jitter bound

    // Earliest-send margin for a valid heartbeat: no valid heartbeat of round
    // n can be sent before t_send(n) - t_early.
    Duration t_early() const { return delta_syn + delta_intra + delta_hb; }

    // Returns problems (empty when valid): every field sane and the derived
    // schedule instants properly ordered within a round.
    std::vector<std::string> validate() const;
};

// Instants of one measurement round. Derived cutoffs fix the proposal and
// decision deadlines relative to the accept deadline so that one intra-region
// propagation plus processing always fits between them.
struct RoundSchedule {
    SimTime t_sig;        // signature exchange start
    SimTime t_send;       // heartbeat send instant t_n
    SimTime t_hb_cutoff;  // latest heartbeat arrival that still yields a proposal
    SimTime t_accept;     // accept computation instant (hb timeout)
    SimTime t_decide;     // decision instant
};

inline SimTime round_send_time(const TimingParams& p, std::uint64_t n) {
    return p.t_0 + p.T_int * static_cast<std::int64_t>(n);
}

inline RoundSchedule round_schedule(const TimingParams& p, std::uint64_t n) {
    RoundSchedule s;
    s.t_send = round_send_time(p, n);
    s.t_sig = s.t_send - p.d_intra - p.t_hb;
    s.t_accept = s.t_send + p.hb_timeout;
    s.t_hb_cutoff = s.t_accept - p.t_prop - p.d_intra;
    s.t_decide = s.t_accept + p.t_prop + p.d_intra;
    return s;
}

// Smallest n with t_send(n) >= t (0 if t precedes the grid).
inline std::uint64_t first_round_send_at_or_after(const TimingParams& p, SimTime t) {
    if (t.ns <= p.t_0.ns) return 0;
    std::int64_t delta = t.ns - p.t_0.ns;
    return static_cast<std::uint64_t>((delta + p.T_int.ns - 1) / p.T_int.ns);
}

// Smallest n with t_sig(n) >= t (0 if t precedes the grid).
inline std::uint64_t first_round_sig_at_or_after(const TimingParams& p, SimTime t) {
    return first_round_send_at_or_after(p, t + p.d_intra + p.t_hb);
}

}  // namespace geoshield::core
