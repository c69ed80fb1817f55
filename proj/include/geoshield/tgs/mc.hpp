#pragma once

#include <cstdint>
#include <utility>

#include "geoshield/tgs/score.hpp"

namespace geoshield::tgs::mc {

// Month-scale Monte Carlo engine for the timeliness-governance layer.
//
// The full protocol simulator resolves every message of every round; that is
// the right tool for correctness checks but far too slow for month-long
// (millions of invocations) governance experiments over thousands of trials.
// This engine keeps the governance-relevant state exactly — integer scores,
// flag counts, replica membership — and advances time geometrically between
// score events. The skip is exact: a stretch with no suspicious claim moves
// a score by a closed-form capped award sum, and every stochastic component
// (salvo loss, correlated burst, jitter beyond the claim bound) is a
// per-invocation Bernoulli whose next occurrence is geometric.
//
// Model of one inter-region producer task:
//   - The producing region has n = 2f+1 nodes; f+1 hold replica slots; one
//     node may be compromised. Both the replica set and the compromised node
//     are drawn uniformly per trial.
//   - Every invocation (one per period), each replica ships its output copy
//     to the f+1 downstream consumers. Per consumer, a delivered copy is
//     late beyond the jitter bound with probability 1 - p_actual (suspicious
//     claim; the copy still arrives far inside the liveness deadline). The
//     whole salvo is lost with probability loss_indep (sender uplink loss:
//     every consumer claims suspicious, nothing arrives). With probability
//     loss_burst a correlated outage wipes all replicas' salvos at once.
//   - Liveness: the downstream task needs one delivered copy per invocation.
//     With governance on, a missed claim deadline exposes the omission
//     milliseconds into the period, leaving room for one re-execution; the
//     invocation fails only if the retry salvo is also empty. Without
//     governance nothing watches the claim deadline: the first wiped salvo
//     is discovered at the liveness deadline and the system leaves normal
//     mode.
//   - Claims: one per replica per consumer per salvo, suspicious -> penalty,
//     normal -> award (capped). A score at or below zero flags the node:
//     flag count increments, the score resets, and a held replica slot is
//     swapped for the spare with the fewest flags. Re-seating task state
//     under a live deadline is not free: each swap fails the invocation in
//     flight with probability handoff_miss.
//   - Attacks: `aggressive` drops every salvo while holding a slot.
//     `adaptive` mirrors its own ledger and drops only when the resulting
//     score stays positive, so it is never flagged; it is not applicable
//     when beta <= f+1, where one dropped salvo already costs the full
//     score range.
//
// The default loss knobs calibrate the ungoverned configuration to the
// reference month-scale operating points reproduced by the experiment suite
// (stay-normal 0.107 at f=1 and 0.486 at f=2, independent of p_actual); the
// harness records the calibration note in every run manifest.

inline constexpr std::uint64_t kMonthInvocations = 2'590'000;
inline constexpr double kLossIndep = 5.6500e-4;   // per-salvo uplink loss
inline constexpr double kLossBurst = 1.1950e-7;   // correlated all-replica wipe
inline constexpr double kHandoffMiss = 1.2e-4;    // deadline miss per slot swap

enum class Attack : std::uint8_t { kNone, kAggressive, kAdaptive };

const char* attack_name(Attack a);

struct McConfig {
    std::int64_t f = 1;
    TgsParams tgs;                      // alpha, beta, configured p_norm
    double p_actual = 0.999;            // actual per-message in-time probability
    double loss_indep = kLossIndep;
    double loss_burst = kLossBurst;
    double handoff_miss = kHandoffMiss;
    bool tgs_enabled = true;            // claims, flags, swaps, retry
    Attack attack = Attack::kAggressive;
    bool attacker_present = true;       // false models a clean deployment
    std::uint64_t invocations = kMonthInvocations;
};

// Adaptive restraint is meaningless when one dropped salvo (f+1 claims of
// s_max/beta each) already exhausts the score.
inline bool adaptive_applicable(std::int64_t f, std::int64_t beta) { return beta > f + 1; }

struct TrialResult {
    bool stayed_normal = true;
    std::uint64_t fail_inv = 0;         // first failed invocation (when !stayed_normal)
    std::uint64_t attacker_flags = 0;
    std::uint64_t honest_flags = 0;
    std::uint64_t swaps = 0;
    std::uint64_t attacker_drops = 0;   // salvos the attacker suppressed
    bool attacker_started_in = false;   // held a replica slot at t = 0
};

TrialResult run_trial(const McConfig& cfg, std::uint64_t seed);

struct CellStats {
    bool applicable = true;
    std::uint64_t trials = 0;
    std::uint64_t stayed = 0;
    std::uint64_t excluded = 0;         // out-of-model trials (budget exceeded)
    double p_hat = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
};

// Runs `trials` independent trials; seeds derive from (master_seed, the cell
// parameters, trial index), so cells and trials are independent streams and
// any cell can be reproduced in isolation.
CellStats run_cell(const McConfig& cfg, std::uint64_t master_seed, std::uint64_t trials);

// Wilson 95% score interval (z = 1.96) for a binomial proportion.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n);

// Deterministic seed-stream derivation (splitmix64 chain).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace geoshield::tgs::mc
