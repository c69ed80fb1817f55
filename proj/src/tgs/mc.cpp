#include "geoshield/tgs/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace geoshield::tgs::mc {

const char* attack_name(Attack a) {
    switch (a) {
        case Attack::kNone: return "none";
        case Attack::kAggressive: return "aggressive";
        case Attack::kAdaptive: return "adaptive";
    }
    return "?";
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n) {
    if (n == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = p + z2 / (2.0 * nn);
    const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, (centre - spread) / denom),
            std::min(1.0, (centre + spread) / denom)};
}

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max() / 2;

// Invocation indices at which a per-invocation Bernoulli(p) fires. Gaps are
// geometric, so a stream skips any quiet stretch in O(1) while the marginal
// law of every invocation stays exactly Bernoulli(p).
class EventStream {
  public:
    EventStream() = default;
    EventStream(double p, std::mt19937_64& rng) : p_(p) { next_ = gap(rng); }
    std::uint64_t next() const { return next_; }
    void advance_past(std::uint64_t inv, std::mt19937_64& rng) { next_ = inv + 1 + gap(rng); }

  private:
    std::uint64_t gap(std::mt19937_64& rng) {
        if (p_ <= 0.0) return kNever;
        std::geometric_distribution<std::uint64_t> g(p_);
        return g(rng);
    }
    double p_ = 0.0;
    std::uint64_t next_ = kNever;
};

double binom_pmf(int n, int k, double q) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c * std::pow(q, k) * std::pow(1.0 - q, n - k);
}

struct Trial {
    const McConfig& cfg;
    std::mt19937_64 rng;
    ScoreDomain dom;
    int n;                       // region size 2f+1
    int m;                       // consumers (and replica slots) f+1
    double q_jit;                // per-message late-beyond-bound probability
    double p_jit_any;            // 1 - (1-q_jit)^m
    std::vector<bool> is_replica;
    std::vector<std::int64_t> score;
    std::vector<std::uint64_t> flags;
    std::vector<EventStream> loss;    // per node, live while it holds a slot
    std::vector<EventStream> jitter;  // per node, governance runs only
    EventStream burst;
    int attacker = -1;
    TrialResult res;

    Trial(const McConfig& c, std::uint64_t seed)
        : cfg(c), rng(seed), dom(c.tgs), n(static_cast<int>(2 * c.f + 1)),
          m(static_cast<int>(c.f + 1)) {
        q_jit = 1.0 - cfg.p_actual;
        p_jit_any = 1.0 - std::pow(cfg.p_actual, m);
        is_replica.assign(n, false);
        score.assign(n, dom.init());
        flags.assign(n, 0);
        loss.resize(n);
        jitter.resize(n);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int s = 0; s < m; ++s) is_replica[order[s]] = true;
        if (cfg.attacker_present && cfg.attack != Attack::kNone)
            attacker = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
        for (int i = 0; i < n; ++i)
            if (is_replica[i]) seat(i);
        burst = EventStream(cfg.loss_burst, rng);
        res.attacker_started_in = attacker >= 0 && is_replica[attacker];
    }

    void seat(int node) {
        loss[node] = EventStream(cfg.loss_indep, rng);
        if (cfg.tgs_enabled) jitter[node] = EventStream(p_jit_any, rng);
    }

    bool bern(double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
    }

    // Number of late messages in a delivered salvo, given at least one.
    int jitter_count_conditional() {
        const double z = p_jit_any;
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * z;
        double acc = 0.0;
        for (int k = 1; k < m; ++k) {
            acc += binom_pmf(m, k, q_jit);
            if (u <= acc) return k;
        }
        return m;
    }

    std::int64_t pen_step() const { return dom.penalty_step(); }
    std::int64_t awd_step() const { return dom.award_step(); }

    // True while the aggressive attacker occupies a slot (dense regime).
    bool aggressive_active() const {
        return cfg.attack == Attack::kAggressive && attacker >= 0 && is_replica[attacker];
    }

    // Adaptive restraint: drop only if the score stays strictly positive
    // after the f+1 penalties this salvo would cost.
    bool adaptive_can_drop(std::int64_t s) const {
        return s - static_cast<std::int64_t>(m) * pen_step() > 0;
    }

    // Next invocation (>= cur) at which the adaptive attacker can afford a
    // drop, given award accrual of m per invocation while it behaves.
    std::uint64_t adaptive_next_drop(std::uint64_t cur) const {
        if (cfg.attack != Attack::kAdaptive || attacker < 0 || !is_replica[attacker])
            return kNever;
        const std::int64_t need = static_cast<std::int64_t>(m) * pen_step() + 1;
        if (need > dom.cap()) return kNever;
        const std::int64_t s = score[attacker];
        if (s >= need) return cur;
        const std::int64_t gain = static_cast<std::int64_t>(m) * awd_step();
        if (gain <= 0) return kNever;
        const std::int64_t k = (need - s + gain - 1) / gain;
        return cur + static_cast<std::uint64_t>(k);
    }

    // Award catch-up for a fully-normal stretch of `d` invocations.
    void catch_up(int node, std::uint64_t d) {
        const std::int64_t gain = static_cast<std::int64_t>(m) * awd_step();
        const std::int64_t room = dom.cap() - score[node];
        if (room <= 0 || gain <= 0) return;
        const std::uint64_t steps = std::min<std::uint64_t>(
            d, static_cast<std::uint64_t>((room + gain - 1) / gain));
        score[node] = std::min<std::int64_t>(dom.cap(),
                                             score[node] + gain * static_cast<std::int64_t>(steps));
    }

    // Applies one salvo's claims for `node`; returns true if it got flagged.
    bool apply_claims(int node, int sus) {
        bool flagged = false;
        for (int j = 0; j < sus; ++j) {
            score[node] = dom.apply_penalty(score[node]);
            if (ScoreDomain::flagged(score[node])) {
                ++flags[node];
                if (node == attacker)
                    ++res.attacker_flags;
                else
                    ++res.honest_flags;
                score[node] = dom.init();
                flagged = true;
            }
        }
        for (int j = sus; j < m; ++j) score[node] = dom.apply_award(score[node]);
        return flagged;
    }

    // Swap every flagged slot holder for the least-flagged spare. Returns
    // false when a handoff misses the live deadline (invocation lost).
    bool process_swaps(const std::vector<int>& flagged_nodes) {
        for (int node : flagged_nodes) {
            if (!is_replica[node]) continue;
            int best = -1;
            for (int s = 0; s < n; ++s) {
                if (is_replica[s]) continue;
                if (best < 0 || flags[s] < flags[best]) best = s;
            }
            if (best < 0) continue;  // no spare: the slot holder stays
            is_replica[node] = false;
            is_replica[best] = true;
            seat(best);
            ++res.swaps;
            if (bern(cfg.handoff_miss)) return false;
        }
        return true;
    }

    // One salvo (initial or retry) at invocation `inv`. `fresh` marks the
    // retry: statuses are drawn directly instead of from the streams.
    // Returns delivered-copy count, or -1 when a swap handoff failed.
    int salvo(std::uint64_t inv, bool fresh) {
        const bool burst_hit = fresh ? bern(cfg.loss_burst) : burst.next() == inv;
        int delivered = 0;
        std::vector<int> flagged_nodes;
        for (int node = 0; node < n; ++node) {
            if (!is_replica[node]) continue;
            bool missing;
            if (node == attacker && attack_drops(node)) {
                missing = true;
                ++res.attacker_drops;
            } else if (burst_hit) {
                missing = true;
            } else if (fresh ? bern(cfg.loss_indep) : loss[node].next() == inv) {
                missing = true;
            } else {
                missing = false;
            }
            int sus = 0;
            if (missing) {
                sus = m;
            } else {
                ++delivered;
                if (cfg.tgs_enabled) {
                    if (fresh) {
                        for (int j = 0; j < m; ++j)
                            if (bern(q_jit)) ++sus;
                    } else if (jitter[node].next() == inv) {
                        sus = jitter_count_conditional();
                    }
                }
            }
            if (cfg.tgs_enabled && apply_claims(node, sus)) flagged_nodes.push_back(node);
        }
        if (!fresh) {
            // advance every stream that reached this invocation (including
            // draws invalidated by a loss/drop on the same salvo)
            if (burst.next() <= inv) burst.advance_past(inv, rng);
            for (int node = 0; node < n; ++node) {
                if (!is_replica[node]) continue;
                if (loss[node].next() <= inv) loss[node].advance_past(inv, rng);
                if (cfg.tgs_enabled && jitter[node].next() <= inv)
                    jitter[node].advance_past(inv, rng);
            }
        }
        if (cfg.tgs_enabled && !flagged_nodes.empty() && !process_swaps(flagged_nodes))
            return -1;
        return delivered;
    }

    bool attack_drops(int node) {
        if (node != attacker) return false;
        switch (cfg.attack) {
            case Attack::kNone: return false;
            case Attack::kAggressive: return true;
            case Attack::kAdaptive: return adaptive_can_drop(score[node]);
        }
        return false;
    }

    void fail(std::uint64_t inv) {
        res.stayed_normal = false;
        res.fail_inv = inv;
    }

    void run() {
        const std::uint64_t N = cfg.invocations;
        std::uint64_t cur = 0;
        while (cur < N) {
            std::uint64_t e = N;
            e = std::min(e, burst.next());
            for (int node = 0; node < n; ++node) {
                if (!is_replica[node]) continue;
                e = std::min(e, loss[node].next());
                if (cfg.tgs_enabled) e = std::min(e, jitter[node].next());
            }
            if (cfg.tgs_enabled && aggressive_active()) {
                e = cur;  // every invocation is a claim event until the flag
            } else if (cfg.tgs_enabled && cfg.attack == Attack::kAdaptive) {
                e = std::min(e, adaptive_next_drop(cur));
            }
            if (e >= N) break;
            if (cfg.tgs_enabled && e > cur) {
                for (int node = 0; node < n; ++node)
                    if (is_replica[node]) catch_up(node, e - cur);
            }
            cur = e;
            const int delivered = salvo(cur, false);
            if (delivered < 0) {  // handoff missed the deadline
                fail(cur);
                return;
            }
            if (delivered == 0) {
                if (!cfg.tgs_enabled) {
                    // nothing watches the claim deadline: the wipe surfaces
                    // at the liveness deadline
                    fail(cur);
                    return;
                }
                const int redelivered = salvo(cur, true);
                if (redelivered <= 0) {
                    fail(cur);
                    return;
                }
            }
            ++cur;
        }
    }
};

}  // namespace

TrialResult run_trial(const McConfig& cfg, std::uint64_t seed) {
    Trial t(cfg, seed);
    t.run();
    return t.res;
}

CellStats run_cell(const McConfig& cfg, std::uint64_t master_seed, std::uint64_t trials) {
    CellStats cs;
    if (cfg.attack == Attack::kAdaptive && !adaptive_applicable(cfg.f, cfg.tgs.beta)) {
        cs.applicable = false;
        return cs;
    }
    std::uint64_t tag = mix_seed(master_seed, static_cast<std::uint64_t>(cfg.f));
    tag = mix_seed(tag, static_cast<std::uint64_t>(cfg.tgs.alpha.num) * 1000003ULL +
                            static_cast<std::uint64_t>(cfg.tgs.alpha.den));
    tag = mix_seed(tag, static_cast<std::uint64_t>(cfg.tgs.beta));
    tag = mix_seed(tag, static_cast<std::uint64_t>(cfg.p_actual * 1e9));
    tag = mix_seed(tag, static_cast<std::uint64_t>(cfg.attack) * 2654435761ULL +
                            (cfg.tgs_enabled ? 1 : 0));
    for (std::uint64_t i = 0; i < trials; ++i) {
        TrialResult r = run_trial(cfg, mix_seed(tag, i));
        ++cs.trials;
        if (r.stayed_normal) ++cs.stayed;
    }
    if (cs.trials > 0) {
        cs.p_hat = static_cast<double>(cs.stayed) / static_cast<double>(cs.trials);
        auto [lo, hi] = wilson_interval(cs.stayed, cs.trials);
        cs.wilson_lo = lo;
        cs.wilson_hi = hi;
    }
    return cs;
}

}  // namespace geoshield::tgs::mc
