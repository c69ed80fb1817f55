#include <doctest.h>

#include <set>
#include <sstream>

#include "geoshield/meas_dispute/dispute.hpp"
#include "geoshield/protosim/world.hpp"
#include "geoshield/recovery/recovery.hpp"
#include "geoshield/tgs/ledger.hpp"

using namespace geoshield;
using core::Duration;
using core::SimTime;
using protosim::ScenarioSpec;
using protosim::World;

namespace {

simnet::InterLinkParams desk_link() {
    simnet::InterLinkParams link;
    link.base_start = Duration::millis(75);
    link.base_min = Duration::millis(60);
    link.base_max = Duration::millis(90);
    return link;
}

// Two 3-node regions (f = 1 each), all-pairs measurement, one proof-carrying
// stream from region 0 to region 1.
ScenarioSpec desk_spec(std::uint64_t seed) {
    ScenarioSpec s;
    s.seed = seed;
    s.t_end = SimTime::seconds(20);
    s.regions.push_back({3, 1, {}});
    s.regions.push_back({3, 1, {}});
    protosim::add_all_pairs_directions(s, desk_link());
    protosim::StreamSpec st;
    st.task = 1;
    st.src = 0;
    st.dst = 1;
    s.streams.push_back(st);
    return s;
}

std::string serialize(const protosim::Results& r) {
    std::ostringstream os;
    os << measure::round_summary_csv(r.rounds);
    os << poc::verdict_csv(r.verdicts);
    os << tgs::tgs_event_csv(r.tgs_rows);
    os << recovery::recovery_audit_csv(r.recovery_rows);
    for (const auto& line : r.dispute_lines) os << line << '\n';
    for (const auto& row : r.safe_mode)
        os << core::format_seconds(row.t) << ' ' << row.dir.src.v << ">" << row.dir.dst.v << ' '
           << row.cause << '\n';
    for (const auto& e : r.app_events) {
        os << core::format_seconds(e.t_local) << ' ' << e.consumer.v << ' ' << e.task.v << ':'
           << e.job.v << ' ' << (e.validated ? 'v' : 'o') << (e.corrected ? 'c' : '-') << ' ';
        for (auto b : e.bytes) os << std::hex << int(b) << std::dec;
        os << '\n';
    }
    std::uint64_t intra = 0, inter = 0;
    for (const auto& b : r.bytes) {
        intra += b.intra_sent;
        inter += b.inter_sent;
    }
    os << "bytes " << intra << ' ' << inter << " msgs " << r.messages << '\n';
    for (const auto& [n, sc] : r.final_scores) os << n << '=' << sc << ' ';
    os << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("honest run: every round decides a value and all bounds hold") {
    ScenarioSpec s = desk_spec(42);
    World w(s);
    auto r = w.run();

    const core::TimingParams tp;
    // 19 rounds (1..19) in 20 s, two directions.
    std::size_t decided = 0;
    for (const auto& t : r.theorems) {
        if (!t.decided) continue;
        ++decided;
        CHECK_FALSE(t.timeout);
        CHECK_FALSE(t.disputed);
        CHECK(t.any_send);
        CHECK(t.any_delivery);
        // No valid heartbeat before the structural early bound.
        CHECK(t.earliest_valid_send.ns >= (t.t_n - tp.t_early()).ns);
        // The decided latency tracks the best true delay within clock skew
        // plus the accept allowance.
        Duration lo = t.min_true_delay - tp.delta_syn + tp.delta_inter;
        Duration hi = t.min_true_delay + tp.delta_syn + tp.delta_inter;
        CHECK(t.d_n.ns >= lo.ns);
        CHECK(t.d_n.ns <= hi.ns);
        // Sanity: within the configured link envelope.
        CHECK(t.d_n.ns >= Duration::millis(60).ns);
        CHECK(t.d_n.ns <= Duration::millis(95).ns);
    }
    CHECK(decided == 2 * 19);
    CHECK(r.rounds.size() == 2 * 19);
    for (const auto& row : r.rounds) {
        CHECK(row.decision.kind == measure::Decision::Kind::kValue);
        CHECK(row.heartbeats == 2);
        CHECK(row.accepts == 2);
        CHECK(row.proposals >= 2);
    }
    CHECK(r.decision_agreement);
    CHECK(r.safe_mode.empty());
    CHECK(r.dispute_lines.empty());
    CHECK(r.recovery_rows.empty());
    CHECK(r.rps.empty());

    // Proof-validated stream: every copy correct, nothing flagged, jobs
    // used optimistically exactly once per consumer.
    CHECK_FALSE(r.verdicts.empty());
    for (const auto& v : r.verdicts) CHECK(v.verdict == poc::Verdict::kCorrect);
    std::size_t optimistic = 0;
    for (const auto& e : r.app_events)
        if (!e.validated) ++optimistic;
    // 2 consumers x 19 jobs.
    CHECK(optimistic == 2 * 19);
    for (const auto& [n, f] : r.flag_counts) CHECK(f == 0);

    // Traffic flowed on both tiers.
    std::uint64_t intra = 0, inter = 0;
    for (const auto& b : r.bytes) {
        intra += b.intra_sent;
        inter += b.inter_sent;
    }
    CHECK(intra > 0);
    CHECK(inter > 0);
}

TEST_CASE("determinism: identical seeds give byte-identical results") {
    auto r1 = World(desk_spec(7)).run();
    auto r2 = World(desk_spec(7)).run();
    CHECK(serialize(r1) == serialize(r2));
    auto r3 = World(desk_spec(8)).run();
    CHECK(serialize(r1) != serialize(r3));
}

TEST_CASE("early heartbeats are clamped to the structural bound") {
    ScenarioSpec s = desk_spec(5);
    s.zero_clock_offsets = true;
    adversary::AttackSpec atk;
    atk.kind = adversary::AttackKind::kEarlyHeartbeat;
    atk.hb_skew = Duration::millis(-100);
    s.corrupt.push_back({0, atk});  // tx measurer of direction 0 -> 1
    auto r = World(s).run();

    const core::TimingParams tp;
    bool clamp_engaged = false;
    for (const auto& t : r.theorems) {
        if (!t.decided) continue;
        CHECK(t.earliest_valid_send.ns >= (t.t_n - tp.t_early()).ns);
        CHECK_FALSE(t.timeout);
        if (t.dir.src.v == 0 && t.earliest_valid_send < t.t_n - Duration::micros(400))
            clamp_engaged = true;
    }
    // The attacker really did send earlier than an honest node would (the
    // readiness clamp, not the skew request, is what bounded it).
    CHECK(clamp_engaged);
    CHECK(r.decision_agreement);
}

TEST_CASE("late heartbeats within the acceptance window still decide") {
    ScenarioSpec s = desk_spec(6);
    adversary::AttackSpec atk;
    atk.kind = adversary::AttackKind::kLateHeartbeat;
    atk.hb_skew = Duration::millis(50);
    s.corrupt.push_back({0, atk});
    auto r = World(s).run();
    for (const auto& row : r.rounds) {
        CHECK(row.decision.kind == measure::Decision::Kind::kValue);
        if (row.dir.src.v == 0) {
            // Both heartbeats still arrive before the cutoff; the honest
            // one now always carries the smaller latency.
            CHECK(row.heartbeats == 2);
        }
    }
    CHECK(r.decision_agreement);
}

TEST_CASE("total connectivity outage latches safe mode at the accept deadline") {
    ScenarioSpec s = desk_spec(11);
    s.zero_clock_offsets = true;
    s.outages.push_back({SimTime::seconds(10), SimTime::seconds(1000)});
    auto r = World(s).run();

    // Round 10 sends at t = 10.0 and is lost; measurers reach the accept
    // instant with nothing and latch safe mode, one latch per direction.
    REQUIRE(r.safe_mode.size() == 2);
    for (const auto& row : r.safe_mode) {
        CHECK(row.t.ns == SimTime::millis(10200).ns);
        CHECK(row.round == 10);
        CHECK(row.cause == "heartbeat-timeout");
    }
    for (const auto& t : r.theorems) {
        if (!t.decided) continue;
        if (t.round < 10) {
            CHECK_FALSE(t.timeout);
        } else {
            CHECK(t.timeout);
        }
    }
    CHECK(r.decision_agreement);
}

TEST_CASE("an equivocating accept is exposed by the dispute and the node replaced") {
    ScenarioSpec s;
    s.seed = 13;
    s.t_end = SimTime::seconds(12);
    s.regions.push_back({4, 1, {}});
    s.regions.push_back({4, 1, {}});
    protosim::add_all_pairs_directions(s, desk_link());
    // Node 4 is the first receiver-side measurer of direction 0 -> 1: it
    // reports honest accepts to even-id peers and +5 ms to odd-id peers.
    protosim::CorruptSpec c;
    c.node = 4;
    c.attack.kind = adversary::AttackKind::kEquivocateAccept;
    c.attack.accept_delta_ns = Duration::millis(5).ns;
    s.corrupt.push_back(c);
    auto r = World(s).run();

    // The dispute fires, resolves every affected round to a value inside the
    // honest envelope, and the run never loses agreement.
    CHECK(r.decision_agreement);
    CHECK_FALSE(r.dispute_lines.empty());
    bool any_disputed = false;
    std::uint64_t last_disputed = 0;
    for (const auto& t : r.theorems) {
        CHECK(t.decided);
        CHECK_FALSE(t.timeout);
        if (t.disputed) {
            any_disputed = true;
            last_disputed = std::max(last_disputed, t.round);
            CHECK(t.dir.src.v == 0);
            CHECK(t.d_n.ns >= Duration::millis(60).ns);
            CHECK(t.d_n.ns <= Duration::millis(95).ns);
        }
    }
    CHECK(any_disputed);

    // The equivocator is attributed (commission), excluded, and the later
    // rounds run clean with its replacement.
    bool attributed = false;
    for (const auto& row : r.recovery_rows) {
        CHECK(row.suspect.v == 4);
        if (row.reason == "accept-equivocation") attributed = true;
    }
    CHECK(attributed);
    REQUIRE(!r.rps.empty());
    for (const auto& [rp, sum] : r.rps) {
        CHECK(sum.suspect.v == 4);
        CHECK(sum.applied_at.size() == 8);  // every node applied the notice
    }
    // Once replaced, disputes stop well before the end of the run.
    CHECK(last_disputed + 4 < 11);
    for (const auto& row : r.safe_mode) CHECK(row.cause != "dispute-timeout");
}

TEST_CASE("a substituted task output is proven incorrect and corrected downstream") {
    ScenarioSpec s = desk_spec(17);
    s.t_end = SimTime::seconds(10);
    // Node 2 is an upstream replica of the proof-carrying stream: it ships
    // doctored bytes but countersigns the honest proof (stealth variant).
    protosim::CorruptSpec c;
    c.node = 2;
    c.attack.kind = adversary::AttackKind::kIncorrectOutput;
    c.attack.output_bytes = {0xde, 0xad, 0xbe, 0xef};
    s.corrupt.push_back(c);
    auto r = World(s).run();

    // Verdicts: the attacker's copies are proven incorrect, the honest
    // replica's correct; once recovery swaps the attacker out (after the
    // first settled job), later jobs carry no incorrect verdicts at all.
    bool saw_incorrect = false;
    std::uint64_t last_bad_job = 0;
    for (const auto& v : r.verdicts) {
        if (v.sender.v == 2) {
            CHECK(v.verdict == poc::Verdict::kIncorrect);
            CHECK_FALSE(v.in_use);
            saw_incorrect = true;
            last_bad_job = std::max(last_bad_job, v.job.v);
        } else if (v.sender.v != 0xffffffffu) {
            CHECK(v.verdict == poc::Verdict::kCorrect);
        }
    }
    CHECK(saw_incorrect);
    CHECK(last_bad_job <= 1);  // detection lands before job 2 runs

    // Whenever a consumer optimistically used the doctored bytes first, the
    // settle replaced them with the proven value.
    bool corrected = false;
    for (const auto& e : r.app_events) {
        if (e.corrected) {
            corrected = true;
            CHECK(e.validated);
            CHECK(e.bytes != std::vector<std::uint8_t>{0xde, 0xad, 0xbe, 0xef});
        }
        if (!e.validated) continue;
        CHECK(e.bytes != std::vector<std::uint8_t>{0xde, 0xad, 0xbe, 0xef});
    }
    CHECK(corrected);

    // Attribution: a commission fault against node 2, applied everywhere.
    bool commission = false;
    for (const auto& row : r.recovery_rows) {
        CHECK(row.suspect.v == 2);
        if (row.kind == recovery::FaultKind::kCommission &&
            row.reason == "output-without-proof")
            commission = true;
    }
    CHECK(commission);
    for (const auto& [rp, sum] : r.rps) CHECK(sum.suspect.v == 2);
    CHECK(!r.rps.empty());

    // Measurement itself is untouched.
    for (const auto& t : r.theorems) {
        CHECK(t.decided);
        CHECK_FALSE(t.timeout);
        CHECK_FALSE(t.disputed);
    }
    CHECK(r.safe_mode.empty());
    CHECK(r.decision_agreement);
}

TEST_CASE("withheld countersignatures force a proofless settle and a retried job") {
    ScenarioSpec s = desk_spec(19);
    s.t_end = SimTime::seconds(10);
    // Node 2 is an upstream replica: it transmits honest bytes but never
    // countersigns, so no proof can form for jobs it serves.
    protosim::CorruptSpec c;
    c.node = 2;
    c.attack.kind = adversary::AttackKind::kWithholdCountersign;
    s.corrupt.push_back(c);
    auto r = World(s).run();

    // The missing proof share is an unconditional intra-region deadline, so
    // the co-replica attributes the omission; exactly this node, nobody else.
    bool omission = false;
    for (const auto& row : r.recovery_rows) {
        CHECK(row.suspect.v == 2);
        if (row.kind == recovery::FaultKind::kOmission && row.reason == "poc-partial-missing")
            omission = true;
    }
    CHECK(omission);
    REQUIRE(!r.rps.empty());
    for (const auto& [rp, sum] : r.rps) CHECK(sum.suspect.v == 2);

    // Job 0 settles proofless first (no proof existed: the settle discards
    // the inputs but accuses no sender), then the retry succeeds: the same
    // job later carries correct verdicts from the replacement replicas.
    bool job0_proofless = false, job0_correct = false;
    for (const auto& v : r.verdicts) {
        if (v.job.v != 0) {
            if (v.sender.v != 0xffffffffu) CHECK(v.verdict == poc::Verdict::kCorrect);
            continue;
        }
        if (v.verdict == poc::Verdict::kIncorrect) job0_proofless = true;
        if (v.verdict == poc::Verdict::kCorrect) job0_correct = true;
    }
    CHECK(job0_proofless);
    CHECK(job0_correct);

    // No commission fault was ever filed: proofless settles accuse nobody.
    for (const auto& row : r.recovery_rows)
        CHECK(row.kind == recovery::FaultKind::kOmission);

    // The retried proof re-validates the very bytes already in use, so the
    // consumers end with validated events and no correction of substance is
    // lost; measurement and safe mode stay clean.
    bool validated_job0 = false;
    for (const auto& e : r.app_events)
        if (e.job.v == 0 && e.validated) validated_job0 = true;
    CHECK(validated_job0);
    for (const auto& t : r.theorems) {
        CHECK(t.decided);
        CHECK_FALSE(t.timeout);
    }
    CHECK(r.safe_mode.empty());
    CHECK(r.decision_agreement);
}

TEST_CASE("recovery notices reach every node within the propagation bound") {
    // Three regions, deliberately sparse measurement graph: the detecting
    // region's only outbound direction is 1 -> 0, so region 2 can only learn
    // of a fault through the forwarded (hop 1) copy — both propagation legs
    // are exercised. A degraded network (loss overlay on for the whole run)
    // must not break the bound.
    ScenarioSpec s;
    s.seed = 23;
    s.t_end = SimTime::seconds(12);
    s.zero_clock_offsets = true;
    for (int i = 0; i < 3; ++i) s.regions.push_back({3, 1, {}});
    for (auto [a, b] : {std::pair<int, int>{0, 1}, {1, 0}, {0, 2}}) {
        protosim::DirectionSpec d;
        d.src = static_cast<std::uint32_t>(a);
        d.dst = static_cast<std::uint32_t>(b);
        d.link = desk_link();
        s.directions.push_back(d);
    }
    protosim::StreamSpec st;
    st.task = 1;
    st.src = 0;
    st.dst = 1;
    s.streams.push_back(st);
    s.dos.enabled = true;
    s.dos.start = SimTime::zero();
    s.dos.end = s.t_end;
    s.dos.p_norm_under_attack = 0.99;
    protosim::CorruptSpec c;
    c.node = 2;  // upstream replica; consumers in region 1 detect the fault
    c.attack.kind = adversary::AttackKind::kIncorrectOutput;
    c.attack.output_bytes = {0x66};
    s.corrupt.push_back(c);
    auto r = World(s).run();

    REQUIRE(!r.rps.empty());
    const Duration bound = recovery::btr_deadline(s.timing, s.recovery);
    for (const auto& [rp, sum] : r.rps) {
        CHECK(sum.suspect.v == 2);
        CHECK(sum.applied_at.size() == 9);  // full coverage, all three regions
        for (const auto& [node, t_apply] : sum.applied_at) {
            CHECK((t_apply - sum.t_first_detect).ns <= bound.ns);
        }
    }
    // Region 2 saw only forwarded copies.
    bool hop1_in_region2 = false;
    for (const auto& row : r.recovery_rows) {
        if (row.observer.v >= 6) {
            CHECK(row.hop == 1);
            hop1_in_region2 = true;
        }
    }
    CHECK(hop1_in_region2);
    CHECK(r.decision_agreement);
}

TEST_CASE("an aggressive dropper is flagged by the score ledger and rotated out") {
    ScenarioSpec s = desk_spec(29);
    s.t_end = SimTime::seconds(12);
    // Node 0 sends heartbeats for direction 0 -> 1 and receives for 1 -> 0:
    // aggressive means it drops every inter-region send and claims every
    // arrival suspicious, with no self-preservation.
    protosim::CorruptSpec c;
    c.node = 0;
    c.attack.kind = adversary::AttackKind::kAggressive;
    s.corrupt.push_back(c);
    auto r = World(s).run();

    // Rounds survive on the honest co-sender's heartbeat throughout.
    for (const auto& t : r.theorems) {
        CHECK(t.decided);
        CHECK_FALSE(t.timeout);
    }
    CHECK(r.safe_mode.empty());
    CHECK(r.decision_agreement);

    // The ledger flags the dropper and governance replaces it.
    CHECK(r.flag_counts.count(0));
    CHECK(r.flag_counts.at(0) >= 1);
    bool flagged = false, reassigned = false;
    SimTime t_flag = SimTime::zero();
    for (const auto& row : r.tgs_rows) {
        if (row.kind == tgs::TgsEventRow::Kind::kFlag && row.node.v == 0) {
            flagged = true;
            t_flag = row.t;
        }
        if (row.kind == tgs::TgsEventRow::Kind::kReassign && row.counterpart.v == 0)
            reassigned = true;
    }
    CHECK(flagged);
    CHECK(reassigned);
    CHECK(t_flag.ns < SimTime::seconds(4).ns);  // caught within a few rounds

    // Honest nodes keep healthy scores; false claims cost the honest
    // senders a step but never their role.
    for (const auto& [node, score] : r.final_scores) {
        if (node == 0) continue;
        CHECK(score > 0.0);
    }
    for (const auto& [node, flags] : r.flag_counts) {
        if (node != 0) CHECK(flags == 0);
    }
}

TEST_CASE("a lying receiver is outvoted by the logged proposals and attributed") {
    ScenarioSpec s;
    s.seed = 31;
    s.t_end = SimTime::seconds(12);
    s.regions.push_back({3, 1, {}});
    s.regions.push_back({4, 1, {}});
    protosim::add_all_pairs_directions(s, desk_link());
    // Node 3 is a receiver-side measurer for 0 -> 1. It shaves 10 ms off
    // every measured latency: enough that its doctored proposal fails the
    // reasonableness bound at honest peers and is never logged.
    protosim::CorruptSpec c;
    c.node = 3;
    c.attack.kind = adversary::AttackKind::kLyingReceiver;
    c.attack.d_shrink = Duration::millis(10);
    s.corrupt.push_back(c);
    auto r = World(s).run();

    CHECK(r.decision_agreement);
    CHECK_FALSE(r.dispute_lines.empty());
    bool any_disputed = false;
    for (const auto& t : r.theorems) {
        CHECK(t.decided);
        CHECK_FALSE(t.timeout);
        if (!t.disputed) continue;
        any_disputed = true;
        CHECK(t.dir.src.v == 0);
        // Resolution lands on the honest candidate, inside the envelope.
        CHECK(t.d_n.ns >= Duration::millis(60).ns);
        CHECK(t.d_n.ns <= Duration::millis(95).ns);
    }
    CHECK(any_disputed);

    // The lie is unsupported by any quorum-attested proposal.
    bool unsupported = false;
    for (const auto& row : r.recovery_rows) {
        CHECK(row.suspect.v == 3);
        if (row.reason == "accept-unsupported") unsupported = true;
    }
    CHECK(unsupported);
    for (const auto& [rp, sum] : r.rps) CHECK(sum.suspect.v == 3);
    CHECK(!r.rps.empty());
}
