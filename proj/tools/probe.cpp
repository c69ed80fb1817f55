// Scratch diagnostic — not part of the build.
#include <cstdio>

#include "geoshield/protosim/scenario.hpp"
#include "geoshield/simnet/network.hpp"
#include "geoshield/protosim/world.hpp"

using namespace geoshield;
using protosim::ScenarioSpec;
using protosim::World;

static simnet::InterLinkParams desk_link() {
    simnet::InterLinkParams link;
    link.base_start = core::Duration::millis(75);
    link.base_min = core::Duration::millis(60);
    link.base_max = core::Duration::millis(90);
    return link;
}

int main(int argc, char** argv) {
    ScenarioSpec s;
    s.seed = 17;
    s.t_end = core::SimTime::seconds(10);
    s.regions.push_back({3, 1, {}});
    s.regions.push_back({3, 1, {}});
    protosim::add_all_pairs_directions(s, desk_link());
    protosim::StreamSpec st;
    st.task = 1;
    st.src = 0;
    st.dst = 1;
    s.streams.push_back(st);
    protosim::CorruptSpec c;
    c.node = 2;
    c.attack.kind = adversary::AttackKind::kIncorrectOutput;
    c.attack.output_bytes = {0xde, 0xad, 0xbe, 0xef};
    s.corrupt.push_back(c);
    if (argc > 1 && argv[1][0] == 'a') {
        s.seed = 29;
        s.t_end = core::SimTime::seconds(12);
        s.corrupt[0].node = 0;
        s.corrupt[0].attack.kind = adversary::AttackKind::kAggressive;
        s.corrupt[0].attack.output_bytes.clear();
    }
    if (argc > 1 && argv[1][0] == 'w') {
        s.seed = 19;
        s.corrupt[0].attack.kind = adversary::AttackKind::kWithholdCountersign;
        s.corrupt[0].attack.output_bytes.clear();
    }

    auto r = World(s).run();
    std::printf("== recovery rows ==\n");
    for (const auto& row : r.recovery_rows)
        std::printf("t=%.4f obs=%u rp=%llx suspect=%u kind=%d reason=%s hop=%u\n",
                    row.t_apply.ns / 1e9, row.observer.v, (unsigned long long)row.rp_id,
                    row.suspect.v, (int)row.kind, row.reason.c_str(), row.hop);
    std::printf("== verdicts ==\n");
    for (const auto& v : r.verdicts)
        std::printf("t=%.4f job=%llu obs=%u sender=%u verdict=%d in_use=%d\n", v.t.ns / 1e9,
                    (unsigned long long)v.job.v, v.observer.v, v.sender.v, (int)v.verdict,
                    (int)v.in_use);
    std::printf("== app events ==\n");
    for (const auto& e : r.app_events) {
        std::printf("t=%.4f consumer=%u job=%llu v=%d c=%d bytes=", e.t_local.ns / 1e9,
                    e.consumer.v, (unsigned long long)e.job.v, (int)e.validated,
                    (int)e.corrected);
        for (auto b : e.bytes) std::printf("%02x", b);
        std::printf("\n");
    }
    std::printf("== safe mode ==\n");
    for (const auto& row : r.safe_mode)
        std::printf("t=%.4f dir=%u>%u cause=%s\n", row.t.ns / 1e9, row.dir.src.v, row.dir.dst.v,
                    row.cause.c_str());
    std::printf("== tgs ==\n");
    for (const auto& e : r.tgs_rows)
        std::printf("t=%.4f kind=%d node=%u counterpart=%u score=%lld\n", e.t.ns / 1e9,
                    (int)e.kind, e.node.v, e.counterpart.v, (long long)e.score_after);
    return 0;
}
