#include "doctest.h"

#include <vector>

#include "geoshield/simnet/event_queue.hpp"
#include "geoshield/simnet/network.hpp"
#include "geoshield/simnet/rng.hpp"

using namespace geoshield::simnet;
using geoshield::core::Duration;
using geoshield::core::NodeId;
using geoshield::core::RegionId;
using geoshield::core::SimTime;

TEST_CASE("events run in (time, insertion) order") {
    Simulator sim;
    std::vector<int> order;
    sim.at(SimTime::millis(5), [&] { order.push_back(2); });
    sim.at(SimTime::millis(1), [&] { order.push_back(1); });
    sim.at(SimTime::millis(5), [&] { order.push_back(3); });  // same instant: later seq
    sim.at(SimTime::millis(1), [&] {
        sim.after(Duration::millis(4), [&] { order.push_back(4); });  // also t=5, newest
    });
    sim.run_all();
    CHECK(order == std::vector<int>{1, 2, 3, 4});
    CHECK(sim.now() == SimTime::millis(5));
    CHECK_THROWS(sim.at(SimTime::millis(1), [] {}));
}

TEST_CASE("run_until advances the clock and stops at the bound") {
    Simulator sim;
    int hits = 0;
    sim.at(SimTime::seconds(1), [&] { hits++; });
    sim.at(SimTime::seconds(3), [&] { hits++; });
    sim.run_until(SimTime::seconds(2));
    CHECK(hits == 1);
    CHECK(sim.now() == SimTime::seconds(2));
    sim.run_until(SimTime::seconds(5));
    CHECK(hits == 2);
}

namespace {

struct TwoRegions {
    Simulator sim;
    Network net;
    RegionId r0, r1;
    NodeId a0, a1, b0;

    explicit TwoRegions(std::uint64_t seed, InterLinkParams inter = {}) : net(sim, seed) {
        r0 = net.add_region(IntraLinkParams{Duration::millis(2), Duration::micros(500)});
        r1 = net.add_region(IntraLinkParams{Duration::millis(2), Duration::micros(500)});
        a0 = net.add_node(r0);
        a1 = net.add_node(r0);
        b0 = net.add_node(r1);
        net.set_inter_link(r0, r1, inter);
        net.set_inter_link(r1, r0, inter);
    }
};

}  // namespace

TEST_CASE("intra-region latency stays within [d - spread, d] with zero loss") {
    TwoRegions env(7);
    int delivered = 0;
    Duration lo = Duration::millis(2) - Duration::micros(500);
    for (int i = 0; i < 2000; i++) {
        env.sim.at(SimTime::millis(i), [&, i] {
            SimTime sent = env.sim.now();
            env.net.send(env.a0, env.a1, 100, 1, [&, sent](SimTime recv) {
                Duration lat = recv - sent;
                CHECK(lat >= lo);
                CHECK(lat <= Duration::millis(2));
                delivered++;
            });
        });
    }
    env.sim.run_all();
    CHECK(delivered == 2000);
}

TEST_CASE("inter-region delay respects base bounds plus jitter and can drop") {
    InterLinkParams ip;
    ip.base_start = Duration::millis(30);
    ip.base_min = Duration::millis(20);
    ip.base_max = Duration::millis(45);
    ip.drop_copy = 0.05;
    ip.tail_prob = 0.0;
    TwoRegions env(11, ip);
    int delivered = 0, sent = 0;
    Duration max_delay = ip.base_max + ip.jitter_width();
    for (int i = 0; i < 4000; i++) {
        env.sim.at(SimTime::millis(10 * i), [&] {
            sent++;
            SimTime s = env.sim.now();
            env.net.send(env.a0, env.b0, 100, 2, [&, s](SimTime recv) {
                Duration lat = recv - s;
                CHECK(lat >= ip.base_min);
                CHECK(lat <= max_delay);
                delivered++;
            });
        });
    }
    env.sim.run_all();
    CHECK(delivered < sent);
    CHECK(delivered > sent * 0.9);
}

TEST_CASE("probabilistic synchrony: paired sends conform to delta_inter at p_norm") {
    // Messages sent within eps_t should differ in delay by < delta_inter with
    // probability at least p_norm. Empirical check over 10^5 pairs spread
    // across hours of drifting base latency.
    InterLinkParams ip;
    ip.p_norm_actual = 0.999;
    ip.delta_inter = Duration::millis(1);
    ip.walk_step_max = Duration::micros(100);
    ip.walk_window = Duration::seconds(60);
    TwoRegions env(131, ip);

    const int kPairs = 100000;
    int conforming = 0, both = 0;
    std::vector<SimTime> recv(2);
    for (int i = 0; i < kPairs; i++) {
        // eps_t = 500 us between the two sends of a pair.
        SimTime t0 = SimTime::millis(100 * static_cast<std::int64_t>(i));
        env.sim.at(t0, [&] {
            SimTime s = env.sim.now();
            env.net.send(env.a0, env.b0, 64, 3, [&, s](SimTime r) { recv[0] = r, recv[0].ns -= s.ns; });
        });
        env.sim.at(t0 + Duration::micros(500), [&] {
            SimTime s = env.sim.now();
            env.net.send(env.a0, env.b0, 64, 3, [&, s](SimTime r) { recv[1] = r, recv[1].ns -= s.ns; });
        });
        env.sim.at(t0 + Duration::seconds(1), [&] {
            if (recv[0].ns > 0 && recv[1].ns > 0) {
                both++;
                std::int64_t diff = recv[0].ns - recv[1].ns;
                if (diff < 0) diff = -diff;
                if (diff < ip.delta_inter.ns) conforming++;
            }
            recv[0] = recv[1] = SimTime::zero();
        });
    }
    env.sim.run_all();
    REQUIRE(both > kPairs * 0.99);
    double frac = double(conforming) / double(both);
    CHECK(frac >= 0.999);
}

TEST_CASE("identical seeds give byte-identical traces; different seeds differ") {
    auto run = [](std::uint64_t seed) {
        InterLinkParams ip;
        ip.drop_copy = 0.01;
        TwoRegions env(seed, ip);
        env.net.enable_trace(true);
        for (int i = 0; i < 500; i++) {
            env.sim.at(SimTime::millis(i), [&] {
                env.net.send(env.a0, env.b0, 64, 1, [](SimTime) {});
                env.net.send(env.a0, env.a1, 32, 2, [](SimTime) {});
            });
        }
        env.sim.run_all();
        return trace_to_csv(env.net.trace());
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43));
}

TEST_CASE("clock translation round-trips") {
    TwoRegions env(3);
    env.net.set_clock_offset(env.a0, Duration::micros(40));
    env.sim.run_until(SimTime::seconds(10));
    CHECK(env.net.local_now(env.a0) == SimTime::seconds(10) + Duration::micros(40));
    SimTime local = SimTime::seconds(12);
    CHECK(env.net.true_of_local(env.a0, local) + Duration::micros(40) == local);
    bool ran = false;
    env.net.at_local(env.a0, SimTime::seconds(11), [&] {
        ran = true;
        CHECK(env.net.local_now(env.a0) == SimTime::seconds(11));
    });
    env.sim.run_all();
    CHECK(ran);
}

TEST_CASE("DoS overlay degrades conformance while active") {
    InterLinkParams ip;
    ip.p_norm_actual = 0.999;
    ip.base_min = ip.base_max = ip.base_start;  // pin the base: latency - base = jitter
    TwoRegions env(17, ip);
    DosOverlay dos;
    dos.enabled = true;
    dos.start = SimTime::seconds(0);
    dos.end = SimTime::seconds(1 << 30);
    dos.p_norm_under_attack = 0.99;
    env.net.set_dos(dos);

    // Under attack the jitter width must widen to the 0.99 profile.
    InterLinkParams wide = ip;
    wide.p_norm_actual = 0.99;
    Duration w_dos = wide.jitter_width();
    int beyond_normal_width = 0;
    Duration normal_width = ip.jitter_width();
    int n = 3000, delivered = 0;
    for (int i = 0; i < n; i++) {
        env.sim.at(SimTime::millis(20 * i), [&] {
            SimTime s = env.sim.now();
            env.net.send(env.a0, env.b0, 64, 1, [&, s](SimTime r) {
                delivered++;
                Duration lat = r - s;
                CHECK(lat <= ip.base_max + w_dos);
                if (lat > ip.base_max + normal_width) beyond_normal_width++;
            });
        });
    }
    env.sim.run_all();
    CHECK(delivered == n);
    CHECK(beyond_normal_width > 0);  // jitter actually widened
}

TEST_CASE("sequential and keyed rng are deterministic") {
    Rng r1(9), r2(9);
    for (int i = 0; i < 100; i++) CHECK(r1.next_u64() == r2.next_u64());
    CHECK(keyed_u64(1, 2, 3, 4) == keyed_u64(1, 2, 3, 4));
    CHECK(keyed_u64(1, 2, 3, 4) != keyed_u64(1, 2, 3, 5));

    // geometric_skip(p) has mean 1/p; loose sanity band.
    Rng r3(1234);
    double acc = 0;
    const int kN = 20000;
    for (int i = 0; i < kN; i++) acc += double(r3.geometric_skip(0.01));
    CHECK(acc / kN > 80.0);
    CHECK(acc / kN < 120.0);
}
