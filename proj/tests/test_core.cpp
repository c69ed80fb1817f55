#include "doctest.h"

#include "geoshield/core/crypto.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/core/time.hpp"

using namespace geoshield::core;

TEST_CASE("round schedule instants") {
    TimingParams p;
    p.t_0 = SimTime::zero();
    p.T_int = Duration::seconds(1);
    p.d_intra = Duration::millis(2);
    p.t_hb = Duration::millis(1);
    p.hb_timeout = Duration::millis(200);
    p.t_prop = Duration::millis(2);
    REQUIRE(p.validate().empty());

    RoundSchedule s5 = round_schedule(p, 5);
    CHECK(s5.t_send.ns == 5'000'000'000);
    CHECK(s5.t_sig.ns == 4'997'000'000);
    CHECK(s5.t_accept.ns == 5'200'000'000);
    // Cutoffs sit one propagation + processing away from the accept instant.
    CHECK(s5.t_hb_cutoff.ns == 5'196'000'000);
    CHECK(s5.t_decide.ns == 5'204'000'000);

    RoundSchedule s35 = round_schedule(p, 35);
    CHECK(s35.t_accept.ns == 35'200'000'000);

    CHECK(p.t_early() == p.delta_syn + p.delta_intra + p.delta_hb);
}

TEST_CASE("round lookup helpers") {
    TimingParams p;
    p.t_0 = SimTime::zero();
    p.T_int = Duration::seconds(1);
    p.d_intra = Duration::millis(2);
    p.t_hb = Duration::millis(1);

    CHECK(first_round_send_at_or_after(p, SimTime::zero()) == 0);
    CHECK(first_round_send_at_or_after(p, SimTime::nanos(1)) == 1);
    CHECK(first_round_send_at_or_after(p, SimTime::seconds(4)) == 4);
    CHECK(first_round_send_at_or_after(p, SimTime::seconds(4) + Duration::nanos(1)) == 5);

    // Signature instants sit d_intra + t_hb = 3 ms before the send instant.
    // Smallest n with t_sig(n) >= 3.15 s is 4 (t_sig(4) = 3.997 s).
    CHECK(first_round_sig_at_or_after(p, SimTime::millis(3150)) == 4);
    CHECK(first_round_sig_at_or_after(p, SimTime::millis(2997)) == 3);
    CHECK(first_round_sig_at_or_after(p, SimTime::millis(2997) + Duration::nanos(1)) == 4);
}

TEST_CASE("timing validation rejects inconsistent parameters") {
    TimingParams p;
    CHECK(p.validate().empty());
    p.delta_intra = p.d_intra + Duration::nanos(1);
    CHECK(!p.validate().empty());
    p = TimingParams{};
    p.hb_timeout = p.t_prop + p.d_intra;  // no room for the proposal cutoff
    CHECK(!p.validate().empty());
    p = TimingParams{};
    p.T_int = Duration::millis(100);  // hb_timeout no longer fits
    CHECK(!p.validate().empty());
}

TEST_CASE("signatures verify only for the signing node and exact payload") {
    KeyStore ks(0x5eedu);
    Signer a = ks.issue(NodeId{1});
    Signer b = ks.issue(NodeId{2});

    ByteWriter w;
    w.u64(42);
    w.str("round payload");
    Signature sig = a.sign(w);
    CHECK(ks.verify(w, sig));

    // Claiming another signer fails.
    Signature forged = sig;
    forged.signer = NodeId{2};
    CHECK(!ks.verify(w, forged));

    // Same payload signed by b yields a different mac.
    CHECK(b.sign(w).mac != sig.mac);

    // Any payload tamper invalidates.
    ByteWriter w2;
    w2.u64(42);
    w2.str("round payloaD");
    CHECK(!ks.verify(w2, sig));

    // Deterministic: a re-issued signer produces the identical signature.
    CHECK(ks.issue(NodeId{1}).sign(w).mac == sig.mac);
}

TEST_CASE("hash128 separates payloads and domains") {
    ByteWriter w1, w2;
    w1.str("abc");
    w2.str("abd");
    CHECK(hash128(w1) != hash128(w2));
    CHECK(hash128(w1, 1) != hash128(w1, 2));
    CHECK(hash128(w1) == hash128(w1));
}

TEST_CASE("fixed-width second formatting") {
    CHECK(format_seconds(SimTime::seconds(5)) == "5.000000000");
    CHECK(format_seconds(SimTime::nanos(1)) == "0.000000001");
    CHECK(format_seconds(SimTime::millis(36080)) == "36.080000000");
    CHECK(format_seconds(Duration::nanos(-1500000000)) == "-1.500000000");
}
