#include "doctest.h"

#include "geoshield/tgs/governance.hpp"
#include "geoshield/tgs/rational.hpp"
#include "geoshield/tgs/score.hpp"

using namespace geoshield::tgs;
using geoshield::core::NodeId;

TEST_CASE("rational parsing and arithmetic are exact") {
    CHECK(Rational::parse("0.2") == Rational::of(1, 5));
    CHECK(Rational::parse(".999") == Rational::of(999, 1000));
    CHECK(Rational::parse("3/7") == Rational::of(3, 7));
    CHECK(Rational::parse("-0.25") == Rational::of(-1, 4));
    CHECK(Rational::parse("1") == Rational::of(1));
    CHECK_THROWS(Rational::parse("1.2.3"));
    CHECK_THROWS(Rational::parse("1/0"));
    CHECK_THROWS(Rational::parse(""));

    Rational a = Rational::of(1, 3), b = Rational::of(1, 6);
    CHECK(a + b == Rational::of(1, 2));
    CHECK(a - b == b);
    CHECK(a * b == Rational::of(1, 18));
    CHECK(a / b == Rational::of(2));
    CHECK(Rational::of(7, 2).floor() == 3);
    CHECK(Rational::of(7, 2).ceil() == 4);
    CHECK(Rational::of(-7, 2).floor() == -4);
    CHECK(Rational::of(6, 2).ceil() == 3);
}

TEST_CASE("score parameters: alpha=0.2, beta=3, p_norm=0.999") {
    TgsParams p;
    p.alpha = Rational::parse("0.2");
    p.beta = 3;
    p.p_norm = Rational::parse("0.999");
    REQUIRE(p.validate().empty());

    CHECK(p.s_pen() == Rational::of(1, 3));
    CHECK(p.s_awd() == Rational::of(5, 2997));  // ~1.66833e-3
    CHECK(p.s_awd().to_double() == doctest::Approx(1.66833e-3).epsilon(1e-5));

    // Identity: penalty/award ratio equals alpha * p_norm / (1 - p_norm).
    CHECK(p.s_pen() / p.s_awd() == p.alpha * p.p_norm / (Rational::of(1) - p.p_norm));

    // Expected increment is s_awd * p_norm * (1 - alpha) > 0 for alpha < 1.
    CHECK(p.expected_increment() == p.s_awd() * p.p_norm * (Rational::of(1) - p.alpha));
    CHECK(p.expected_increment() > Rational::of(0));
}

TEST_CASE("exact flag boundary: beta consecutive penalties from full score") {
    TgsParams p;
    p.alpha = Rational::parse("0.2");
    p.beta = 3;
    p.p_norm = Rational::parse("0.999");
    ScoreDomain dom(p);

    std::int64_t s = dom.init();
    s = dom.apply_penalty(s);
    CHECK(!ScoreDomain::flagged(s));
    s = dom.apply_penalty(s);
    CHECK(!ScoreDomain::flagged(s));
    s = dom.apply_penalty(s);
    CHECK(ScoreDomain::flagged(s));  // exactly zero, no epsilon
    CHECK(s == 0);

    // Awards cap at s_max.
    std::int64_t t = dom.init();
    t = dom.apply_award(t);
    CHECK(t == dom.cap());
}

TEST_CASE("long-term fraction and short-term window formulas") {
    TgsParams p;
    p.alpha = Rational::parse("0.2");
    p.beta = 3;
    p.p_norm = Rational::parse("0.999");

    // p' = alpha p / (1 + (alpha-1) p) = 0.1998/0.2008
    CHECK(p.long_term_fraction() == Rational::of(1998, 2008));
    CHECK(p.long_term_fraction().to_double() == doctest::Approx(0.995020).epsilon(1e-5));

    // w(k=1) = beta + 1 + alpha p/(1-p) = 4 + 199.8
    CHECK(p.window(1) == Rational::of(10190, 50));
    CHECK(p.window(1).to_double() == doctest::Approx(203.8));
}

TEST_CASE("flag counter replacement selection") {
    std::vector<Candidate> cands = {
        {NodeId{3}, 2, true},
        {NodeId{1}, 0, false},  // no capacity: skipped even with 0 flags
        {NodeId{7}, 1, true},
        {NodeId{5}, 1, true},
    };
    auto pick = select_replacement(cands);
    REQUIRE(pick.has_value());
    CHECK(pick->v == 5);  // min flags, then min id

    std::vector<Candidate> none = {{NodeId{1}, 0, false}};
    CHECK(!select_replacement(none).has_value());
}
