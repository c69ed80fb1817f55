#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoshield/tgs/rational.hpp"

namespace geoshield::tgs {

// Governance parameters. With s_max fixed at 1:
//   s_pen = s_max / beta            (beta in-time messages buy one drop)
//   s_awd = s_pen * (1 - p_norm) / (alpha * p_norm)
// so the penalty/award ratio is alpha * p_norm / (1 - p_norm). Smaller alpha
// rewards faster recovery; beta bounds the tolerated consecutive misses.
struct TgsParams {
    Rational alpha = Rational::of(1, 5);
    std::int64_t beta = 3;
    Rational p_norm = Rational::of(999, 1000);

    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        if (!(alpha > Rational::of(0) && alpha <= Rational::of(1)))
            errs.push_back("alpha must lie in (0, 1]");
        if (beta < 1) errs.push_back("beta must be a positive integer");
        if (!(p_norm > Rational::of(0) && p_norm < Rational::of(1)))
            errs.push_back("p_norm must lie in (0, 1)");
        return errs;
    }

    Rational s_pen() const { return Rational::of(1, beta); }
    Rational s_awd() const {
        return s_pen() * (Rational::of(1) - p_norm) / (alpha * p_norm);
    }
    // Expected per-message score increment for a pair that behaves normally
    // with probability exactly p_norm.
    Rational expected_increment() const {
        return s_awd() * p_norm - s_pen() * (Rational::of(1) - p_norm);
    }
    // Long-term in-time fraction below which a node is eventually flagged:
    // p' = alpha * p_norm / (1 + (alpha - 1) * p_norm).
    Rational long_term_fraction() const {
        return alpha * p_norm / (Rational::of(1) + (alpha - Rational::of(1)) * p_norm);
    }
    // Short-term window: within any window of w = beta + k + k * alpha *
    // p_norm / (1 - p_norm) consecutive messages, beta + k suspicious
    // behaviors force a flag.
    Rational window(std::int64_t k) const {
        return Rational::of(beta + k) +
               Rational::of(k) * alpha * p_norm / (Rational::of(1) - p_norm);
    }
};

// Exact fixed-point score arithmetic: every reachable score is an integer
// multiple of 1/D with D = lcm(den(s_pen), den(s_awd)), so the flag predicate
// score <= 0 is exact (no epsilon at the boundary).
class ScoreDomain {
  public:
    explicit ScoreDomain(const TgsParams& p) {
        Rational pen = p.s_pen(), awd = p.s_awd();
        std::int64_t d = std::lcm(pen.den, awd.den);
        __int128 a = static_cast<__int128>(awd.num) * (d / awd.den);
        __int128 pe = static_cast<__int128>(pen.num) * (d / pen.den);
        if (a > INT64_MAX || pe > INT64_MAX) throw std::overflow_error("ScoreDomain overflow");
        den_ = d;
        award_ = static_cast<std::int64_t>(a);
        penalty_ = static_cast<std::int64_t>(pe);
    }

    std::int64_t init() const { return den_; }  // s_init = s_max = 1
    std::int64_t cap() const { return den_; }
    std::int64_t award_step() const { return award_; }
    std::int64_t penalty_step() const { return penalty_; }
    std::int64_t denominator() const { return den_; }

    std::int64_t apply_award(std::int64_t s) const {
        s += award_;
        return s > den_ ? den_ : s;
    }
    std::int64_t apply_penalty(std::int64_t s) const { return s - penalty_; }
    static bool flagged(std::int64_t s) { return s <= 0; }

    double to_real(std::int64_t s) const {
        return static_cast<double>(s) / static_cast<double>(den_);
    }

  private:
    std::int64_t den_;
    std::int64_t award_;
    std::int64_t penalty_;
};

}  // namespace geoshield::tgs
