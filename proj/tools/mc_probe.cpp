// Scratch diagnostic — not part of the build.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "geoshield/tgs/mc.hpp"

using namespace geoshield;
using namespace geoshield::tgs::mc;

static tgs::TgsParams params(long an, long ad, long beta, long pn, long pd) {
    tgs::TgsParams p;
    p.alpha = tgs::Rational::of(an, ad);
    p.beta = beta;
    p.p_norm = tgs::Rational::of(pn, pd);
    return p;
}

int main(int argc, char** argv) {
    std::string mode = argc > 1 ? argv[1] : "base";
    std::uint64_t trials = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 400;
    auto t0 = std::chrono::steady_clock::now();

    if (mode == "base") {
        struct Case { const char* name; long f; double pa; };
        Case cases[] = {{"f1 p.999", 1, 0.999}, {"f1 p.99", 1, 0.99}, {"f2 p.99", 2, 0.99}};
        for (auto& c : cases) {
            McConfig cfg;
            cfg.f = c.f;
            cfg.p_actual = c.pa;
            cfg.tgs_enabled = false;
            cfg.attack = Attack::kAggressive;
            CellStats s = run_cell(cfg, 42, trials);
            std::printf("%-10s p=%.4f  [%.4f, %.4f]  (%llu/%llu)\n", c.name, s.p_hat,
                        s.wilson_lo, s.wilson_hi, (unsigned long long)s.stayed,
                        (unsigned long long)s.trials);
        }
    } else if (mode == "grid") {
        long alphas[][2] = {{1, 100}, {1, 20}, {1, 10}, {1, 5}, {1, 1}};
        long betas[] = {1, 3, 5, 10, 50};
        for (int atk = 1; atk <= 2; ++atk) {
            std::printf("attack=%s\n", attack_name(Attack(atk)));
            std::printf("%8s", "a\\b");
            for (long b : betas) std::printf("%8ld", b);
            std::printf("\n");
            for (auto& a : alphas) {
                std::printf("%5ld/%-2ld", a[0], a[1]);
                for (long b : betas) {
                    McConfig cfg;
                    cfg.f = 1;
                    cfg.tgs = params(a[0], a[1], b, 999, 1000);
                    cfg.p_actual = 0.999;
                    cfg.attack = Attack(atk);
                    CellStats s = run_cell(cfg, 42, trials);
                    if (!s.applicable)
                        std::printf("%8s", "N/A");
                    else
                        std::printf("%8.3f", s.p_hat);
                    std::fflush(stdout);
                }
                std::printf("\n");
            }
        }
    } else if (mode == "dos") {
        std::uint64_t stay = 0, tot = 0;
        for (long f : {1L, 2L}) {
            for (int atk = 0; atk <= 2; ++atk) {
                McConfig cfg;
                cfg.f = f;
                cfg.tgs = params(1, 100, 5, 999, 1000);
                cfg.p_actual = 0.99;  // degraded vs configured
                cfg.attack = Attack(atk);
                CellStats s = run_cell(cfg, 42, trials);
                std::printf("f=%ld %-10s p=%.4f\n", f, attack_name(Attack(atk)), s.p_hat);
                stay += s.stayed;
                tot += s.trials;
            }
        }
        auto [lo, hi] = wilson_interval(stay, tot);
        std::printf("pooled %.4f  [%.4f, %.4f]\n", double(stay) / double(tot), lo, hi);
    } else if (mode == "one") {
        // single-trial trace-ish diagnostics
        McConfig cfg;
        cfg.f = 1;
        cfg.tgs = params(1, 1, 1, 999, 1000);
        cfg.attack = Attack::kAggressive;
        for (int i = 0; i < 10; ++i) {
            TrialResult r = run_trial(cfg, 1000 + i);
            std::printf("trial %d: stayed=%d fail@%llu attflags=%llu honflags=%llu swaps=%llu drops=%llu startin=%d\n",
                        i, (int)r.stayed_normal, (unsigned long long)r.fail_inv,
                        (unsigned long long)r.attacker_flags, (unsigned long long)r.honest_flags,
                        (unsigned long long)r.swaps, (unsigned long long)r.attacker_drops,
                        (int)r.attacker_started_in);
        }
    }
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("elapsed %.2fs\n", dt);
    return 0;
}
