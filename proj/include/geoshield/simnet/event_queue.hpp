#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "geoshield/core/time.hpp"

namespace geoshield::simnet {

// Deterministic discrete-event executor. Events run in (time, insertion seq)
// order; two events at the same instant run in the order they were scheduled,
// so a run is a pure function of (seed, scenario).
class Simulator {
  public:
    using Fn = std::function<void()>;

    core::SimTime now() const { return now_; }
    std::uint64_t events_executed() const { return executed_; }

    void at(core::SimTime t, Fn fn) {
        if (t < now_) throw std::logic_error("Simulator::at: scheduling into the past");
        queue_.push(Ev{t, seq_++, std::move(fn)});
    }

    void after(core::Duration d, Fn fn) { at(now_ + d, std::move(fn)); }

    // Runs events with time <= t_end, then advances the clock to t_end.
    void run_until(core::SimTime t_end) {
        while (!queue_.empty() && queue_.top().t <= t_end && !stopped_) {
            step();
        }
        if (!stopped_ && t_end > now_) now_ = t_end;
    }

    // Runs until the queue drains (or stop()).
    void run_all() {
        while (!queue_.empty() && !stopped_) step();
    }

    void stop() { stopped_ = true; }
    bool stopped() const { return stopped_; }

  private:
    struct Ev {
        core::SimTime t;
        std::uint64_t seq;
        Fn fn;
    };
    struct Later {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    void step() {
        // Copy out before pop: the callback may schedule more events.
        Ev ev = std::move(const_cast<Ev&>(queue_.top()));
        queue_.pop();
        now_ = ev.t;
        ++executed_;
        ev.fn();
    }

    std::priority_queue<Ev, std::vector<Ev>, Later> queue_;
    core::SimTime now_;
    std::uint64_t seq_ = 0;
    std::uint64_t executed_ = 0;
    bool stopped_ = false;
};

}  // namespace geoshield::simnet
