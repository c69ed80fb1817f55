#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "geoshield/core/ids.hpp"
#include "geoshield/core/time.hpp"
#include "geoshield/simnet/event_queue.hpp"
#include "geoshield/simnet/rng.hpp"
#include "geoshield/simnet/trace.hpp"

namespace geoshield::simnet {

using core::Duration;
using core::NodeId;
using core::RegionId;
using core::SimTime;

// Synchronous intra-region links: latency uniform in [d - spread, d], no loss.
struct IntraLinkParams {
    Duration d = Duration::millis(2);
    Duration spread = Duration::micros(500);
};

// Inter-region links: drifting base latency plus per-message jitter, plus
// three loss processes (per-copy, per-sender-window burst, per-receiver-window
// burst). Jitter width is derived from the probabilistic synchrony target so
// that two messages sent close together differ in delay by less than
// delta_inter with probability at least p_norm (with margin).
struct InterLinkParams {
    Duration base_start = Duration::millis(30);
    Duration base_min = Duration::millis(20);
    Duration base_max = Duration::millis(45);
    Duration walk_step_max = Duration::micros(100);
    Duration walk_window = Duration::seconds(60);
    double p_norm_actual = 0.999;
    Duration delta_inter = Duration::millis(1);
    double jitter_margin = 0.7;   // consume only this share of the 1-p_norm allowance
    double tail_prob = 5e-5;      // rare extra delay (violates the jitter bound)
    Duration tail_extra_max = Duration::millis(20);
    double drop_copy = 0.0;
    double drop_sender_window = 0.0;   // whole multicast of a sender lost
    double drop_recv_window = 0.0;     // whole reception of a receiver lost
    Duration burst_window = Duration::seconds(1);

    // Uniform jitter width implied by p_norm_actual and the margin.
    Duration jitter_width() const;
};

// Degrades effective probabilistic synchrony on every inter-region link while
// active (a volumetric attack floods the WAN paths; honest traffic still
// flows, but jitter grows).
struct DosOverlay {
    bool enabled = false;
    SimTime start;
    SimTime end;
    double p_norm_under_attack = 0.99;
};

struct NodeByteCounters {
    std::uint64_t intra_sent = 0;
    std::uint64_t intra_recv = 0;
    std::uint64_t inter_sent = 0;
    std::uint64_t inter_recv = 0;
};

// Two-tier network fabric. Delivery latency, loss and clock translation for
// every message; all randomness is counter-based and keyed by message
// sequence, so outcomes do not depend on event processing order.
class Network {
  public:
    using DeliverFn = std::function<void(SimTime recv_time)>;

    Network(Simulator& sim, std::uint64_t seed) : sim_(sim), seed_(seed) {}

    RegionId add_region(IntraLinkParams intra = {});
    NodeId add_node(RegionId region);
    void set_inter_link(RegionId from, RegionId to, InterLinkParams params);
    void set_dos(DosOverlay dos) { dos_ = dos; }

    RegionId region_of(NodeId n) const { return RegionId{node_region_.at(n.v)}; }
    const std::vector<NodeId>& nodes_in(RegionId r) const { return region_nodes_.at(r.v); }
    std::size_t node_count() const { return node_region_.size(); }

    // Clock offsets are fixed per run; |offset_i - offset_j| must stay within
    // the configured synchronization bound (the scenario builder enforces it).
    void set_clock_offset(NodeId n, Duration off) { clock_off_.at(n.v) = off; }
    Duration clock_offset(NodeId n) const { return clock_off_.at(n.v); }
    SimTime local_now(NodeId n) const { return sim_.now() + clock_off_.at(n.v); }
    SimTime true_of_local(NodeId n, SimTime local) const { return local - clock_off_.at(n.v); }
    // Schedules fn at the instant node n's clock shows `local`.
    void at_local(NodeId n, SimTime local, Simulator::Fn fn) {
        sim_.at(true_of_local(n, local), std::move(fn));
    }

    // Sends one message; deliver runs at the receive instant unless the
    // message is lost. Returns the trace sequence number.
    std::uint64_t send(NodeId src, NodeId dst, std::uint32_t wire_bytes, std::uint16_t kind,
                       DeliverFn deliver);

    // Current base latency of the inter-region link (advances the walk).
    Duration inter_base(RegionId from, RegionId to, SimTime t);
    // One-way delay bound the scenario was configured around (base_max + jitter).
    Duration inter_delay_max(RegionId from, RegionId to) const;

    void enable_trace(bool on) { trace_on_ = on; }
    const std::vector<TraceRecord>& trace() const { return trace_; }
    const std::vector<NodeByteCounters>& byte_counters() const { return bytes_; }
    std::uint64_t messages_sent() const { return next_seq_; }

  private:
    struct InterLink {
        InterLinkParams p;
        Duration base;             // walk state at walk_idx
        std::int64_t walk_idx = 0; // windows advanced so far
        bool used = false;
    };

    InterLink& inter_link(RegionId from, RegionId to);
    const InterLink* inter_link_if(RegionId from, RegionId to) const;
    double effective_p_norm(const InterLink& l, SimTime t) const;

    Simulator& sim_;
    std::uint64_t seed_;
    std::vector<IntraLinkParams> region_intra_;
    std::vector<std::vector<NodeId>> region_nodes_;
    std::vector<std::uint32_t> node_region_;
    std::vector<Duration> clock_off_;
    std::vector<NodeByteCounters> bytes_;
    // Dense (from, to) matrix of inter-region links, sized lazily.
    std::vector<InterLink> inter_;
    std::size_t inter_dim_ = 0;
    DosOverlay dos_;
    std::uint64_t next_seq_ = 0;
    bool trace_on_ = false;
    std::vector<TraceRecord> trace_;
};

}  // namespace geoshield::simnet
