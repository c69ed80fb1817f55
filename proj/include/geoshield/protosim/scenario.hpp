#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "geoshield/adversary/strategy.hpp"
#include "geoshield/core/params.hpp"
#include "geoshield/meas_dispute/dispute.hpp"
#include "geoshield/poc/poc.hpp"
#include "geoshield/recovery/recovery.hpp"
#include "geoshield/simnet/network.hpp"
#include "geoshield/tgs/score.hpp"

namespace geoshield::protosim {

struct RegionSpec {
    std::uint32_t n_nodes = 3;
    std::uint32_t f = 1;
    simnet::IntraLinkParams intra;
};

// One measured direction (heartbeats src -> dst) and the underlying link.
struct DirectionSpec {
    std::uint32_t src = 0;
    std::uint32_t dst = 1;
    simnet::InterLinkParams link;
};

// An application dataflow crossing regions. With `poc` set the stream is a
// replicated task whose outputs are proof-validated downstream; otherwise it
// is a plain monitored stream (timeliness governance only). fan_down = 0
// means all downstream replicas (f_dst + 1); 1 pins a single consumer.
struct StreamSpec {
    std::uint32_t task = 0;
    std::uint32_t src = 0;
    std::uint32_t dst = 1;
    core::Duration period = core::Duration::seconds(1);
    core::SimTime first = core::SimTime::seconds(1);
    std::uint32_t payload_bytes = 64;
    bool poc = true;
    std::uint32_t fan_up = 0;    // 0 => f_src + 1 upstream replicas
    std::uint32_t fan_down = 0;  // 0 => f_dst + 1 downstream consumers
    // Honest output bytes per job; the default derives canonical bytes from
    // (task, job). Case studies supply application content here.
    std::function<std::vector<std::uint8_t>(core::TaskId, core::JobId)> output_fn;
};

struct CorruptSpec {
    std::uint32_t node = 0;
    adversary::AttackSpec attack;
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    core::SimTime t_end = core::SimTime::seconds(60);
    core::TimingParams timing;
    poc::PocParams poc;
    meas_dispute::DisputeParams dispute;
    recovery::RecoveryParams recovery;
    tgs::TgsParams tgs;
    bool tgs_enabled = true;
    bool zero_clock_offsets = false;
    bool trace = false;
    std::vector<RegionSpec> regions;
    std::vector<DirectionSpec> directions;
    std::vector<StreamSpec> streams;
    simnet::DosOverlay dos;
    // Hard connectivity outages: inter-region sends inside any window are lost.
    std::vector<std::pair<core::SimTime, core::SimTime>> outages;
    std::vector<CorruptSpec> corrupt;
};

// All-pairs measurement helper: one direction per ordered region pair with
// the same link parameters.
void add_all_pairs_directions(ScenarioSpec& s, const simnet::InterLinkParams& link);

}  // namespace geoshield::protosim
