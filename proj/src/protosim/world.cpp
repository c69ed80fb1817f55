#include "geoshield/protosim/world.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "geoshield/meas_dispute/dispute.hpp"
#include "geoshield/simnet/rng.hpp"
#include "geoshield/tgs/governance.hpp"

namespace geoshield::protosim {

namespace {

using measure::Accept;
using measure::Heartbeat;
using measure::Proposal;
using measure::ReceiverRound;
using measure::RoundContent;
using measure::SenderRound;
using measure::SigShare;
using meas_dispute::Declaration;
using meas_dispute::HolderLog;
using poc::PocFinal;
using poc::PocPartial;
using recovery::FaultKind;
using recovery::FaultRecord;
using recovery::RecoveryNotice;

// Wire-size model (header + fields rounded up + signatures).
constexpr std::uint32_t kHdr = static_cast<std::uint32_t>(core::kWireHeaderBytes);
constexpr std::uint32_t kSig = static_cast<std::uint32_t>(core::kWireSignatureBytes);
constexpr std::uint32_t kShareBytes = kHdr + 32 + kSig;
constexpr std::uint32_t kProposalBytes = kHdr + 32 + kSig;
constexpr std::uint32_t kAcceptBytes = kHdr + 32 + kSig;
constexpr std::uint32_t kClaimBytes = kHdr + 24 + kSig;
constexpr std::uint32_t kPartialBytes = kHdr + 28 + kSig;
constexpr std::uint32_t kRequestBytes = kHdr + 24 + kSig;
constexpr std::uint32_t kNoticeBytes = kHdr + 64 + kSig;

enum MsgKind : std::uint16_t {
    kKindShare = 1,
    kKindHeartbeat = 2,
    kKindHbForward = 3,
    kKindProposal = 4,
    kKindAccept = 5,
    kKindDeclaration = 6,
    kKindDeclForward = 7,
    kKindHolderLog = 8,
    kKindLogForward = 9,
    kKindPartial = 10,
    kKindStreamData = 11,
    kKindClaim = 12,
    kKindNewInput = 13,
    kKindNotice = 14,
};

// Everything a heartbeat carries besides the measurement content.
struct AttachBundle {
    std::vector<PocFinal> finals;
    std::vector<RecoveryNotice> notices;
    core::Hash128 digest;
    std::uint32_t bytes = 0;
};

AttachBundle make_bundle(std::vector<PocFinal> finals, std::vector<RecoveryNotice> notices,
                         std::size_t quorum) {
    std::sort(finals.begin(), finals.end(), [](const PocFinal& a, const PocFinal& b) {
        return std::tie(a.task.v, a.job.v, a.h_m) < std::tie(b.task.v, b.job.v, b.h_m);
    });
    std::sort(notices.begin(), notices.end(),
              [](const RecoveryNotice& a, const RecoveryNotice& b) { return a.rp_id < b.rp_id; });
    core::ByteWriter w;
    w.u64(finals.size());
    for (const PocFinal& f : finals) w.raw(f.tuple_payload().bytes());
    w.u64(notices.size());
    for (const RecoveryNotice& n : notices) {
        // Digest covers the notice content and window, not the detector
        // signature: independent detectors of one fault release canonical,
        // byte-identical notices that differ only in who signed them, and
        // co-signers must be able to hold either copy.
        w.raw(n.encode().bytes());
        w.u8(n.hop);
        w.i64(n.t_restamp.ns);
    }
    AttachBundle b;
    b.digest = core::hash128(w, /*domain=*/0xa77c);
    b.bytes = static_cast<std::uint32_t>(
        8 + finals.size() * (32 + quorum * kSig) + 8 + notices.size() * (64 + kSig));
    b.finals = std::move(finals);
    b.notices = std::move(notices);
    return b;
}

std::uint32_t hb_bytes(const Heartbeat& hb, const AttachBundle& bundle) {
    return kHdr + 32 + static_cast<std::uint32_t>(hb.sigs.size()) * kSig + kSig + bundle.bytes;
}

struct Key {
    std::size_t dir;
    std::uint64_t round;
    bool operator<(const Key& o) const { return std::tie(dir, round) < std::tie(o.dir, o.round); }
};

struct JobKey {
    std::uint32_t task;
    std::uint64_t job;
    auto operator<=>(const JobKey&) const = default;
};

// Per-node dispute instance state.
struct DisputeSt {
    bool open = false;
    meas_dispute::DisputeSchedule sched;
    std::vector<Declaration> decls;
    std::set<std::uint32_t> fwd_decl;  // declarers already forwarded
    std::vector<HolderLog> logs;
    std::set<std::uint32_t> fwd_log;  // holders already forwarded
    bool decided = false;
};

struct FinalDecision {
    measure::Decision::Kind kind = measure::Decision::Kind::kTimeout;
    std::int64_t d_ns = 0;
    bool set = false;
};

}  // namespace

struct World::Impl {
    explicit Impl(const ScenarioSpec& s)
        : spec(s), net(sim, s.seed), ks(s.seed ^ 0x6765736869656c64ull), bb(s.tgs), ledger(s.tgs) {}

    // --- configuration & fabric -------------------------------------------
    ScenarioSpec spec;
    simnet::Simulator sim;
    simnet::Network net;
    core::KeyStore ks;
    adversary::Blackboard bb;
    tgs::Ledger ledger;
    Results res;
    std::function<void(const AppEvent&)> app_hook;
    std::function<void(const SafeModeRow&)> safe_hook;

    struct NodeR {
        NodeId id;
        RegionId region;
        std::uint32_t region_idx = 0;
        std::optional<core::Signer> signer;
        std::unique_ptr<adversary::Strategy> strat;
        bool corrupt = false;
        recovery::RecoveryState rec;

        std::map<Key, SenderRound> tx;
        std::map<Key, SimTime> tx_ready_true;   // quorum completion (true time)
        std::map<Key, bool> tx_sent;
        std::map<Key, bool> tx_waiting;         // send attempted before quorum
        std::map<Key, SimTime> tx_desired_local;
        std::map<Key, AttachBundle> tx_bundle;
        std::map<Key, std::vector<SigShare>> pending_shares;

        std::map<Key, ReceiverRound> rx;
        std::map<Key, std::vector<Proposal>> plog;
        std::map<Key, bool> hb_forwarded;
        std::map<Key, std::optional<AttachBundle>> seen_bundle;
        std::map<Key, DisputeSt> disp;
        std::map<Key, FinalDecision> fin;

        std::map<JobKey, poc::PocAssembler> assemblers;
        std::map<JobKey, std::set<std::uint32_t>> partials_from;  // countersigners seen
        std::map<JobKey, PocFinal> finals;
        std::map<JobKey, poc::InputTracker> trackers;
        std::map<JobKey, std::map<core::Hash128, std::vector<std::uint8_t>>> bodies;
        std::map<std::uint64_t, std::vector<JobKey>> attach_queue;  // round -> finals to carry
        std::map<JobKey, std::uint64_t> attach_round_of;            // registered ride round
        std::set<JobKey> retry_requested;
        std::map<JobKey, SimTime> stream_arrival;  // monitor streams: first data arrival

        std::map<std::size_t, Duration> last_d;  // per direction: last decided value
    };
    std::vector<std::unique_ptr<NodeR>> nodes;

    struct Dir {
        DirectionId id;
        std::size_t idx = 0;
        std::vector<NodeId> tx_meas, rx_meas, keepers;
    };
    std::vector<Dir> dirs;

    struct Stream {
        StreamSpec s;
        TaskId task;
        RegionId src, dst;
        std::size_t dir_idx = 0;  // matching measurement direction
        std::vector<NodeId> up, down;
        std::uint64_t n_jobs = 0;
    };
    std::vector<Stream> streams;

    struct RoundCtl {
        std::vector<NodeId> tx, rx, keepers;
        std::size_t thm_idx = 0;
        bool dispute_open = false;
        bool summary_done = false;
        std::map<std::uint32_t, FinalDecision> final_dec;  // per node
    };
    std::map<Key, RoundCtl> rounds;

    std::set<std::pair<std::size_t, std::uint32_t>> safe_latched;  // (dir, region)
    std::set<std::uint64_t> world_applied_rp;
    std::set<std::uint32_t> excluded_nodes;
    std::uint64_t first_round = 1;
    std::uint64_t last_round = 0;

    // ---- helpers -----------------------------------------------------------

    NodeR& nr(NodeId n) { return *nodes.at(n.v); }
    const core::TimingParams& tp() const { return spec.timing; }

    SimTime local(NodeId n) const { return net.local_now(n); }

    void at_local_safe(NodeId n, SimTime t_local, std::function<void()> fn) {
        SimTime t_true = net.true_of_local(n, t_local);
        if (t_true < sim.now()) t_true = sim.now();
        sim.at(t_true, std::move(fn));
    }

    bool in_outage(SimTime t) const {
        for (const auto& [a, b] : spec.outages)
            if (t >= a && t < b) return true;
        return false;
    }

    // Inter-region send with adversary gate and outage windows.
    void send_inter(NodeId src, NodeId dst, std::uint32_t bytes, std::uint16_t kind,
                    std::function<void(SimTime)> deliver) {
        NodeR& s = nr(src);
        auto decision = s.strat->on_inter_send(src, dst, local(src));
        if (decision.drop) return;
        if (decision.extra_delay.ns > 0) {
            sim.at(sim.now() + decision.extra_delay, [this, src, dst, bytes, kind,
                                                      fn = std::move(deliver)]() mutable {
                if (in_outage(sim.now())) return;
                net.send(src, dst, bytes, kind, std::move(fn));
            });
            return;
        }
        if (in_outage(sim.now())) return;
        net.send(src, dst, bytes, kind, std::move(deliver));
    }

    void send_intra(NodeId src, NodeId dst, std::uint32_t bytes, std::uint16_t kind,
                    std::function<void(SimTime)> deliver) {
        net.send(src, dst, bytes, kind, std::move(deliver));
    }

    // ---- construction ------------------------------------------------------

    void build() {
        // Regions and nodes.
        for (std::size_t r = 0; r < spec.regions.size(); ++r) {
            const RegionSpec& rs = spec.regions[r];
            RegionId rid = net.add_region(rs.intra);
            (void)rid;
            for (std::uint32_t i = 0; i < rs.n_nodes; ++i) {
                NodeId id = net.add_node(RegionId{static_cast<std::uint32_t>(r)});
                auto nrp = std::make_unique<NodeR>();
                nrp->id = id;
                nrp->region = RegionId{static_cast<std::uint32_t>(r)};
                nrp->region_idx = static_cast<std::uint32_t>(r);
                nrp->signer.emplace(ks.issue(id));
                nrp->strat = adversary::make_strategy({}, &bb);
                nodes.push_back(std::move(nrp));
            }
        }
        // Clock offsets within the synchronization bound.
        if (!spec.zero_clock_offsets) {
            std::int64_t half = tp().delta_syn.ns / 2;
            for (auto& n : nodes) {
                std::uint64_t r = simnet::keyed_u64(spec.seed, 0xc10c, n->id.v);
                std::int64_t off =
                    static_cast<std::int64_t>(r % static_cast<std::uint64_t>(2 * half + 1)) - half;
                net.set_clock_offset(n->id, Duration{off});
            }
        }
        // Adversary assignment.
        for (const CorruptSpec& c : spec.corrupt) {
            NodeR& n = nr(NodeId{c.node});
            n.corrupt = true;
            n.strat = adversary::make_strategy(c.attack, &bb);
        }
        // Inter links + directions and initial measurement roles.
        for (std::size_t i = 0; i < spec.directions.size(); ++i) {
            const DirectionSpec& ds = spec.directions[i];
            net.set_inter_link(RegionId{ds.src}, RegionId{ds.dst}, ds.link);
            Dir d;
            d.id = DirectionId{RegionId{ds.src}, RegionId{ds.dst}};
            d.idx = i;
            const auto& src_nodes = net.nodes_in(RegionId{ds.src});
            const auto& dst_nodes = net.nodes_in(RegionId{ds.dst});
            std::uint32_t fs = spec.regions[ds.src].f, fd = spec.regions[ds.dst].f;
            for (std::uint32_t k = 0; k < fs + 1; ++k) d.tx_meas.push_back(src_nodes.at(k));
            for (std::uint32_t k = 0; k < fd + 1; ++k) d.rx_meas.push_back(dst_nodes.at(k));
            for (std::uint32_t k = 0; k < fd; ++k) d.keepers.push_back(dst_nodes.at(fd + 1 + k));
            dirs.push_back(std::move(d));
        }
        net.set_dos(spec.dos);
        net.enable_trace(spec.trace);
        // Streams: upstream replicas default to the tail of the region node
        // list (keeps them disjoint from measurers where the region allows).
        for (const StreamSpec& ss : spec.streams) {
            Stream st;
            st.s = ss;
            st.task = TaskId{ss.task};
            st.src = RegionId{ss.src};
            st.dst = RegionId{ss.dst};
            bool found = false;
            for (const Dir& d : dirs)
                if (d.id.src.v == ss.src && d.id.dst.v == ss.dst) {
                    st.dir_idx = d.idx;
                    found = true;
                }
            if (!found) throw std::logic_error("stream without matching measurement direction");
            const auto& up_nodes = net.nodes_in(st.src);
            const auto& down_nodes = net.nodes_in(st.dst);
            std::uint32_t fu = ss.fan_up ? ss.fan_up : spec.regions[ss.src].f + 1;
            std::uint32_t fd = ss.fan_down ? ss.fan_down : spec.regions[ss.dst].f + 1;
            // Replicas and consumers take the tail of the region node list,
            // keeping them disjoint from the measurer roles where capacity
            // allows.
            for (std::uint32_t k = 0; k < fu; ++k)
                st.up.push_back(up_nodes.at(up_nodes.size() - 1 - k));
            for (std::uint32_t k = 0; k < fd; ++k)
                st.down.push_back(down_nodes.at(down_nodes.size() - 1 - k));
            // Jobs with completion before the horizon.
            while (true) {
                SimTime t_m = st.s.first + st.s.period * static_cast<std::int64_t>(st.n_jobs);
                if (t_m >= spec.t_end) break;
                ++st.n_jobs;
            }
            streams.push_back(std::move(st));
        }
        for (auto& n : nodes) ledger.ensure(n->id);

        first_round = core::first_round_sig_at_or_after(tp(), SimTime::zero());
        last_round = first_round;
        while (core::round_send_time(tp(), last_round + 1) < spec.t_end) ++last_round;
    }

    std::vector<std::uint8_t> honest_output(const Stream& st, JobId job) const {
        if (st.s.output_fn) return st.s.output_fn(st.task, job);
        std::vector<std::uint8_t> out(st.s.payload_bytes ? st.s.payload_bytes : 8);
        core::ByteWriter w;
        w.u32(st.task.v);
        w.u64(job.v);
        core::Hash128 h = core::hash128(w, 0x07b);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<std::uint8_t>((i % 2 ? h.hi : h.lo) >> ((i % 8) * 8));
        return out;
    }

    SimTime job_completion(const Stream& st, std::uint64_t k) const {
        return st.s.first + st.s.period * static_cast<std::int64_t>(k);
    }

    std::uint64_t job_attach_round(const Stream& st, std::uint64_t k) const {
        return poc::poc_round_for(tp(), spec.poc, job_completion(st, k));
    }

    // Canonical retry ride round after a failed settlement at round n: late
    // enough that a request issued at the decide instant has crossed the WAN
    // and the replicas' fresh proof can make the signing window.
    std::uint64_t retry_round(std::size_t dir_idx, std::uint64_t n) const {
        const Dir& d = dirs.at(dir_idx);
        core::RoundSchedule sc = core::round_schedule(tp(), n);
        SimTime ready = sc.t_decide + net.inter_delay_max(d.id.dst, d.id.src) + tp().delta_syn +
                        tp().d_intra;
        return poc::poc_round_for(tp(), spec.poc, ready);
    }

    // ---- safe mode ---------------------------------------------------------

    void safe_latch(std::size_t dir_idx, RegionId region, std::uint64_t round, SimTime t_local,
                    const std::string& cause) {
        if (!safe_latched.insert({dir_idx, region.v}).second) return;
        SafeModeRow row{t_local, region, dirs[dir_idx].id, round, cause};
        res.safe_mode.push_back(row);
        if (safe_hook) safe_hook(row);
    }

    // ---- faults & recovery -------------------------------------------------

    // `t_anchor` is the nominal instant of the detection site — the same
    // value at every node that can detect this fault (a round's decide
    // instant, a proof-exchange deadline, ...). The release stamp derives
    // from it, so independent detectors of one fault release byte-identical
    // notices and every holder computes the same attachment window; bundle
    // digests of honest co-signers can never diverge over a notice.
    void detect_fault(NodeId detector, const FaultRecord& f, std::size_t dir_idx,
                      std::uint64_t round, SimTime t_anchor) {
        const Dir& d = dirs.at(dir_idx);
        std::uint64_t rp =
            recovery::notice_id(f.suspect, f.kind, f.reason, round, d.id.src.v, d.id.dst.v);
        if (!res.rps.count(rp)) {
            Results::RpSummary s;
            s.rp_id = rp;
            s.suspect = f.suspect;
            s.t_first_detect = sim.now();
            res.rps.emplace(rp, std::move(s));
        }
        NodeId det = detector;
        FaultRecord fr = f;
        SimTime stamp = t_anchor + spec.recovery.d_det;
        at_local_safe(det, stamp, [this, det, fr, rp, stamp] {
            NodeR& v = nr(det);
            RecoveryNotice n = recovery::make_notice(fr, v.region, rp, stamp, *v.signer);
            if (!v.rec.on_receive(n, local(det), recovery::RecoveryState::Carry::kAsIs)) return;
            res.recovery_rows.push_back({local(det), det, rp, fr.suspect, fr.kind, fr.reason, 0});
            apply_world_side_effects(n);
            // Hand the signed notice to the rest of the region right away:
            // every peer then attaches it over the identical window, so the
            // region's heartbeat bundles stay in lockstep.
            for (NodeId w : net.nodes_in(v.region)) {
                if (w == det) continue;
                RecoveryNotice copy = n;
                send_intra(det, w, kNoticeBytes, kKindNotice, [this, w, copy](SimTime) {
                    NodeR& p = nr(w);
                    if (p.rec.on_receive(copy, local(w), recovery::RecoveryState::Carry::kAsIs)) {
                        res.recovery_rows.push_back({local(w), w, copy.rp_id, copy.suspect,
                                                     copy.kind, copy.reason, copy.hop});
                        apply_world_side_effects(copy);
                    }
                });
            }
        });
    }

    void apply_world_side_effects(const RecoveryNotice& n) {
        if (!world_applied_rp.insert(n.rp_id).second) return;
        if (!excluded_nodes.insert(n.suspect.v).second) return;
        reassign_all_roles(n.suspect, /*record=*/true);
    }

    // Notice learned from a carried heartbeat bundle of round `carrier`.
    // Hop-0 copies travel one region further: the forward copy is restamped
    // to a grid instant every holder derives identically (all nodes of the
    // forwarding region first see a notice via the same carrier round, since
    // heartbeats are forwarded region-wide over the synchronous local net).
    void on_notice_received(NodeR& v, const RecoveryNotice& n, std::uint64_t carrier) {
        using Carry = recovery::RecoveryState::Carry;
        bool fresh = false;
        if (n.hop == 0) {
            SimTime restamp = core::round_send_time(spec.timing, carrier) + spec.timing.hb_timeout;
            fresh = v.rec.on_receive(n, local(v.id), Carry::kRestamp, restamp);
        } else {
            fresh = v.rec.on_receive(n, local(v.id), Carry::kNone);
        }
        if (fresh) {
            res.recovery_rows.push_back(
                {local(v.id), v.id, n.rp_id, n.suspect, n.kind, n.reason, n.hop});
            apply_world_side_effects(n);
        }
    }

    // ---- governance --------------------------------------------------------

    std::optional<NodeId> pick_replacement(RegionId region, const std::vector<NodeId>& taken,
                                           NodeId outgoing) {
        std::vector<tgs::Candidate> cands;
        for (NodeId cand : net.nodes_in(region)) {
            if (cand == outgoing) continue;
            bool in_role = std::find(taken.begin(), taken.end(), cand) != taken.end();
            bool ok = !in_role && !excluded_nodes.count(cand.v);
            cands.push_back({cand, ledger.flag_count(cand), ok});
        }
        return tgs::select_replacement(cands);
    }

    void replace_in(std::vector<NodeId>& role, RegionId region, NodeId out, SimTime t,
                    bool record) {
        auto it = std::find(role.begin(), role.end(), out);
        if (it == role.end()) return;
        auto repl = pick_replacement(region, role, out);
        if (!repl) {
            // Beyond the region's fault budget: a short-handed role beats a
            // known-bad member keeping it.
            role.erase(it);
            return;
        }
        *it = *repl;
        ledger.reset(*repl);
        bb.mirror().reset(*repl);
        if (record)
            res.tgs_rows.push_back({t, tgs::TgsEventRow::Kind::kReassign, *repl, out,
                                    ledger.score(*repl)});
    }

    void reassign_all_roles(NodeId out, bool record) {
        SimTime t = sim.now();
        RegionId region = nr(out).region;
        for (Dir& d : dirs) {
            if (d.id.src == region) replace_in(d.tx_meas, region, out, t, record);
            if (d.id.dst == region) {
                // Keep measurer/keeper sets disjoint when replacing.
                std::vector<NodeId> taken = d.rx_meas;
                taken.insert(taken.end(), d.keepers.begin(), d.keepers.end());
                auto fix = [&](std::vector<NodeId>& role, bool may_promote) {
                    auto it = std::find(role.begin(), role.end(), out);
                    if (it == role.end()) return;
                    auto repl = pick_replacement(region, taken, out);
                    if (!repl && may_promote) {
                        // No idle node left: promote a keeper and run with a
                        // shorter keeper bench; measurement quorums must not
                        // shrink while log holding degrades gracefully.
                        for (auto kit = d.keepers.begin(); kit != d.keepers.end(); ++kit) {
                            if (*kit == out) continue;
                            repl = *kit;
                            d.keepers.erase(kit);
                            break;
                        }
                    }
                    if (!repl) {
                        role.erase(it);  // beyond budget: drop the bad member
                        return;
                    }
                    *it = *repl;
                    taken.push_back(*repl);
                    ledger.reset(*repl);
                    bb.mirror().reset(*repl);
                    if (record)
                        res.tgs_rows.push_back({t, tgs::TgsEventRow::Kind::kReassign, *repl, out,
                                                ledger.score(*repl)});
                };
                fix(d.rx_meas, true);
                fix(d.keepers, false);
            }
        }
        for (Stream& st : streams) {
            if (st.src == region) replace_in(st.up, region, out, t, record);
            if (st.dst == region) replace_in(st.down, region, out, t, record);
        }
    }

    void ledger_event(tgs::ClaimKind kind, NodeId sender, NodeId receiver, SimTime t_true) {
        if (!spec.tgs_enabled) return;
        auto flagged = ledger.on_claim(kind, sender, receiver);
        bb.observe_claim(kind, sender, receiver);
        if (kind == tgs::ClaimKind::kSuspicious) {
            res.tgs_rows.push_back({t_true, tgs::TgsEventRow::Kind::kSuspicious, sender, receiver,
                                    ledger.score(sender)});
        }
        for (NodeId fnode : flagged) {
            res.tgs_rows.push_back(
                {t_true, tgs::TgsEventRow::Kind::kFlag, fnode, fnode, ledger.score(fnode)});
            reassign_all_roles(fnode, /*record=*/true);
        }
    }

    // ---- measurement rounds -------------------------------------------------

    void schedule_all_rounds() {
        for (const Dir& d : dirs) {
            for (std::uint64_t n = first_round; n <= last_round; ++n) {
                core::RoundSchedule sc = core::round_schedule(tp(), n);
                SimTime kickoff = sc.t_sig - tp().delta_syn;
                if (kickoff < SimTime::zero()) kickoff = SimTime::zero();
                std::size_t di = d.idx;
                sim.at(kickoff, [this, di, n] { round_kickoff(di, n); });
            }
        }
    }

    void round_kickoff(std::size_t di, std::uint64_t n) {
        Dir& d = dirs[di];
        Key key{di, n};
        RoundCtl& ctl = rounds[key];
        ctl.tx = d.tx_meas;
        ctl.rx = d.rx_meas;
        ctl.keepers = d.keepers;
        ctl.thm_idx = res.theorems.size();
        core::RoundSchedule sc = core::round_schedule(tp(), n);
        TheoremRow thm;
        thm.round = n;
        thm.dir = d.id;
        thm.t_n = sc.t_send;
        res.theorems.push_back(thm);

        for (NodeId x : net.nodes_in(d.id.src)) {
            at_local_safe(x, sc.t_sig, [this, di, n, x] { phase1a(x, di, n); });
        }
        for (NodeId y : ctl.rx) {
            at_local_safe(y, sc.t_accept, [this, di, n, y] { phase3b(y, di, n); });
            // Claim deadline depends on the receiver's last decided latency,
            // resolved at the nominal send instant.
            at_local_safe(y, sc.t_send, [this, di, n, y] {
                NodeR& yr = nr(y);
                auto it = yr.last_d.find(di);
                if (it == yr.last_d.end()) return;  // no baseline yet
                SimTime deadline =
                    core::round_send_time(tp(), n) + it->second + tp().delta_syn;
                at_local_safe(y, deadline,
                              [this, di, n, y, deadline] { evaluate_claims(y, di, n, deadline); });
            });
        }
        for (NodeId v : net.nodes_in(d.id.dst)) {
            at_local_safe(v, sc.t_decide, [this, di, n, v] { phase4(v, di, n); });
        }
    }

    // Signature exchange. Every node of the sending region independently
    // derives the round's attachment bundle from region-local state (proof
    // formation and notice windows both complete strictly before the
    // exchange instant, so honest bundles agree byte for byte), signs the
    // resulting content, and broadcasts its share region-wide. Designated
    // senders collect any quorum of matching shares: a single divergent or
    // silent node can neither block an honest heartbeat nor get a doctored
    // bundle co-signed.
    void phase1a(NodeId xid, std::size_t di, std::uint64_t n) {
        Dir& d = dirs[di];
        Key key{di, n};
        RoundCtl& ctl = rounds.at(key);
        NodeR& x = nr(xid);

        std::vector<PocFinal> finals;
        auto qit = x.attach_queue.find(n);
        if (qit != x.attach_queue.end()) {
            for (const JobKey& jk : qit->second) {
                auto fit = x.finals.find(jk);
                if (fit == x.finals.end()) continue;
                if (x.strat->omit_final_from_attachments(xid, TaskId{jk.task}, JobId{jk.job}))
                    continue;
                finals.push_back(fit->second);
            }
        }
        std::vector<RecoveryNotice> notices = x.rec.attachments_for_round(n, tp());
        std::uint32_t fs = spec.regions[d.id.src.v].f;
        AttachBundle bundle = make_bundle(std::move(finals), std::move(notices), fs + 1);

        RoundContent content{n, d.id, bundle.digest};
        SigShare own{content, x.signer->sign(content.encode())};
        bool sender = std::find(ctl.tx.begin(), ctl.tx.end(), xid) != ctl.tx.end();
        if (sender) {
            auto [it, fresh] = x.tx.try_emplace(key, SenderRound(content, fs + 1));
            (void)fresh;
            SenderRound& sr = it->second;
            x.tx_bundle[key] = std::move(bundle);
            sr.add_share(ks, own);
            if (sr.ready()) x.tx_ready_true[key] = sim.now();
            // Apply shares that arrived before our own signing instant.
            auto pit = x.pending_shares.find(key);
            if (pit != x.pending_shares.end()) {
                for (const SigShare& sh : pit->second) apply_share(x, key, sh);
                x.pending_shares.erase(pit);
            }
        }
        for (NodeId peer : net.nodes_in(d.id.src)) {
            if (peer == xid) continue;
            SigShare copy = own;
            send_intra(xid, peer, kShareBytes, kKindShare, [this, peer, key, copy](SimTime) {
                NodeR& p = nr(peer);
                if (!p.tx.count(key)) {
                    // Only designated senders collect shares; buffer a copy
                    // that outran the recipient's own exchange instant.
                    const RoundCtl& c = rounds.at(key);
                    if (std::find(c.tx.begin(), c.tx.end(), peer) != c.tx.end())
                        p.pending_shares[key].push_back(copy);
                    return;
                }
                apply_share(p, key, copy);
            });
        }
        if (!sender) return;

        // Phase 1b scheduling (the adversary may shift it; readiness clamps).
        Duration skew = x.strat->heartbeat_skew(xid, n);
        SimTime desired = core::round_send_time(tp(), n) + skew;
        x.tx_desired_local[key] = desired;
        at_local_safe(xid, desired, [this, xid, di, n] { try_send_heartbeat(xid, di, n); });
    }

    void apply_share(NodeR& p, Key key, const SigShare& sh) {
        SenderRound& sr = p.tx.at(key);
        bool was_ready = sr.ready();
        sr.add_share(ks, sh);
        if (!was_ready && sr.ready()) {
            p.tx_ready_true[key] = sim.now();
            if (p.tx_waiting[key]) {
                NodeId id = p.id;
                std::size_t di = key.dir;
                std::uint64_t n = key.round;
                sim.at(sim.now(), [this, id, di, n] { try_send_heartbeat(id, di, n); });
            }
        }
    }

    void try_send_heartbeat(NodeId xid, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        NodeR& x = nr(xid);
        auto it = x.tx.find(key);
        if (it == x.tx.end() || x.tx_sent[key]) return;
        SenderRound& sr = it->second;
        if (!sr.ready()) {
            x.tx_waiting[key] = true;
            return;
        }
        // Assembly cannot finish faster than the minimum preparation time.
        SimTime ready_true = x.tx_ready_true.at(key) + (tp().t_hb - tp().delta_hb);
        SimTime desired_true = net.true_of_local(xid, x.tx_desired_local.at(key));
        SimTime go = std::max(ready_true, desired_true);
        if (sim.now() < go) {
            sim.at(go, [this, xid, di, n] { try_send_heartbeat(xid, di, n); });
            return;
        }
        x.tx_sent[key] = true;
        auto hb_opt = sr.make_heartbeat(*x.signer);
        if (!hb_opt) return;
        Heartbeat hb = *hb_opt;
        const AttachBundle& bundle = x.tx_bundle.at(key);
        TheoremRow& thm = res.theorems.at(rounds.at(key).thm_idx);
        if (!thm.any_send || sim.now() < thm.earliest_valid_send) {
            thm.any_send = true;
            thm.earliest_valid_send = sim.now();
        }
        std::uint32_t bytes = hb_bytes(hb, bundle);
        SimTime sent_true = sim.now();
        for (NodeId y : rounds.at(key).rx) {
            AttachBundle bcopy = bundle;
            Heartbeat hcopy = hb;
            send_inter(xid, y, bytes, kKindHeartbeat,
                       [this, y, di, n, hcopy, bcopy, sent_true](SimTime t_recv) {
                           on_heartbeat(y, di, n, hcopy, bcopy, sent_true, t_recv, true);
                       });
        }
    }

    void on_heartbeat(NodeId yid, std::size_t di, std::uint64_t n, const Heartbeat& hb,
                      const AttachBundle& bundle, SimTime sent_true, SimTime recv_true,
                      bool direct) {
        Key key{di, n};
        auto rit = rounds.find(key);
        if (rit == rounds.end()) return;
        RoundCtl& ctl = rit->second;
        Dir& d = dirs[di];
        std::uint32_t fs = spec.regions[d.id.src.v].f;
        if (!measure::validate_heartbeat(ks, hb, fs + 1)) return;
        if (!(bundle.digest == hb.content.attach_digest)) return;
        NodeR& y = nr(yid);
        SimTime tl = local(yid);

        if (direct) {
            TheoremRow& thm = res.theorems.at(ctl.thm_idx);
            Duration delay = recv_true - sent_true;
            if (!thm.any_delivery || delay < thm.min_true_delay) {
                thm.any_delivery = true;
                thm.min_true_delay = delay;
            }
        }

        process_bundle(y, di, n, bundle);

        // Forward once region-wide: the heartbeat is self-certifying, so the
        // payload reaches nodes that saw no direct copy.
        if (direct && !y.hb_forwarded[key]) {
            y.hb_forwarded[key] = true;
            std::uint32_t bytes = hb_bytes(hb, bundle);
            for (NodeId v : net.nodes_in(d.id.dst)) {
                if (v == yid) continue;
                Heartbeat hcopy = hb;
                AttachBundle bcopy = bundle;
                send_intra(yid, v, bytes, kKindHbForward,
                           [this, v, di, n, hcopy, bcopy, sent_true](SimTime t_recv) {
                               on_heartbeat(v, di, n, hcopy, bcopy, sent_true, t_recv, false);
                           });
            }
        }

        bool is_rx_meas = std::find(ctl.rx.begin(), ctl.rx.end(), yid) != ctl.rx.end();
        if (!direct || !is_rx_meas) return;

        core::RoundSchedule sc = core::round_schedule(tp(), n);
        ReceiverRound& rx = ensure_rx(y, di, n);
        auto d_opt = rx.on_heartbeat(hb.sender, tl, sc.t_hb_cutoff);
        if (!d_opt) return;
        if (y.strat->suppress_proposal(yid, hb.sender, n)) return;
        Duration d_val = y.strat->proposal_value_override(yid, hb.sender, n, *d_opt).value_or(*d_opt);
        rx.add_own(d_val);
        Proposal p;
        p.round = n;
        p.dir = d.id;
        p.hb_sender = hb.sender;
        p.receiver = yid;
        p.d = d_val;
        p.sig = y.signer->sign(p.payload());
        y.plog[key].push_back(p);
        for (NodeId z : ctl.rx) {
            if (z == yid) continue;
            Proposal copy = p;
            send_intra(yid, z, kProposalBytes, kKindProposal,
                       [this, z, di, n, copy](SimTime) { on_proposal(z, di, n, copy); });
        }
        for (NodeId z : ctl.keepers) {
            Proposal copy = p;
            send_intra(yid, z, kProposalBytes, kKindProposal,
                       [this, z, di, n, copy](SimTime) { on_proposal(z, di, n, copy); });
        }
    }

    ReceiverRound& ensure_rx(NodeR& v, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        auto it = v.rx.find(key);
        if (it == v.rx.end()) {
            Dir& d = dirs[di];
            std::uint32_t fd = spec.regions[d.id.dst.v].f;
            it = v.rx
                     .emplace(key, ReceiverRound(n, d.id, core::round_send_time(tp(), n), fd + 1))
                     .first;
        }
        return it->second;
    }

    void on_proposal(NodeId zid, std::size_t di, std::uint64_t n, const Proposal& p) {
        Key key{di, n};
        auto rit = rounds.find(key);
        if (rit == rounds.end()) return;
        RoundCtl& ctl = rit->second;
        NodeR& z = nr(zid);
        SimTime tl = local(zid);
        core::RoundSchedule sc = core::round_schedule(tp(), n);
        if (!measure::validate_proposal(ks, p)) return;
        if (!measure::proposal_reasonable(tp(), p, tl, sc.t_send)) return;
        if (tl > sc.t_accept) return;  // too late to have influenced the round
        z.plog[key].push_back(p);
        if (std::find(ctl.rx.begin(), ctl.rx.end(), zid) != ctl.rx.end())
            ensure_rx(z, di, n).on_peer_proposal(p);
    }

    void phase3b(NodeId yid, std::size_t di, std::uint64_t n) {
        Dir& d = dirs[di];
        NodeR& y = nr(yid);
        ReceiverRound& rx = ensure_rx(y, di, n);
        Accept honest = rx.make_accept(tp(), yid);
        if (honest.timeout)
            safe_latch(di, d.id.dst, n, local(yid), "heartbeat-timeout");
        for (NodeId v : net.nodes_in(d.id.dst)) {
            Accept a = honest;
            auto ov = y.strat->accept_override(yid, v, n, honest.timeout, honest.d_acc);
            if (ov) {
                a.timeout = ov->first;
                a.d_acc = ov->second;
            }
            a.sig = y.signer->sign(a.payload());
            if (v == yid) {
                rx.on_accept(a);
                continue;
            }
            Accept copy = a;
            send_intra(yid, v, kAcceptBytes, kKindAccept, [this, v, di, n, copy](SimTime) {
                NodeR& vr = nr(v);
                if (!measure::validate_accept(ks, copy)) return;
                ensure_rx(vr, di, n).on_accept(copy);
            });
        }
    }

    void phase4(NodeId vid, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        RoundCtl& ctl = rounds.at(key);
        Dir& d = dirs[di];
        NodeR& v = nr(vid);
        ReceiverRound& rx = ensure_rx(v, di, n);
        measure::Decision dec = rx.decide();

        bool is_meas = std::find(ctl.rx.begin(), ctl.rx.end(), vid) != ctl.rx.end();
        std::vector<Accept> offending;
        std::optional<Proposal> own;
        if (is_meas && !rx.own_proposals().empty()) {
            Duration own_min = rx.own_proposals().front();
            for (Duration dd : rx.own_proposals())
                if (dd < own_min) own_min = dd;
            for (const Accept& a : rx.accepts()) {
                if (a.accepter == vid) continue;
                if (a.timeout || a.d_acc > own_min + tp().delta_inter) offending.push_back(a);
            }
            for (const Proposal& p : v.plog[key])
                if (p.receiver == vid && p.d == own_min) own = p;
        }
        if (dec.kind == measure::Decision::Kind::kDisputed && offending.empty())
            offending = rx.accepts();

        if (!offending.empty()) {
            Declaration decl;
            decl.round = n;
            decl.dir = d.id;
            decl.declarer = vid;
            decl.own = own;
            decl.offending = offending;
            decl.sig = v.signer->sign(decl.payload());
            on_declaration(vid, di, n, decl, /*direct_from_declarer=*/false);
            std::uint32_t bytes = kHdr + 48 + (own ? 96 : 0) +
                                  static_cast<std::uint32_t>(offending.size()) * 96 + kSig;
            for (NodeId w : net.nodes_in(d.id.dst)) {
                if (w == vid) continue;
                Declaration copy = decl;
                send_intra(vid, w, bytes, kKindDeclaration, [this, w, di, n, copy](SimTime) {
                    on_declaration(w, di, n, copy, true);
                });
            }
        }

        if (dec.kind != measure::Decision::Kind::kDisputed && !ctl.dispute_open &&
            !v.disp[key].open) {
            commit_decision(v, di, n, dec);
        }
        if (dec.kind == measure::Decision::Kind::kTimeout) {
            safe_latch(di, d.id.dst, n, local(vid), "round-timeout");
        }
        // Proof settlement for jobs riding this round (normative instant),
        // unless a dispute will re-decide the round.
        if (!ctl.dispute_open && !v.disp[key].open) settle_jobs_at(v, di, n, dec);
    }

    void upsert_round_row(const measure::RoundSummaryRow& row) {
        for (auto& r : res.rounds) {
            if (r.round == row.round && r.dir == row.dir) {
                r = row;
                return;
            }
        }
        res.rounds.push_back(row);
    }

    void commit_decision(NodeR& v, std::size_t di, std::uint64_t n, const measure::Decision& dec) {
        Key key{di, n};
        RoundCtl& ctl = rounds.at(key);
        FinalDecision fd;
        fd.kind = dec.kind;
        fd.d_ns = dec.d.ns;
        fd.set = true;
        ctl.final_dec[v.id.v] = fd;
        v.fin[key] = fd;
        if (dec.kind == measure::Decision::Kind::kValue) v.last_d[di] = dec.d;

        // Round summary + theorem row from the representative correct node.
        if (!ctl.summary_done && !v.corrupt) {
            ctl.summary_done = true;
            TheoremRow& thm = res.theorems.at(ctl.thm_idx);
            thm.decided = true;
            thm.timeout = dec.kind == measure::Decision::Kind::kTimeout;
            thm.d_n = dec.d;
            measure::RoundSummaryRow row;
            row.round = n;
            row.dir = dirs[di].id;
            row.decision = dec;
            ReceiverRound& rx = ensure_rx(v, di, n);
            row.heartbeats = rx.heartbeats_seen();
            row.proposals = rx.own_proposals().size() + rx.peer_proposals().size();
            row.accepts = rx.accepts().size();
            upsert_round_row(row);
        }
    }

    // Ride round of job k of stream si as this node knows it: the canonical
    // schedule-derived round unless a retry re-registered it.
    std::uint64_t ride_round(const NodeR& v, std::size_t si, std::uint64_t k) const {
        const Stream& st = streams[si];
        auto reg = v.attach_round_of.find(JobKey{st.task.v, k});
        return reg != v.attach_round_of.end() ? reg->second : job_attach_round(st, k);
    }

    void settle_jobs_at(NodeR& v, std::size_t di, std::uint64_t n, const measure::Decision& dec) {
        for (std::size_t si = 0; si < streams.size(); ++si) {
            Stream& st = streams[si];
            if (!st.s.poc || st.dir_idx != di) continue;
            if (std::find(st.down.begin(), st.down.end(), v.id) == st.down.end()) continue;
            for (std::uint64_t k = 0; k < st.n_jobs; ++k) {
                if (ride_round(v, si, k) != n) continue;
                auto& trk = ensure_tracker(v, st, k);
                if (trk.settled()) continue;
                if (dec.kind == measure::Decision::Kind::kTimeout) {
                    trk.mark_unjudgeable();
                    safe_latch(di, st.dst, n, local(v.id), "proof-round-timeout");
                    continue;
                }
                // Settle from the attested attachment set seen for round n.
                Key key{di, n};
                auto sb = v.seen_bundle.find(key);
                if (sb == v.seen_bundle.end() || !sb->second) {
                    trk.mark_unjudgeable();
                    safe_latch(di, st.dst, n, local(v.id), "proof-carrier-missing");
                    continue;
                }
                std::set<core::Hash128> tuple;
                for (const PocFinal& f : sb->second->finals)
                    if (f.task == st.task && f.job.v == k) tuple.insert(f.h_m);
                auto events = trk.settle(tuple, local(v.id));
                handle_settle_events(v, si, k, events, n);
            }
        }
    }

    poc::InputTracker& ensure_tracker(NodeR& v, const Stream& st, std::uint64_t k) {
        JobKey jk{st.task.v, k};
        auto it = v.trackers.find(jk);
        if (it == v.trackers.end())
            it = v.trackers.emplace(jk, poc::InputTracker(st.task, JobId{k})).first;
        return it->second;
    }

    void handle_settle_events(NodeR& v, std::size_t si, std::uint64_t k,
                              const std::vector<poc::InputTracker::Event>& events,
                              std::uint64_t round) {
        Stream& st = streams[si];
        JobKey jk{st.task.v, k};
        auto& trk = v.trackers.at(jk);
        // Without a proof nobody can tell which sender was wrong (the proof
        // channel failed, not necessarily the data), so a proof-less settle
        // discards the inputs but accuses no one.
        bool proofless = trk.needs_new_input();
        for (const auto& e : events) {
            res.verdicts.push_back({local(v.id), st.task, JobId{k}, v.id, e.sender, e.verdict,
                                    e.became_in_use});
            if (e.verdict == poc::Verdict::kIncorrect && !proofless &&
                e.sender.v != 0xffffffffu) {
                // Settles happen no later than the round's decide instant, so
                // that instant anchors the notice stamp for every consumer.
                detect_fault(v.id,
                             {e.sender, FaultKind::kCommission, "output-without-proof",
                              local(v.id)},
                             st.dir_idx, round, core::round_schedule(tp(), round).t_decide);
            }
            if (e.verdict == poc::Verdict::kCorrect && e.became_in_use) {
                auto bit = v.bodies[jk].find(e.h);
                if (bit != v.bodies[jk].end()) {
                    emit_app_event(v.id, st.task, JobId{k}, bit->second, true, true);
                }
            }
        }
        // The proof may simply confirm the optimistically used value; the
        // application still wants to hear that its input is now validated.
        if (!events.empty() && !proofless) {
            bool switched = false;
            for (const auto& e : events) switched = switched || e.became_in_use;
            if (!switched && trk.in_use()) {
                auto bit = v.bodies[jk].find(*trk.in_use());
                if (bit != v.bodies[jk].end())
                    emit_app_event(v.id, st.task, JobId{k}, bit->second, true, false);
            }
        }
        if (proofless && !v.retry_requested.count(jk)) {
            v.retry_requested.insert(jk);
            std::uint64_t rretry = retry_round(st.dir_idx, round);
            v.attach_round_of[jk] = rretry;  // consumer re-settles at the retry round
            trk.rearm();
            // The request names the replicas it is addressed to, so the
            // re-run cohort is fixed by the requester, not by each replica's
            // view of the assignment at arrival time.
            std::vector<NodeId> cohort = st.up;
            for (NodeId u : cohort) {
                NodeId vid = v.id;
                send_inter(vid, u, kRequestBytes, kKindNewInput,
                           [this, u, si, k, rretry, cohort](SimTime) {
                               on_new_input_request(u, si, k, rretry, cohort);
                           });
            }
        }
    }

    void emit_app_event(NodeId consumer, TaskId task, JobId job,
                        const std::vector<std::uint8_t>& bytes, bool validated, bool corrected) {
        AppEvent e{local(consumer), consumer, task, job, bytes, validated, corrected};
        res.app_events.push_back(e);
        if (app_hook) app_hook(e);
    }

    // ---- claims -------------------------------------------------------------

    void evaluate_claims(NodeId yid, std::size_t di, std::uint64_t n, SimTime deadline) {
        if (!spec.tgs_enabled) return;
        Key key{di, n};
        auto rit = rounds.find(key);
        if (rit == rounds.end()) return;
        RoundCtl& ctl = rit->second;
        NodeR& y = nr(yid);
        SimTime tl = local(yid);
        auto rx_it = y.rx.find(key);
        for (NodeId x : ctl.tx) {
            bool arrived = false;
            if (rx_it != y.rx.end()) {
                auto t_arr = rx_it->second.hb_arrival(x);
                arrived = t_arr && *t_arr <= deadline;
            }
            bool lie = y.strat->claim_false_suspicious(yid, x, tl);
            tgs::ClaimKind kind =
                (!arrived || lie) ? tgs::ClaimKind::kSuspicious : tgs::ClaimKind::kNormal;
            if (kind == tgs::ClaimKind::kSuspicious) broadcast_claim_bytes(y, di, x);
            ledger_event(kind, x, yid, sim.now());
        }
    }

    // Suspicious claims are explicit messages (normal is silence); account
    // the bytes to both regions.
    void broadcast_claim_bytes(NodeR& y, std::size_t di, NodeId about) {
        (void)about;
        Dir& d = dirs[di];
        for (NodeId v : net.nodes_in(d.id.dst)) {
            if (v == y.id) continue;
            send_intra(y.id, v, kClaimBytes, kKindClaim, [](SimTime) {});
        }
        for (NodeId v : d.tx_meas) send_inter(y.id, v, kClaimBytes, kKindClaim, [](SimTime) {});
    }

    // ---- disputes ------------------------------------------------------------

    DisputeSt& ensure_dispute(NodeR& v, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        DisputeSt& ds = v.disp[key];
        if (ds.open) return ds;
        ds.open = true;
        rounds.at(key).dispute_open = true;
        core::RoundSchedule sc = core::round_schedule(tp(), n);
        ds.sched = meas_dispute::make_dispute_schedule(tp(), spec.dispute, sc.t_decide);
        NodeId vid = v.id;
        bool holder = is_holder(vid, di, n);
        if (holder) {
            at_local_safe(vid, ds.sched.t_logs_send,
                          [this, vid, di, n] { dispute_send_log(vid, di, n); });
        }
        at_local_safe(vid, ds.sched.t_decide,
                      [this, vid, di, n] { dispute_decide(vid, di, n); });
        return ds;
    }

    bool is_holder(NodeId v, std::size_t di, std::uint64_t n) {
        RoundCtl& ctl = rounds.at(Key{di, n});
        return std::find(ctl.rx.begin(), ctl.rx.end(), v) != ctl.rx.end() ||
               std::find(ctl.keepers.begin(), ctl.keepers.end(), v) != ctl.keepers.end();
    }

    void on_declaration(NodeId vid, std::size_t di, std::uint64_t n, const Declaration& decl,
                        bool direct) {
        NodeR& v = nr(vid);
        if (!meas_dispute::validate_declaration(ks, decl)) {
            // Declarations go out at the decide instant and travel at most
            // two intra hops (one forward), bounding every copy's arrival.
            detect_fault(vid,
                         {decl.declarer, FaultKind::kCommission, "invalid-declaration",
                          local(vid)},
                         di, n, core::round_schedule(tp(), n).t_decide + tp().d_intra * 2);
            return;
        }
        DisputeSt& ds = ensure_dispute(v, di, n);
        ds.decls.push_back(decl);
        if (direct && ds.fwd_decl.insert(decl.declarer.v).second) {
            Dir& d = dirs[di];
            std::uint32_t bytes = kHdr + 48 + (decl.own ? 96 : 0) +
                                  static_cast<std::uint32_t>(decl.offending.size()) * 96 + kSig;
            for (NodeId w : net.nodes_in(d.id.dst)) {
                if (w == vid) continue;
                Declaration copy = decl;
                send_intra(vid, w, bytes, kKindDeclForward, [this, w, di, n, copy](SimTime) {
                    on_declaration(w, di, n, copy, false);
                });
            }
        }
    }

    void dispute_send_log(NodeId vid, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        NodeR& v = nr(vid);
        Dir& d = dirs[di];
        HolderLog log;
        log.round = n;
        log.dir = d.id;
        log.holder = vid;
        log.entries = v.plog[key];
        log.sig = v.signer->sign(log.payload());
        std::uint32_t bytes =
            kHdr + 32 + static_cast<std::uint32_t>(log.entries.size()) * 96 + kSig;
        on_holder_log(vid, di, n, log, false);
        for (NodeId w : net.nodes_in(d.id.dst)) {
            if (w == vid) continue;
            HolderLog copy = log;
            send_intra(vid, w, bytes, kKindHolderLog,
                       [this, w, di, n, copy](SimTime) { on_holder_log(w, di, n, copy, true); });
        }
    }

    void on_holder_log(NodeId vid, std::size_t di, std::uint64_t n, const HolderLog& log,
                       bool direct) {
        NodeR& v = nr(vid);
        DisputeSt& ds = ensure_dispute(v, di, n);
        if (ds.decided) return;
        SimTime tl = local(vid);
        SimTime due = direct ? ds.sched.t_logs_due : ds.sched.t_logs_due + tp().d_intra;
        if (tl > due) return;  // too late to count anywhere consistently
        ds.logs.push_back(log);
        if (direct && ds.fwd_log.insert(log.holder.v).second) {
            Dir& d = dirs[di];
            std::uint32_t bytes =
                kHdr + 32 + static_cast<std::uint32_t>(log.entries.size()) * 96 + kSig;
            for (NodeId w : net.nodes_in(d.id.dst)) {
                if (w == vid) continue;
                HolderLog copy = log;
                send_intra(vid, w, bytes, kKindLogForward, [this, w, di, n, copy](SimTime) {
                    on_holder_log(w, di, n, copy, false);
                });
            }
        }
    }

    void dispute_decide(NodeId vid, std::size_t di, std::uint64_t n) {
        Key key{di, n};
        NodeR& v = nr(vid);
        DisputeSt& ds = v.disp[key];
        if (ds.decided) return;
        ds.decided = true;
        Dir& d = dirs[di];
        RoundCtl& ctl = rounds.at(key);
        std::uint32_t fd = spec.regions[d.id.dst.v].f;
        std::set<NodeId> holders;
        for (NodeId h : ctl.rx) holders.insert(h);
        for (NodeId h : ctl.keepers) holders.insert(h);
        ReceiverRound& rx = ensure_rx(v, di, n);
        // Cross-validate against every accept version this node knows of:
        // its own copies plus the offending copies carried by declarations
        // (equivocation is only visible in the union).
        std::vector<Accept> accepts = rx.accepts();
        for (const Declaration& decl : ds.decls)
            accepts.insert(accepts.end(), decl.offending.begin(), decl.offending.end());
        auto out =
            meas_dispute::cross_validate(ks, tp(), fd + 1, holders, ds.logs, accepts, local(vid));
        measure::Decision dec;
        if (out.timeout) {
            dec.kind = measure::Decision::Kind::kTimeout;
        } else {
            dec.kind = measure::Decision::Kind::kValue;
            dec.d = out.new_accept;
        }
        // Commit (dispute overrides the round outcome).
        FinalDecision fdn;
        fdn.kind = dec.kind;
        fdn.d_ns = dec.d.ns;
        fdn.set = true;
        ctl.final_dec[vid.v] = fdn;
        v.fin[key] = fdn;
        if (dec.kind == measure::Decision::Kind::kValue) v.last_d[di] = dec.d;
        if (!v.corrupt) {
            TheoremRow& thm = res.theorems.at(ctl.thm_idx);
            if (!thm.disputed) {
                thm.disputed = true;
                thm.decided = true;
                thm.timeout = out.timeout;
                thm.d_n = dec.d;
                measure::RoundSummaryRow row;
                row.round = n;
                row.dir = d.id;
                row.decision.kind = dec.kind;
                row.decision.d = dec.d;
                row.heartbeats = rx.heartbeats_seen();
                row.proposals = rx.own_proposals().size() + rx.peer_proposals().size();
                row.accepts = rx.accepts().size();
                upsert_round_row(row);
                if (!ds.decls.empty())
                    res.dispute_lines.push_back(
                        meas_dispute::dispute_audit_json(n, d.id, vid, ds.decls.front(), out));
            }
        }
        for (const FaultRecord& f : out.faults)
            detect_fault(vid, f, di, n, ds.sched.t_decide);
        if (dec.kind == measure::Decision::Kind::kTimeout)
            safe_latch(di, d.id.dst, n, local(vid), "dispute-timeout");
        settle_jobs_at(v, di, n, dec);
    }

    // ---- streams & proofs -----------------------------------------------------

    void schedule_streams() {
        for (std::size_t si = 0; si < streams.size(); ++si) {
            Stream& st = streams[si];
            for (std::uint64_t k = 0; k < st.n_jobs; ++k) {
                SimTime t_m = job_completion(st, k);
                // The replica cohort of a job is the assignment in force at a
                // canonical instant strictly before any replica's local wake.
                // Exclusions applied later take effect from the next job, so
                // every runner agrees on who owes a partial and replacements
                // pick up work from their first full job onward.
                SimTime t_res = t_m - tp().delta_syn * 2;
                if (t_res.ns < 0) t_res = SimTime{0};
                sim.at(t_res, [this, si, k] { resolve_job_cohort(si, k); });
            }
        }
    }

    void resolve_job_cohort(std::size_t si, std::uint64_t k) {
        Stream& st = streams[si];
        std::vector<NodeId> cohort = st.up;
        SimTime t_m = job_completion(st, k);
        SimTime t_check = t_m + spec.poc.e_poc + tp().d_intra + spec.poc.e_sig;
        for (NodeId u : cohort) {
            at_local_safe(u, t_m, [this, si, k, u, t_check, cohort] {
                run_job(u, si, k, t_check, cohort);
            });
        }
        // Monitor streams: consumers evaluate claims per job.
        if (!st.s.poc && spec.tgs_enabled) {
            for (NodeId y : st.down) {
                at_local_safe(y, t_m, [this, si, k, y, cohort] {
                    Stream& s2 = streams[si];
                    NodeR& yr = nr(y);
                    if (!yr.last_d.count(s2.dir_idx)) return;
                    SimTime deadline = job_completion(s2, k) +
                                       yr.last_d.at(s2.dir_idx) + tp().delta_syn;
                    at_local_safe(y, deadline, [this, si, k, y, cohort] {
                        evaluate_stream_claims(y, si, k, cohort);
                    });
                });
            }
        }
    }

    // t_check: the nominal instant of the partial-omission verdict for this
    // run.  It is the same value at every replica of the run (the job grid
    // for first runs, the retry ride round's signing instant for re-runs) so
    // that independent detectors of one omission stamp identical notices.
    // cohort: the replicas bound to this run; partials are owed within it.
    void run_job(NodeId uid, std::size_t si, std::uint64_t k, SimTime t_check,
                 const std::vector<NodeId>& cohort) {
        Stream& st = streams[si];
        NodeR& u = nr(uid);
        std::vector<std::uint8_t> honest = honest_output(st, JobId{k});
        std::vector<std::uint8_t> data =
            u.strat->output_override(uid, st.task, JobId{k}, honest).value_or(honest);
        core::Hash128 h_sent = core::hash128(data, 0xda7a);
        std::uint32_t bytes = kHdr + static_cast<std::uint32_t>(data.size()) + kSig;
        for (NodeId y : st.down) {
            std::vector<std::uint8_t> copy = data;
            send_inter(uid, y, bytes, kKindStreamData, [this, y, si, k, copy, h_sent, uid](SimTime) {
                on_stream_data(y, si, k, uid, h_sent, copy);
            });
        }
        if (st.s.poc) {
            // Countersignature omission check: partials travel one
            // synchronous intra hop, so a co-replica's partial still missing
            // after the exchange window is proof of omission.
            at_local_safe(uid, local(uid) + spec.poc.e_poc + tp().d_intra + spec.poc.e_sig,
                          [this, uid, si, k, t_check, cohort] {
                              Stream& s2 = streams[si];
                              NodeR& u2 = nr(uid);
                              JobKey jk{s2.task.v, k};
                              if (u2.rec.is_excluded(uid)) return;
                              for (NodeId w : cohort) {
                                  if (w == uid || u2.rec.is_excluded(w)) continue;
                                  if (!u2.partials_from[jk].count(w.v)) {
                                      detect_fault(uid,
                                                   {w, FaultKind::kOmission,
                                                    "poc-partial-missing", local(uid)},
                                                   s2.dir_idx, ride_round(u2, si, k), t_check);
                                  }
                              }
                          });
        }
        if (st.s.poc && !u.strat->withhold_countersign(uid, st.task, JobId{k})) {
            // Countersign own computed (honest) output and broadcast the
            // partial region-wide after the proof-generation allowance.
            core::Hash128 h_honest = core::hash128(honest, 0xda7a);
            PocPartial part{st.task, JobId{k}, h_honest, {}};
            part.sig = u.signer->sign(part.payload());
            std::vector<std::uint8_t> body = honest;
            at_local_safe(uid, local(uid) + spec.poc.e_poc, [this, uid, si, k, part, body] {
                Stream& s2 = streams[si];
                NodeR& u2 = nr(uid);
                // Keep the honest body for possible later correction events.
                u2.bodies[JobKey{s2.task.v, k}][part.h_m] = body;
                on_partial(uid, si, k, part);
                for (NodeId v : net.nodes_in(s2.src)) {
                    if (v == uid) continue;
                    PocPartial copy = part;
                    send_intra(uid, v, kPartialBytes, kKindPartial,
                               [this, v, si, k, copy](SimTime) { on_partial(v, si, k, copy); });
                }
            });
        }
    }

    void on_partial(NodeId vid, std::size_t si, std::uint64_t k, const PocPartial& p) {
        Stream& st = streams[si];
        NodeR& v = nr(vid);
        JobKey jk{st.task.v, k};
        std::uint32_t fu = spec.regions[st.src.v].f;
        if (ks.verify(p.payload(), p.sig)) v.partials_from[jk].insert(p.sig.signer.v);
        auto it = v.assemblers.find(jk);
        if (it == v.assemblers.end())
            it = v.assemblers.emplace(jk, poc::PocAssembler(st.task, JobId{k}, fu + 1)).first;
        bool completed = it->second.add(ks, p);
        if (completed && !v.finals.count(jk)) {
            // Verification allowance before the proof is usable.
            at_local_safe(vid, local(vid) + spec.poc.e_sig, [this, vid, si, k] {
                Stream& s2 = streams[si];
                NodeR& v2 = nr(vid);
                JobKey jk2{s2.task.v, k};
                auto fin = v2.assemblers.at(jk2).make_final();
                if (!fin || v2.finals.count(jk2)) return;
                v2.finals.emplace(jk2, *fin);
                std::uint64_t ride = ride_round(v2, si, k);
                v2.attach_round_of[jk2] = ride;
                auto& q = v2.attach_queue[ride];
                if (std::find(q.begin(), q.end(), jk2) == q.end()) q.push_back(jk2);
            });
        }
    }

    void on_stream_data(NodeId yid, std::size_t si, std::uint64_t k, NodeId sender,
                        core::Hash128 h, const std::vector<std::uint8_t>& data) {
        Stream& st = streams[si];
        NodeR& y = nr(yid);
        if (y.rec.is_excluded(sender)) return;  // cut off once the notice applied
        JobKey jk{st.task.v, k};
        if (!y.stream_arrival.count(jk)) y.stream_arrival[jk] = local(yid);
        y.bodies[jk][h] = data;
        if (!st.s.poc) {
            emit_app_event(yid, st.task, JobId{k}, data, false, false);
            return;
        }
        auto& trk = ensure_tracker(y, st, k);
        bool first_use = trk.on_input(sender, h, local(yid));
        if (first_use) emit_app_event(yid, st.task, JobId{k}, data, false, false);
    }

    void evaluate_stream_claims(NodeId yid, std::size_t si, std::uint64_t k,
                                const std::vector<NodeId>& cohort) {
        Stream& st = streams[si];
        NodeR& y = nr(yid);
        JobKey jk{st.task.v, k};
        SimTime deadline = job_completion(st, k) +
                           (y.last_d.count(st.dir_idx) ? y.last_d.at(st.dir_idx) : Duration{0}) +
                           tp().delta_syn;
        auto arr = y.stream_arrival.find(jk);
        bool arrived = arr != y.stream_arrival.end() && arr->second <= deadline;
        for (NodeId u : cohort) {
            bool lie = y.strat->claim_false_suspicious(yid, u, local(yid));
            tgs::ClaimKind kind =
                (!arrived || lie) ? tgs::ClaimKind::kSuspicious : tgs::ClaimKind::kNormal;
            if (kind == tgs::ClaimKind::kSuspicious) broadcast_claim_bytes(y, st.dir_idx, u);
            ledger_event(kind, u, yid, sim.now());
        }
    }

    void register_retry(NodeR& v, std::size_t si, std::uint64_t k, std::uint64_t rretry) {
        Stream& st = streams[si];
        JobKey jk{st.task.v, k};
        if (v.attach_round_of.count(jk) && v.attach_round_of[jk] >= rretry) return;
        v.attach_round_of[jk] = rretry;
        if (v.finals.count(jk)) {
            auto& q = v.attach_queue[rretry];
            if (std::find(q.begin(), q.end(), jk) == q.end()) q.push_back(jk);
        }
    }

    void on_new_input_request(NodeId uid, std::size_t si, std::uint64_t k,
                              std::uint64_t rretry, const std::vector<NodeId>& cohort) {
        Stream& st = streams[si];
        NodeR& u = nr(uid);
        JobKey jk{st.task.v, k};
        // Register the retry ride round (bounded sanity window), rebroadcast
        // region-wide so every node carries the proof at the same round.
        std::uint64_t sane_min = core::first_round_send_at_or_after(tp(), local(uid));
        if (rretry < sane_min || rretry > sane_min + 4) return;
        if (u.attach_round_of.count(jk) && u.attach_round_of[jk] >= rretry) return;
        register_retry(u, si, k, rretry);
        for (NodeId v : net.nodes_in(st.src)) {
            if (v == uid) continue;
            send_intra(uid, v, kRequestBytes, kKindNewInput, [this, v, si, k, rretry](SimTime) {
                register_retry(nr(v), si, k, rretry);
            });
        }
        // Resend the data and a fresh partial exchange.  The retry ride round
        // leaves a full proof-formation gap after any in-window request, so
        // its signing instant bounds every replica's omission verdict.
        run_job(uid, si, k, core::round_schedule(tp(), rretry).t_sig, cohort);
    }

    void process_bundle(NodeR& v, std::size_t di, std::uint64_t n, const AttachBundle& bundle) {
        Key key{di, n};
        auto& slot = v.seen_bundle[key];
        if (slot) return;
        slot = bundle;
        Dir& d = dirs[di];
        std::uint32_t fs = spec.regions[d.id.src.v].f;
        for (const PocFinal& f : bundle.finals) {
            if (!poc::validate_final(ks, f, fs + 1)) continue;
            JobKey jk{f.task.v, f.job.v};
            if (!v.finals.count(jk)) v.finals.emplace(jk, f);
        }
        for (const RecoveryNotice& notice : bundle.notices) {
            if (!recovery::validate_notice(ks, notice)) continue;
            on_notice_received(v, notice, n);
        }

        // Early settlement: one valid heartbeat attests the attachment set.
        for (std::size_t si = 0; si < streams.size(); ++si) {
            Stream& st = streams[si];
            if (!st.s.poc || st.dir_idx != di) continue;
            if (std::find(st.down.begin(), st.down.end(), v.id) == st.down.end()) continue;
            for (std::uint64_t k = 0; k < st.n_jobs; ++k) {
                if (ride_round(v, si, k) != n) continue;
                auto& trk = ensure_tracker(v, st, k);
                if (trk.settled()) continue;
                std::set<core::Hash128> tuple;
                for (const PocFinal& f : bundle.finals)
                    if (f.task == st.task && f.job.v == k) tuple.insert(f.h_m);
                auto events = trk.settle(tuple, local(v.id));
                handle_settle_events(v, si, k, events, n);
            }
        }
    }

    // ---- results ---------------------------------------------------------------

    void collect() {
        res.t_end = spec.t_end;
        res.bytes = net.byte_counters();
        res.messages = net.messages_sent();
        for (auto& n : nodes) {
            res.final_scores[n->id.v] = ledger.score(n->id);
            res.flag_counts[n->id.v] = ledger.flag_count(n->id);
        }
        // Recovery application times per notice.
        for (auto& [rp, summary] : res.rps) {
            for (auto& n : nodes) {
                auto t = n->rec.applied_at(rp);
                if (t) summary.applied_at[n->id.v] = *t;
            }
        }
        // Decision agreement among correct nodes.
        for (auto& [key, ctl] : rounds) {
            std::optional<FinalDecision> ref;
            for (NodeId v : net.nodes_in(dirs[key.dir].id.dst)) {
                if (nr(v).corrupt) continue;
                auto it = ctl.final_dec.find(v.v);
                if (it == ctl.final_dec.end() || !it->second.set) continue;
                if (!ref) {
                    ref = it->second;
                } else if (ref->kind != it->second.kind || ref->d_ns != it->second.d_ns) {
                    res.decision_agreement = false;
                }
            }
        }
        std::sort(res.rounds.begin(), res.rounds.end(),
                  [](const measure::RoundSummaryRow& a, const measure::RoundSummaryRow& b) {
                      return std::tie(a.round, a.dir.src.v, a.dir.dst.v) <
                             std::tie(b.round, b.dir.src.v, b.dir.dst.v);
                  });
        if (spec.trace) res.trace_csv = simnet::trace_to_csv(net.trace());
    }

    Results run() {
        schedule_all_rounds();
        schedule_streams();
        sim.run_until(spec.t_end);
        collect();
        return std::move(res);
    }
};

World::World(const ScenarioSpec& spec) : impl_(std::make_unique<Impl>(spec)) { impl_->build(); }
World::~World() = default;

void World::set_app_hook(std::function<void(const AppEvent&)> hook) {
    impl_->app_hook = std::move(hook);
}
void World::set_safe_mode_hook(std::function<void(const SafeModeRow&)> hook) {
    impl_->safe_hook = std::move(hook);
}
void World::at_local(NodeId n, SimTime t_local, std::function<void()> fn) {
    impl_->at_local_safe(n, t_local, std::move(fn));
}
simnet::Simulator& World::simulator() { return impl_->sim; }
const simnet::Network& World::network() const { return impl_->net; }
SimTime World::local_now(NodeId n) const { return impl_->net.local_now(n); }

Results World::run() { return impl_->run(); }

void add_all_pairs_directions(ScenarioSpec& s, const simnet::InterLinkParams& link) {
    for (std::uint32_t a = 0; a < s.regions.size(); ++a)
        for (std::uint32_t b = 0; b < s.regions.size(); ++b)
            if (a != b) s.directions.push_back({a, b, link});
}

}  // namespace geoshield::protosim
