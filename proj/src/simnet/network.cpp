#include "geoshield/simnet/network.hpp"

#include <algorithm>
#include <cmath>

namespace geoshield::simnet {

namespace {

// Keyed-draw domains; each random decision gets a unique (domain, keys) tuple.
enum : std::uint64_t {
    kDomWalk = 1,
    kDomJitter = 2,
    kDomTail = 3,
    kDomCopy = 4,
    kDomSenderBurst = 5,
    kDomRecvBurst = 6,
    kDomIntra = 7,
};

}  // namespace

Duration InterLinkParams::jitter_width() const {
    // Uniform jitter J on [0, R): two independent draws differ by >= delta
    // with probability (1 - delta/R)^2. Choose R so that probability equals
    // jitter_margin * (1 - p_norm_actual), leaving headroom for tail events
    // and base drift within the conformance budget.
    double allow = (1.0 - p_norm_actual) * jitter_margin;
    if (allow <= 0.0) return delta_inter;  // degenerate: keep within bound
    double r = static_cast<double>(delta_inter.ns) / (1.0 - std::sqrt(allow > 1.0 ? 1.0 : allow));
    return Duration::nanos(static_cast<std::int64_t>(r));
}

RegionId Network::add_region(IntraLinkParams intra) {
    RegionId id{static_cast<std::uint32_t>(region_intra_.size())};
    region_intra_.push_back(intra);
    region_nodes_.emplace_back();
    // Grow the inter-link matrix.
    std::size_t dim = region_intra_.size();
    std::vector<InterLink> grown(dim * dim);
    for (std::size_t f = 0; f + 1 < dim; ++f)
        for (std::size_t t = 0; t + 1 < dim; ++t) grown[f * dim + t] = inter_[f * inter_dim_ + t];
    inter_ = std::move(grown);
    inter_dim_ = dim;
    return id;
}

NodeId Network::add_node(RegionId region) {
    NodeId id{static_cast<std::uint32_t>(node_region_.size())};
    node_region_.push_back(region.v);
    clock_off_.push_back(Duration{0});
    bytes_.emplace_back();
    region_nodes_.at(region.v).push_back(id);
    return id;
}

void Network::set_inter_link(RegionId from, RegionId to, InterLinkParams params) {
    InterLink& l = inter_link(from, to);
    l.p = params;
    l.base = params.base_start;
    l.walk_idx = 0;
    l.used = true;
}

Network::InterLink& Network::inter_link(RegionId from, RegionId to) {
    return inter_.at(from.v * inter_dim_ + to.v);
}

const Network::InterLink* Network::inter_link_if(RegionId from, RegionId to) const {
    const InterLink& l = inter_.at(from.v * inter_dim_ + to.v);
    return l.used ? &l : nullptr;
}

double Network::effective_p_norm(const InterLink& l, SimTime t) const {
    if (dos_.enabled && t >= dos_.start && t < dos_.end)
        return std::min(l.p.p_norm_actual, dos_.p_norm_under_attack);
    return l.p.p_norm_actual;
}

Duration Network::inter_base(RegionId from, RegionId to, SimTime t) {
    InterLink& l = inter_link(from, to);
    if (!l.used) throw std::logic_error("inter_base: link not configured");
    std::int64_t want = l.p.walk_window.ns > 0 ? t.ns / l.p.walk_window.ns : 0;
    std::uint64_t pair_key = (std::uint64_t(from.v) << 32) | to.v;
    while (l.walk_idx < want) {
        ++l.walk_idx;
        std::int64_t span = 2 * l.p.walk_step_max.ns + 1;
        std::int64_t step =
            static_cast<std::int64_t>(keyed_u64(seed_, kDomWalk, pair_key,
                                                static_cast<std::uint64_t>(l.walk_idx)) %
                                      static_cast<std::uint64_t>(span)) -
            l.p.walk_step_max.ns;
        l.base.ns = std::clamp(l.base.ns + step, l.p.base_min.ns, l.p.base_max.ns);
    }
    return l.base;
}

Duration Network::inter_delay_max(RegionId from, RegionId to) const {
    const InterLink* l = inter_link_if(from, to);
    if (!l) throw std::logic_error("inter_delay_max: link not configured");
    return l->p.base_max + l->p.jitter_width();
}

std::uint64_t Network::send(NodeId src, NodeId dst, std::uint32_t wire_bytes, std::uint16_t kind,
                            DeliverFn deliver) {
    const std::uint64_t seq = next_seq_++;
    const SimTime t_send = sim_.now();
    RegionId rs = region_of(src), rd = region_of(dst);

    DropReason drop = DropReason::kDelivered;
    SimTime t_recv = t_send;

    if (rs == rd) {
        const IntraLinkParams& p = region_intra_.at(rs.v);
        std::int64_t span = p.spread.ns + 1;
        std::int64_t lat = p.d.ns - static_cast<std::int64_t>(keyed_u64(seed_, kDomIntra, seq) %
                                                              static_cast<std::uint64_t>(span));
        t_recv = t_send + Duration::nanos(lat);
        bytes_.at(src.v).intra_sent += wire_bytes;
    } else {
        InterLink& l = inter_link(rs, rd);
        if (!l.used) throw std::logic_error("send: inter-region link not configured");
        bytes_.at(src.v).inter_sent += wire_bytes;

        std::uint64_t bw = l.p.burst_window.ns > 0
                               ? static_cast<std::uint64_t>(t_send.ns / l.p.burst_window.ns)
                               : 0;
        if (l.p.drop_sender_window > 0 &&
            keyed_u01(seed_, kDomSenderBurst, src.v, bw) < l.p.drop_sender_window) {
            drop = DropReason::kSenderBurst;
        } else if (l.p.drop_recv_window > 0 &&
                   keyed_u01(seed_, kDomRecvBurst, dst.v, bw) < l.p.drop_recv_window) {
            drop = DropReason::kReceiverBurst;
        } else if (l.p.drop_copy > 0 && keyed_u01(seed_, kDomCopy, seq) < l.p.drop_copy) {
            drop = DropReason::kCopyLoss;
        } else {
            Duration base = inter_base(rs, rd, t_send);
            // Jitter width under the p_norm effective right now (DoS widens it).
            InterLinkParams eff = l.p;
            eff.p_norm_actual = effective_p_norm(l, t_send);
            Duration width = eff.jitter_width();
            std::int64_t jit = width.ns > 0
                                   ? static_cast<std::int64_t>(keyed_u64(seed_, kDomJitter, seq) %
                                                               static_cast<std::uint64_t>(width.ns))
                                   : 0;
            std::int64_t extra = 0;
            if (l.p.tail_prob > 0 && keyed_u01(seed_, kDomTail, seq) < l.p.tail_prob) {
                extra = l.p.tail_extra_max.ns > 0
                            ? static_cast<std::int64_t>(
                                  keyed_u64(seed_, kDomTail, seq, 1) %
                                  static_cast<std::uint64_t>(l.p.tail_extra_max.ns))
                            : 0;
            }
            t_recv = t_send + base + Duration::nanos(jit + extra);
        }
    }

    if (trace_on_) {
        trace_.push_back(TraceRecord{seq, t_send, t_recv, src, dst, kind, wire_bytes, drop});
    }

    if (drop == DropReason::kDelivered) {
        NodeId d = dst;
        std::uint32_t wb = wire_bytes;
        bool inter = rs != rd;
        sim_.at(t_recv, [this, d, wb, inter, fn = std::move(deliver), t_recv] {
            if (inter)
                bytes_.at(d.v).inter_recv += wb;
            else
                bytes_.at(d.v).intra_recv += wb;
            fn(t_recv);
        });
    }
    return seq;
}

}  // namespace geoshield::simnet
