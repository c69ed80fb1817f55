#include "geoshield/core/params.hpp"

namespace geoshield::core {

std::vector<std::string> TimingParams::validate() const {
    std::vector<std::string> errs;
    auto need = [&](bool ok, const char* msg) {
        if (!ok) errs.emplace_back(msg);
    };
    need(T_int.ns > 0, "T_int must be positive");
    need(d_intra.ns > 0, "d_intra must be positive");
    need(delta_intra.ns >= 0 && delta_intra <= d_intra,
         "delta_intra must lie in [0, d_intra]");
    need(t_hb.ns > 0, "t_hb must be positive");
    need(delta_hb.ns >= 0 && delta_hb <= t_hb, "delta_hb must lie in [0, t_hb]");
    need(delta_syn.ns >= 0, "delta_syn must be non-negative");
    need(t_prop.ns >= 0, "t_prop must be non-negative");
    need(delta_prop.ns >= 0 && delta_prop <= t_prop,
         "delta_prop must lie in [0, t_prop]");
    need(hb_timeout.ns > 0, "hb_timeout must be positive");
    need(delta_inter.ns > 0, "delta_inter must be positive");
    // Signature exchange of round n must start after round n-1's send, and the
    // proposal cutoff must leave room for heartbeats that arrive at t_send.
    need(d_intra + t_hb < T_int, "d_intra + t_hb must be smaller than T_int");
    need(hb_timeout > t_prop + d_intra,
         "hb_timeout must exceed t_prop + d_intra (proposal cutoff before accept)");
    need(hb_timeout < T_int, "hb_timeout must be smaller than T_int");
    return errs;
}

}  // namespace geoshield::core
