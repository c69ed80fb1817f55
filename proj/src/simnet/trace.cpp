#include "geoshield/simnet/trace.hpp"

#include <cstdio>

namespace geoshield::simnet {

namespace {
const char* drop_name(DropReason r) {
    switch (r) {
        case DropReason::kDelivered: return "ok";
        case DropReason::kCopyLoss: return "copy_loss";
        case DropReason::kSenderBurst: return "sender_burst";
        case DropReason::kReceiverBurst: return "receiver_burst";
        case DropReason::kAdversary: return "adversary";
    }
    return "?";
}
}  // namespace

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
    std::string out = "seq,t_send,t_recv,src,dst,kind,bytes,status\n";
    char line[160];
    for (const TraceRecord& r : trace) {
        std::string recv = r.drop == DropReason::kDelivered ? core::format_seconds(r.t_recv) : "";
        std::snprintf(line, sizeof line, "%llu,%s,%s,%u,%u,%u,%u,%s\n",
                      static_cast<unsigned long long>(r.seq),
                      core::format_seconds(r.t_send).c_str(), recv.c_str(), r.src.v, r.dst.v,
                      unsigned(r.kind), r.wire_bytes, drop_name(r.drop));
        out += line;
    }
    return out;
}

std::uint64_t trace_digest(const std::vector<TraceRecord>& trace) {
    std::string csv = trace_to_csv(trace);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : csv) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace geoshield::simnet
