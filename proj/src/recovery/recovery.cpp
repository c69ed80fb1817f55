#include "geoshield/recovery/recovery.hpp"

#include <sstream>

namespace geoshield::recovery {

std::uint64_t notice_id(NodeId suspect, FaultKind kind, const std::string& reason,
                        std::uint64_t round, std::uint32_t dir_src, std::uint32_t dir_dst) {
    core::ByteWriter w;
    w.u32(suspect.v);
    w.u8(kind == FaultKind::kCommission ? 0 : 1);
    w.str(reason);
    w.u64(round);
    w.u32(dir_src);
    w.u32(dir_dst);
    core::Hash128 h = core::hash128(w, /*domain=*/0x7270);
    return h.hi ^ h.lo;
}

std::string recovery_audit_csv(const std::vector<RecoveryAuditRow>& rows) {
    std::ostringstream os;
    os << "t_apply_s,observer,rp_id,suspect,kind,reason,hop\n";
    for (const RecoveryAuditRow& r : rows) {
        os << core::format_seconds(r.t_apply) << ',' << r.observer.v << ',' << r.rp_id << ','
           << r.suspect.v << ',' << fault_kind_name(r.kind) << ',' << r.reason << ','
           << static_cast<int>(r.hop) << '\n';
    }
    return os.str();
}

}  // namespace geoshield::recovery
