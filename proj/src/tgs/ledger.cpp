#include "geoshield/tgs/ledger.hpp"

#include <sstream>

namespace geoshield::tgs {

std::string tgs_event_csv(const std::vector<TgsEventRow>& rows) {
    std::ostringstream os;
    os << "t_s,event,node,counterpart,score_after\n";
    for (const TgsEventRow& r : rows) {
        const char* k = r.kind == TgsEventRow::Kind::kSuspicious ? "suspicious"
                        : r.kind == TgsEventRow::Kind::kFlag     ? "flag"
                                                                 : "reassign";
        os << core::format_seconds(r.t) << ',' << k << ',' << r.node.v << ','
           << r.counterpart.v << ',' << r.score_after << '\n';
    }
    return os.str();
}

}  // namespace geoshield::tgs
