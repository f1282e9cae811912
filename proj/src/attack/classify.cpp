#include "gpslab/attack/classify.hpp"

#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/yy.hpp"

namespace gpslab::attack {

namespace {

bool has_prefix(std::span<const std::uint8_t> b, std::string_view p) {
    if (b.size() < p.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (b[i] != static_cast<std::uint8_t>(p[i])) return false;
    }
    return true;
}

}  // namespace

std::string_view protocol_name(Protocol p) noexcept {
    switch (p) {
        case Protocol::Hq: return "HQ";
        case Protocol::Yy: return "YY";
        case Protocol::AgpsLogin: return "AGPS_LOGIN";
        case Protocol::AgpsResponse: return "AGPS_RESPONSE";
        case Protocol::Unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

Protocol classify(std::span<const std::uint8_t> b) noexcept {
    if (has_prefix(b, "*HQ,")) return Protocol::Hq;
    if (b.size() >= yy::kFrameOverhead + 1 && b[0] == yy::kMagic && b[1] == yy::kMagic) {
        // Length field must account for the whole segment, CR LF last.
        const std::size_t total = ((std::size_t{b[2]} << 8) | b[3]) + yy::kFrameOverhead;
        if (total == b.size() && b[b.size() - 2] == '\r' && b.back() == '\n') return Protocol::Yy;
    }
    if (has_prefix(b, "cmd=")) return Protocol::AgpsLogin;
    if (has_prefix(b, agps::kBanner)) return Protocol::AgpsResponse;
    return Protocol::Unknown;
}

}  // namespace gpslab::attack
