#include "gpslab/core/model.hpp"

#include <array>
#include <utility>

#include "gpslab/core/control.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab {

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

std::string to_string(const Bytes& bytes) { return std::string(bytes.begin(), bytes.end()); }

std::string hex_upper(const Bytes& bytes) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xF]);
    }
    return out;
}

Bytes parse_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(Errc::Parse, "hex", "odd number of hex digits");
    const auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::Parse, "hex", "non-hex character");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

SmsMessage make_sms(std::string from, std::string to, std::string body) {
    if (body.size() > kMaxSmsBody) throw Error(Errc::Range, "body", "SMS body longer than 160 characters");
    return {std::move(from), std::move(to), std::move(body)};
}

namespace {

constexpr std::array<std::pair<RecordKind, std::string_view>, 7> kKindNames{{
    {RecordKind::Position, "POSITION"},
    {RecordKind::CellNbr, "CELL_NBR"},
    {RecordKind::Link, "LINK"},
    {RecordKind::SmsForward, "SMS_FORWARD"},
    {RecordKind::AgpsLogin, "AGPS_LOGIN"},
    {RecordKind::Alert, "ALERT"},
    {RecordKind::Opaque, "OPAQUE"},
}};

}  // namespace

std::string_view record_kind_name(RecordKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "?";
}

RecordKind parse_record_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    throw Error(Errc::Parse, std::string(name), "unknown record kind");
}

std::string_view fence_action_name(FenceAction a) noexcept {
    return a == FenceAction::Alert ? "ALERT" : "STOP_ENGINE";
}

}  // namespace gpslab
