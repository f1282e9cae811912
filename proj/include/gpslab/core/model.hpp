#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/core/geo.hpp"
#include "gpslab/core/identity.hpp"
#include "gpslab/core/time.hpp"

namespace gpslab {

using Bytes = std::vector<std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_string(const Bytes& bytes);
std::string hex_upper(const Bytes& bytes);
// Throws Errc::Parse.
Bytes parse_hex(std::string_view hex);

inline constexpr std::size_t kMaxSmsBody = 160;

struct SmsMessage {
    std::string from;  // whatever the sender claims
    std::string to;
    std::string body;

    friend bool operator==(const SmsMessage&, const SmsMessage&) = default;
};

// Throws Errc::Range when the body exceeds 160 characters.
SmsMessage make_sms(std::string from, std::string to, std::string body);

enum class RecordKind {
    Position,
    CellNbr,
    Link,
    SmsForward,
    AgpsLogin,
    Alert,   // geofence exit reported by an HQ device
    Opaque,  // yy frame other than an SMS forward
};

std::string_view record_kind_name(RecordKind kind) noexcept;
// Throws Errc::Parse.
RecordKind parse_record_kind(std::string_view name);

struct TrackRecord {
    SimTimestamp ts;  // platform receive time
    std::string serial;
    RecordKind kind = RecordKind::Position;
    std::optional<GeoPosition> position;
    Bytes raw;
    std::map<std::string, std::string> meta;

    friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

}  // namespace gpslab
