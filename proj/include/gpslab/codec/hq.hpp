#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gpslab/core/geo.hpp"
#include "gpslab/core/model.hpp"
#include "gpslab/core/time.hpp"

// The ASCII "*HQ,<serial>,<variant>,...#" report family.
namespace gpslab::hq {

// Status word used for an ordinary report, and the one the emulator sends
// when a vehicle leaves an ALERT geofence.
inline constexpr std::string_view kStatusNormal = "FFFFFFFF";
inline constexpr std::string_view kStatusGeofenceAlert = "FFFFFFFD";

struct V1 {
    TimeOfDay time;
    char fix = 'A';  // 'A' valid, 'V' no fix
    WireCoordinate lat;
    WireCoordinate lon{"00000.0000", 'E'};
    std::string speed_raw = "000.0";
    std::string course_raw = "000.00";
    CivilDate date;
    std::string status_hex{kStatusNormal};

    GeoPosition position() const;
    double speed() const;
    double course() const;

    friend bool operator==(const V1&, const V1&) = default;
};

struct Nbr {
    TimeOfDay time;
    std::vector<std::string> fields_raw;
    CivilDate date;
    std::string status_hex{kStatusNormal};

    friend bool operator==(const Nbr&, const Nbr&) = default;
};

struct Link {
    TimeOfDay time;
    std::vector<std::string> fields_raw;
    CivilDate date;
    std::string status_hex{kStatusNormal};

    friend bool operator==(const Link&, const Link&) = default;
};

struct Message {
    std::string serial;
    std::variant<V1, Nbr, Link> body;

    friend bool operator==(const Message&, const Message&) = default;
};

// Renders the position through degrees_to_ddmm. Throws Errc::Range.
V1 make_v1(const GeoPosition& position, SimTimestamp ts, std::string status_hex = std::string(kStatusNormal));

// One complete frame including the trailing '#'. Throws gpslab::Error:
// UnknownVariant, FieldCount, or Parse (naming the bad field).
Message parse(std::string_view frame);
Message parse(const Bytes& frame);

// Throws IllegalSerial for a serial with ',' '#' or control characters,
// Parse for any other token that would not survive a re-parse.
std::string serialize(const Message& msg);

std::string_view variant_name(const Message& msg) noexcept;
SimTimestamp timestamp(const Message& msg);

}  // namespace gpslab::hq
