#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/core/geo.hpp"
#include "gpslab/core/identity.hpp"

namespace gpslab {

enum class ProtocolFamily { Hq, Yy };

std::string_view protocol_family_name(ProtocolFamily f) noexcept;

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    std::string str() const;
    friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

// Parses "a.b.c.d:port". Throws Errc::Parse.
Endpoint parse_endpoint(std::string_view text);
bool is_ipv4_literal(std::string_view text) noexcept;

struct DeviceConfig {
    DeviceIdentity identity;
    ProtocolFamily protocol_family = ProtocolFamily::Hq;
    GeoPosition home;
    std::vector<GeoPosition> waypoints;
    int report_interval_s = 30;
    bool engine_relay = false;
    std::optional<Credentials> agps;
    // Opaque cell and link report fields.
    std::vector<std::string> nbr_fields{"310", "26", "02", "1", "1000", "10", "23"};
    std::vector<std::string> link_fields{"22", "0", "6", "0", "0"};
};

struct PlatformPorts {
    std::string bind = "127.0.0.1";
    std::uint16_t hq_port = 8011;
    std::uint16_t yy_port = 8841;
    std::uint16_t agps_port = 56447;
    std::uint16_t http_port = 8080;
};

struct FleetConfig {
    std::vector<DeviceConfig> devices;
    PlatformPorts platform;

    const DeviceConfig* find(std::string_view serial) const;
};

// Serials and phones unique, ports distinct, intervals >= 1.
// Throws Errc::Config.
void validate(const FleetConfig& config);

// Line-oriented grammar:
//
//   # comment
//   platform hq_port=8011 yy_port=8841 agps_port=56447 http_port=8080 bind=127.0.0.1
//   device serial=S protocol=HQ|YY phone=+P [iccid=I] [master=+M]
//          [home=lat,lon[,alt]] [waypoints=lat,lon;lat,lon;...] [interval=N]
//          [engine_relay=yes|no] [agps_user=U agps_pwd=P]
//          [nbr=a,b,c] [link=a,b,c]
//
// Each stanza is one line of whitespace-separated key=value tokens. Errors
// are Errc::Config with the message prefixed by "line N: ".
FleetConfig parse_fleet_config(std::string_view text);

// Parses a single `platform` or `device` stanza into `config`; returns false
// when the line is not a fleet stanza. Used by the scenario parser.
bool parse_fleet_stanza(std::string_view line, int line_no, FleetConfig& config);

FleetConfig load_fleet_config(const std::string& path);

}  // namespace gpslab
