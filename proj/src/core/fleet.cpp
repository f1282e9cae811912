#include "gpslab/core/fleet.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab {

std::string_view protocol_family_name(ProtocolFamily f) noexcept {
    return f == ProtocolFamily::Hq ? "HQ" : "YY";
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

bool is_ipv4_literal(std::string_view s) noexcept {
    const auto parts = text::split(s, '.');
    if (parts.size() != 4) return false;
    for (auto p : parts) {
        if (p.empty() || p.size() > 3 || !text::all_digits(p)) return false;
        if (p.size() > 1 && p.front() == '0') return false;
        if (*text::to_int(p) > 255) return false;
    }
    return true;
}

Endpoint parse_endpoint(std::string_view s) {
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos) throw Error(Errc::Parse, std::string(s), "endpoint must be host:port");
    const auto host = s.substr(0, colon);
    const auto port = text::to_int(s.substr(colon + 1));
    if (!is_ipv4_literal(host) || !port || *port < 1 || *port > 65535) {
        throw Error(Errc::Parse, std::string(s), "endpoint must be an IPv4 literal and a port 1..65535");
    }
    return {std::string(host), static_cast<std::uint16_t>(*port)};
}

const DeviceConfig* FleetConfig::find(std::string_view serial) const {
    for (const auto& d : devices) {
        if (d.identity.serial == serial) return &d;
    }
    return nullptr;
}

void validate(const FleetConfig& config) {
    std::set<std::string> serials;
    std::set<std::string> phones;
    for (const auto& d : config.devices) {
        if (!serials.insert(d.identity.serial).second) {
            throw Error(Errc::Config, d.identity.serial, "duplicate serial " + d.identity.serial);
        }
        if (!phones.insert(d.identity.phone).second) {
            throw Error(Errc::Config, d.identity.phone, "duplicate phone " + d.identity.phone);
        }
        if (d.report_interval_s < 1) {
            throw Error(Errc::Config, d.identity.serial, "report interval must be >= 1");
        }
    }
    const auto& p = config.platform;
    const std::set<std::uint16_t> ports{p.hq_port, p.yy_port, p.agps_port, p.http_port};
    if (ports.size() != 4) throw Error(Errc::Config, "platform", "platform ports must be distinct");
}

namespace {

[[noreturn]] void fail(int line_no, const std::string& msg) {
    throw Error(Errc::Config, "line " + std::to_string(line_no), "line " + std::to_string(line_no) + ": " + msg);
}

GeoPosition parse_point(std::string_view s, int line_no) {
    const auto parts = text::split(s, ',');
    if (parts.size() < 2 || parts.size() > 3) fail(line_no, "position must be lat,lon[,alt]: " + std::string(s));
    const auto lat = text::to_double(parts[0]);
    const auto lon = text::to_double(parts[1]);
    const auto alt = parts.size() == 3 ? text::to_double(parts[2]) : std::optional<double>(0.0);
    if (!lat || !lon || !alt) fail(line_no, "bad number in position: " + std::string(s));
    try {
        return make_position(*lat, *lon, *alt);
    } catch (const Error& e) {
        fail(line_no, e.what());
    }
}

std::uint16_t parse_port(std::string_view s, int line_no) {
    const auto v = text::to_int(s);
    if (!v || *v < 1 || *v > 65535) fail(line_no, "bad port: " + std::string(s));
    return static_cast<std::uint16_t>(*v);
}

bool parse_flag(std::string_view s, int line_no) {
    if (text::iequals(s, "yes") || text::iequals(s, "true") || s == "1") return true;
    if (text::iequals(s, "no") || text::iequals(s, "false") || s == "0") return false;
    fail(line_no, "expected yes/no: " + std::string(s));
}

std::vector<std::string> parse_fields(std::string_view s) {
    std::vector<std::string> out;
    for (auto f : text::split(s, ',')) out.emplace_back(f);
    return out;
}

}  // namespace

bool parse_fleet_stanza(std::string_view line, int line_no, FleetConfig& config) {
    const auto tokens = text::tokenize(line);
    if (!tokens) fail(line_no, "unterminated quote");
    if (tokens->empty()) return false;
    const std::string& head = (*tokens)[0];
    if (head != "platform" && head != "device") return false;

    std::vector<std::pair<std::string, std::string>> kv;
    std::set<std::string> seen;
    for (std::size_t i = 1; i < tokens->size(); ++i) {
        const auto& tok = (*tokens)[i];
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) fail(line_no, "expected key=value, got '" + tok + "'");
        auto key = tok.substr(0, eq);
        if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
        kv.emplace_back(std::move(key), tok.substr(eq + 1));
    }

    if (head == "platform") {
        auto& p = config.platform;
        for (const auto& [k, v] : kv) {
            if (k == "hq_port") p.hq_port = parse_port(v, line_no);
            else if (k == "yy_port") p.yy_port = parse_port(v, line_no);
            else if (k == "agps_port") p.agps_port = parse_port(v, line_no);
            else if (k == "http_port") p.http_port = parse_port(v, line_no);
            else if (k == "bind") {
                if (!is_ipv4_literal(v)) fail(line_no, "bind must be an IPv4 literal");
                p.bind = v;
            } else fail(line_no, "unknown platform key '" + k + "'");
        }
        return true;
    }

    DeviceConfig d;
    std::string serial, iccid, phone;
    std::optional<std::string> master;
    std::optional<std::string> agps_user, agps_pwd;
    bool have_home = false;
    for (const auto& [k, v] : kv) {
        if (k == "serial") serial = v;
        else if (k == "iccid") iccid = v;
        else if (k == "phone") phone = v;
        else if (k == "master") master = v;
        else if (k == "protocol") {
            if (text::iequals(v, "HQ")) d.protocol_family = ProtocolFamily::Hq;
            else if (text::iequals(v, "YY")) d.protocol_family = ProtocolFamily::Yy;
            else fail(line_no, "protocol must be HQ or YY");
        } else if (k == "home") {
            d.home = parse_point(v, line_no);
            have_home = true;
        } else if (k == "waypoints") {
            for (auto pt : text::split(v, ';')) {
                if (!pt.empty()) d.waypoints.push_back(parse_point(pt, line_no));
            }
        } else if (k == "interval") {
            const auto n = text::to_int(v);
            if (!n || *n < 1 || *n > 86400) fail(line_no, "interval must be 1..86400 seconds");
            d.report_interval_s = static_cast<int>(*n);
        } else if (k == "engine_relay") d.engine_relay = parse_flag(v, line_no);
        else if (k == "agps_user") agps_user = v;
        else if (k == "agps_pwd") agps_pwd = v;
        else if (k == "nbr") d.nbr_fields = parse_fields(v);
        else if (k == "link") d.link_fields = parse_fields(v);
        else fail(line_no, "unknown device key '" + k + "'");
    }
    if (serial.empty()) fail(line_no, "device needs serial=");
    if (phone.empty()) fail(line_no, "device needs phone=");
    if (agps_user.has_value() != agps_pwd.has_value()) fail(line_no, "agps_user and agps_pwd go together");
    try {
        d.identity = provision(serial, iccid, phone, master);
    } catch (const Error& e) {
        fail(line_no, e.what());
    }
    if (d.protocol_family == ProtocolFamily::Yy && (serial.size() != 15 || !text::all_digits(serial))) {
        fail(line_no, "YY devices need a 15-digit serial");
    }
    if (d.protocol_family == ProtocolFamily::Yy && iccid.empty()) fail(line_no, "YY devices need iccid=");
    if (!have_home && !d.waypoints.empty()) d.home = d.waypoints.front();
    if (agps_user) d.agps = Credentials{*agps_user, *agps_pwd};
    for (const auto* fields : {&d.nbr_fields, &d.link_fields}) {
        for (const auto& f : *fields) {
            if (f.empty() || f.find_first_not_of("0123456789.-") != std::string::npos) {
                fail(line_no, "nbr/link fields must be numeric tokens");
            }
        }
    }
    config.devices.push_back(std::move(d));
    return true;
}

FleetConfig parse_fleet_config(std::string_view text_in) {
    FleetConfig config;
    int line_no = 0;
    for (auto line : text::split(text_in, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!parse_fleet_stanza(line, line_no, config)) {
            fail(line_no, "expected 'platform' or 'device' stanza");
        }
    }
    validate(config);
    return config;
}

FleetConfig load_fleet_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Config, path, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fleet_config(ss.str());
}

}  // namespace gpslab
