#include "gpslab/codec/hq.hpp"

#include "gpslab/core/error.hpp"
#include "gpslab/core/identity.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::hq {

namespace {

constexpr std::string_view kPrefix = "*HQ,";
constexpr std::size_t kV1Tokens = 13;
constexpr std::size_t kMinReportTokens = 6;

bool is_numeric_token(std::string_view s) {
    return !s.empty() && s.find_first_not_of("0123456789.-") == std::string_view::npos;
}

bool is_status(std::string_view s) {
    if (s.empty() || s.size() > 8) return false;
    for (char c : s) {
        if (!text::is_hex_digit(c)) return false;
    }
    return true;
}

void require(bool ok, std::string_view field, const char* what) {
    if (!ok) throw Error(Errc::Parse, std::string(field), std::string(what) + ": '" + std::string(field) + "'");
}

template <typename Report>
Report parse_report(const std::vector<std::string_view>& tok) {
    if (tok.size() < kMinReportTokens) {
        throw Error(Errc::FieldCount, std::string(tok[2]), "report needs time, date and status");
    }
    Report r;
    r.time = decode_hhmmss(tok[3]);
    for (std::size_t i = 4; i + 2 < tok.size(); ++i) {
        require(is_numeric_token(tok[i]), tok[i], "non-numeric report field");
        r.fields_raw.emplace_back(tok[i]);
    }
    r.date = decode_ddmmyy(tok[tok.size() - 2]);
    require(is_status(tok.back()), tok.back(), "status must be 1-8 hex digits");
    r.status_hex = tok.back();
    return r;
}

V1 parse_v1(const std::vector<std::string_view>& tok) {
    if (tok.size() != kV1Tokens) {
        throw Error(Errc::FieldCount, "V1",
                    "V1 needs " + std::to_string(kV1Tokens) + " fields, got " + std::to_string(tok.size()));
    }
    V1 v;
    v.time = decode_hhmmss(tok[3]);
    require(tok[4] == "A" || tok[4] == "V", tok[4], "fix flag must be A or V");
    v.fix = tok[4][0];
    require(tok[6] == "N" || tok[6] == "S", tok[6], "latitude hemisphere must be N or S");
    require(tok[8] == "E" || tok[8] == "W", tok[8], "longitude hemisphere must be E or W");
    v.lat = {std::string(tok[5]), tok[6][0]};
    v.lon = {std::string(tok[7]), tok[8][0]};
    ddmm_to_degrees(v.lat);
    ddmm_to_degrees(v.lon);
    require(is_numeric_token(tok[9]), tok[9], "non-numeric speed");
    require(is_numeric_token(tok[10]), tok[10], "non-numeric course");
    v.speed_raw = tok[9];
    v.course_raw = tok[10];
    v.date = decode_ddmmyy(tok[11]);
    require(is_status(tok[12]), tok[12], "status must be 1-8 hex digits");
    v.status_hex = tok[12];
    return v;
}

void check_status(const std::string& s) { require(is_status(s), s, "status must be 1-8 hex digits"); }

void append_report(std::string& out, const TimeOfDay& time, const std::vector<std::string>& fields,
                   const CivilDate& date, const std::string& status) {
    out += encode_hhmmss(time);
    for (const auto& f : fields) {
        require(is_numeric_token(f), f, "non-numeric report field");
        out += ',';
        out += f;
    }
    out += ',';
    out += encode_ddmmyy(date);
    check_status(status);
    out += ',';
    out += status;
}

}  // namespace

GeoPosition V1::position() const {
    return GeoPosition{ddmm_to_degrees(lat), ddmm_to_degrees(lon), 0.0, fix == 'A'};
}

double V1::speed() const { return text::to_double(speed_raw).value_or(0.0); }
double V1::course() const { return text::to_double(course_raw).value_or(0.0); }

V1 make_v1(const GeoPosition& position, SimTimestamp ts, std::string status_hex) {
    V1 v;
    v.time = ts.time_of_day();
    v.date = ts.date();
    v.fix = position.valid ? 'A' : 'V';
    v.lat = degrees_to_ddmm(position.lat_deg, Axis::Latitude);
    v.lon = degrees_to_ddmm(position.lon_deg, Axis::Longitude);
    v.status_hex = std::move(status_hex);
    return v;
}

Message parse(std::string_view frame) {
    if (frame.size() < kPrefix.size() + 1 || frame.substr(0, kPrefix.size()) != kPrefix) {
        throw Error(Errc::Parse, "prefix", "frame must begin with *HQ,");
    }
    if (frame.back() != '#') throw Error(Errc::Parse, "terminator", "frame must end with #");
    const auto body = frame.substr(1, frame.size() - 2);
    if (body.find('#') != std::string_view::npos) throw Error(Errc::Parse, "terminator", "interior #");
    const auto tok = text::split(body, ',');
    if (tok.size() < 3) throw Error(Errc::FieldCount, "header", "missing serial or variant");
    if (!is_valid_serial(tok[1])) throw Error(Errc::Parse, std::string(tok[1]), "illegal serial");

    Message msg;
    msg.serial = tok[1];
    if (tok[2] == "V1") {
        msg.body = parse_v1(tok);
    } else if (tok[2] == "NBR") {
        msg.body = parse_report<Nbr>(tok);
    } else if (tok[2] == "LINK") {
        msg.body = parse_report<Link>(tok);
    } else {
        throw Error(Errc::UnknownVariant, std::string(tok[2]), "unknown *HQ variant '" + std::string(tok[2]) + "'");
    }
    return msg;
}

Message parse(const Bytes& frame) {
    return parse(std::string_view(reinterpret_cast<const char*>(frame.data()), frame.size()));
}

std::string serialize(const Message& msg) {
    if (!is_valid_serial(msg.serial)) throw Error(Errc::IllegalSerial, msg.serial, "illegal serial");
    std::string out(kPrefix);
    out += msg.serial;
    out += ',';
    out += variant_name(msg);
    out += ',';
    if (const auto* v = std::get_if<V1>(&msg.body)) {
        require(v->fix == 'A' || v->fix == 'V', std::string(1, v->fix), "fix flag must be A or V");
        require(v->lat.hemisphere == 'N' || v->lat.hemisphere == 'S', v->lat.field, "bad lat hemisphere");
        require(v->lon.hemisphere == 'E' || v->lon.hemisphere == 'W', v->lon.field, "bad lon hemisphere");
        ddmm_to_degrees(v->lat);
        ddmm_to_degrees(v->lon);
        require(is_numeric_token(v->speed_raw), v->speed_raw, "non-numeric speed");
        require(is_numeric_token(v->course_raw), v->course_raw, "non-numeric course");
        check_status(v->status_hex);
        out += encode_hhmmss(v->time);
        out += ',';
        out += v->fix;
        out += ',' + v->lat.field + ',' + v->lat.hemisphere;
        out += ',' + v->lon.field + ',' + v->lon.hemisphere;
        out += ',' + v->speed_raw + ',' + v->course_raw + ',';
        out += encode_ddmmyy(v->date);
        out += ',' + v->status_hex;
    } else if (const auto* n = std::get_if<Nbr>(&msg.body)) {
        append_report(out, n->time, n->fields_raw, n->date, n->status_hex);
    } else {
        const auto& l = std::get<Link>(msg.body);
        append_report(out, l.time, l.fields_raw, l.date, l.status_hex);
    }
    out += '#';
    return out;
}

std::string_view variant_name(const Message& msg) noexcept {
    switch (msg.body.index()) {
        case 0: return "V1";
        case 1: return "NBR";
        default: return "LINK";
    }
}

SimTimestamp timestamp(const Message& msg) {
    return std::visit([](const auto& b) { return SimTimestamp::from_civil(b.date, b.time); }, msg.body);
}

}  // namespace gpslab::hq
