#include "gpslab/tracker/emulator.hpp"

#include "gpslab/codec/hq.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::tracker {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Tracker::Tracker(const DeviceConfig& config, Endpoint server) {
    state_.identity = config.identity;
    state_.protocol_family = config.protocol_family;
    state_.server_addr = server;
    state_.factory_server = std::move(server);
    state_.position = config.home;
    state_.waypoints = config.waypoints;
    state_.engine_relay = config.engine_relay;
    state_.report_interval_s = config.report_interval_s;
    state_.nbr_fields = config.nbr_fields;
    state_.link_fields = config.link_fields;
    state_.agps = config.agps;
}

std::vector<OutboundFrame> Tracker::tick(SimTimestamp now) {
    if (state_.last_report &&
        now.unix_seconds() - state_.last_report->unix_seconds() < state_.report_interval_s) {
        return {};
    }
    state_.last_report = now;
    ++state_.report_count;
    if (!state_.waypoints.empty()) {
        state_.position = state_.waypoints[state_.position_index];
        state_.position_index = (state_.position_index + 1) % state_.waypoints.size();
    }
    bool alert = false;
    for (auto action : evaluate_fences()) {
        if (action == FenceAction::Alert) {
            alert = true;
        } else if (state_.engine_relay) {
            state_.engine_on = false;
        }
    }
    return report(now, alert);
}

std::vector<FenceAction> Tracker::evaluate_fences() {
    std::vector<FenceAction> exits;
    for (auto& f : state_.geofences) {
        const bool inside = haversine_m(state_.position, f.fence.center) <= f.fence.radius_m;
        if (f.inside && !inside) exits.push_back(f.fence.action);
        f.inside = inside;
    }
    return exits;
}

std::vector<OutboundFrame> Tracker::report(SimTimestamp now, bool alert) {
    std::vector<OutboundFrame> out;
    out.push_back(position_frame(now, false));
    if (state_.protocol_family == ProtocolFamily::Hq && state_.report_count % kCellReportEvery == 0) {
        const auto ts_time = now.time_of_day();
        const auto ts_date = now.date();
        hq::Message nbr{state_.identity.serial, hq::Nbr{ts_time, state_.nbr_fields, ts_date, std::string(hq::kStatusNormal)}};
        hq::Message link{state_.identity.serial, hq::Link{ts_time, state_.link_fields, ts_date, std::string(hq::kStatusNormal)}};
        out.push_back({state_.server_addr, "NBR", to_bytes(hq::serialize(nbr))});
        out.push_back({state_.server_addr, "LINK", to_bytes(hq::serialize(link))});
    }
    if (alert) out.push_back(position_frame(now, true));
    return out;
}

OutboundFrame Tracker::position_frame(SimTimestamp now, bool alert) const {
    const auto& p = state_.position;
    if (state_.protocol_family == ProtocolFamily::Hq) {
        hq::Message msg{state_.identity.serial,
                        hq::make_v1(p, now, std::string(alert ? hq::kStatusGeofenceAlert : hq::kStatusNormal))};
        return {state_.server_addr, alert ? "ALERT" : "V1", to_bytes(hq::serialize(msg))};
    }
    // serial, iccid, tag, '~', datetime, LF, then "lat,lon,fix" in ASCII.
    std::string payload = state_.identity.serial + state_.identity.iccid;
    payload += '\x01';
    payload += '~';
    payload += encode_yymmddhhmmss(now);
    payload += '\n';
    payload += format_decimal(p.lat_deg, 6) + "," + format_decimal(p.lon_deg, 6) + "," + (p.valid ? "A" : "V");
    if (alert) payload += ",GEOFENCE";
    const auto frame = yy::make_opaque_frame(alert ? yy::kTypeEmulatorAlert : yy::kTypeEmulatorPosition,
                                             to_bytes(payload));
    return {state_.server_addr, alert ? "ALERT" : "POSITION", yy::serialize(frame)};
}

OutboundFrame Tracker::sms_forward_frame(const SmsMessage& msg, SimTimestamp now) const {
    yy::SmsForward fwd;
    fwd.serial = state_.identity.serial;
    fwd.iccid = state_.identity.iccid;
    fwd.datetime = now;
    fwd.sender = msg.from.empty() ? "unknown" : msg.from;
    for (auto& c : fwd.sender) {
        if (c < 0x20 || c > 0x7E) c = '?';
    }
    fwd.text = msg.body.substr(0, yy::kMaxText);
    return {state_.server_addr, "SMS_FORWARD", yy::serialize(yy::make_frame(std::move(fwd)))};
}

SmsOutcome Tracker::on_sms(const SmsMessage& msg, SimTimestamp now) {
    SmsOutcome out;
    out.command = sms::parse_command(msg.body);
    out.verdict = sms::authorize(out.command, msg.from, state_.identity);
    if (msg.to != state_.identity.phone) return out;

    if (out.verdict == sms::Verdict::Allowed) {
        std::visit(Overloaded{
                       [&](const sms::cmd::Reg& r) {
                           state_.server_addr = Endpoint{r.server_ip, r.port.value_or(state_.factory_server.port)};
                       },
                       [&](const sms::cmd::Status&) {
                           out.reply = SmsMessage{state_.identity.phone, msg.from, status_reply_text()};
                           if (state_.protocol_family == ProtocolFamily::Hq) {
                               out.frames.push_back(position_frame(now, false));
                           }
                       },
                       [&](const sms::cmd::Reboot&) {
                           state_.last_report.reset();
                           state_.report_count = 0;
                           ++state_.reboots;
                       },
                       [&](const sms::cmd::FactoryCode&) {
                           state_.server_addr = state_.factory_server;
                           state_.identity.master_phone.reset();
                           state_.geofences.clear();
                       },
                       [&](const sms::cmd::ImeiSet& s) {
                           // yy frames carry a fixed 15-digit serial.
                           if (state_.protocol_family == ProtocolFamily::Yy && s.imei.size() != 15) return;
                           state_.identity.serial = s.imei;
                       },
                       [&](const sms::cmd::Unknown&) {},
                   },
                   out.command.kind);
    }
    // Every SMS the modem sees is copied to the server, commands included.
    if (state_.protocol_family == ProtocolFamily::Yy) out.frames.push_back(sms_forward_frame(msg, now));
    return out;
}

std::optional<agps::Login> Tracker::run_agps_session() const {
    if (!state_.agps) return std::nullopt;
    agps::Login login;
    login.cmd = "full";
    login.user = state_.agps->user;
    login.pwd = state_.agps->pass;
    login.position = state_.position;
    login.pacc = 100.0;
    return login;
}

void Tracker::add_geofence(const Geofence& fence) {
    if (!(fence.radius_m > 0)) throw Error(Errc::Range, "radius", "geofence radius must be > 0");
    FenceState fs{fence, haversine_m(state_.position, fence.center) <= fence.radius_m};
    state_.geofences.push_back(fs);
}

void Tracker::set_engine(bool on) {
    if (!state_.engine_relay) {
        throw Error(Errc::Unsupported, state_.identity.serial, "device has no engine relay");
    }
    state_.engine_on = on;
}

std::string Tracker::status_reply_text() const {
    const auto& p = state_.position;
    return "SN:" + state_.identity.serial + " GPS:" + (p.valid ? "A" : "V") + " LAT:" + format_decimal(p.lat_deg, 6) +
           " LON:" + format_decimal(p.lon_deg, 6) + " ENGINE:" + (state_.engine_on ? "ON" : "OFF") +
           " SERVER:" + state_.server_addr.str();
}

}  // namespace gpslab::tracker
