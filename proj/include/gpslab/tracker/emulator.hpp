#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpslab/codec/agps.hpp"
#include "gpslab/core/control.hpp"
#include "gpslab/core/fleet.hpp"
#include "gpslab/core/model.hpp"
#include "gpslab/sms/command.hpp"

namespace gpslab::tracker {

// Cell and link reports ride along with every Nth position report.
inline constexpr std::uint64_t kCellReportEvery = 3;

struct OutboundFrame {
    Endpoint to;
    std::string what;  // V1, NBR, LINK, ALERT, POSITION, SMS_FORWARD
    Bytes bytes;

    friend bool operator==(const OutboundFrame&, const OutboundFrame&) = default;
};

struct FenceState {
    Geofence fence;
    bool inside = false;
};

struct TrackerState {
    DeviceIdentity identity;
    ProtocolFamily protocol_family = ProtocolFamily::Hq;
    Endpoint server_addr;
    Endpoint factory_server;
    GeoPosition position;
    std::vector<GeoPosition> waypoints;
    std::size_t position_index = 0;
    bool engine_relay = false;
    bool engine_on = true;
    std::vector<FenceState> geofences;
    int report_interval_s = 30;
    std::optional<SimTimestamp> last_report;
    std::uint64_t report_count = 0;
    std::uint64_t reboots = 0;
    std::vector<std::string> nbr_fields;
    std::vector<std::string> link_fields;
    std::optional<Credentials> agps;
};

struct SmsOutcome {
    sms::Command command;
    sms::Verdict verdict = sms::Verdict::Denied;
    std::vector<OutboundFrame> frames;
    std::optional<SmsMessage> reply;
};

// One tracker as a deterministic state machine. Not thread-safe; the
// owner serializes calls. Network sends are the caller's job.
class Tracker {
public:
    // `server` is where the device reports out of the box.
    Tracker(const DeviceConfig& config, Endpoint server);

    const TrackerState& state() const noexcept { return state_; }

    // Emits a report once `report_interval_s` has passed since the last one.
    std::vector<OutboundFrame> tick(SimTimestamp now);

    SmsOutcome on_sms(const SmsMessage& msg, SimTimestamp now);

    // Login line to send to the assistance server; nullopt when the device
    // has no AGPS credentials.
    std::optional<agps::Login> run_agps_session() const;

    // Throws Errc::Range for radius <= 0.
    void add_geofence(const Geofence& fence);
    // Throws Errc::Unsupported without an engine relay.
    void set_engine(bool on);

    std::string status_reply_text() const;

private:
    std::vector<OutboundFrame> report(SimTimestamp now, bool alert);
    OutboundFrame position_frame(SimTimestamp now, bool alert) const;
    OutboundFrame sms_forward_frame(const SmsMessage& msg, SimTimestamp now) const;
    std::vector<FenceAction> evaluate_fences();

    TrackerState state_;
};

}  // namespace gpslab::tracker
