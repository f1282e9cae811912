#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gpslab/codec/agps.hpp"
#include "gpslab/core/control.hpp"
#include "gpslab/core/fleet.hpp"
#include "gpslab/net/network.hpp"
#include "gpslab/sms/bus.hpp"
#include "gpslab/tracker/emulator.hpp"

namespace gpslab::tracker {

struct HostStats {
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_dropped = 0;  // server unreachable; nothing is buffered
    std::uint64_t sms_received = 0;
    std::uint64_t agps_sessions = 0;
};

struct SmsEvent {
    SimTimestamp ts;
    SmsMessage msg;
    std::string command;
    sms::Verdict verdict = sms::Verdict::Denied;
    bool replied = false;
    bool backdoor = false;  // undocumented command; logged as such
};

// Wires one Tracker to the network, the SMS bus and a clock. All public
// methods are thread-safe.
class TrackerHost {
public:
    using FrameObserver = std::function<void(const std::string& serial, const OutboundFrame&, bool delivered)>;

    TrackerHost(const DeviceConfig& config, const PlatformPorts& platform, net::Network& network, sms::SmsBus& bus,
                const Clock& clock);
    ~TrackerHost();

    TrackerHost(const TrackerHost&) = delete;
    TrackerHost& operator=(const TrackerHost&) = delete;

    // Registers the device's phone number on the bus.
    void attach();
    void detach();

    // Reports if the interval has elapsed at clock.now().
    void step();

    void add_geofence(const Geofence& fence);
    void set_engine(bool on);

    // Opens a session with the assistance server, sends the plaintext login
    // and reads back the blob. nullopt when the device has no credentials or
    // the server is unreachable.
    std::optional<agps::Response> run_agps_session();

    TrackerState state() const;
    HostStats stats() const;
    std::vector<SmsEvent> sms_events() const;
    std::string serial() const;
    std::string phone() const;

    void set_observer(FrameObserver observer);

private:
    void handle_sms(const SmsMessage& msg);
    void send_frames(const std::vector<OutboundFrame>& frames);
    bool send_one(const OutboundFrame& frame);

    mutable std::mutex mu_;
    Tracker tracker_;
    net::Network& network_;
    sms::SmsBus& bus_;
    const Clock& clock_;
    Endpoint agps_server_;
    std::string phone_;
    std::map<Endpoint, std::shared_ptr<net::Connection>> connections_;
    HostStats stats_;
    std::vector<SmsEvent> sms_events_;
    FrameObserver observer_;
    bool attached_ = false;
};

// All emulated devices of a fleet; also the platform's control channel to them.
class FleetHost final : public DeviceControl {
public:
    FleetHost(const FleetConfig& config, net::Network& network, sms::SmsBus& bus, const Clock& clock);

    void attach_all();
    void step_all();

    // Lookup by the device's current serial; nullptr if none.
    TrackerHost* find(const std::string& serial);
    std::vector<TrackerHost*> hosts();

    void push_geofence(const std::string& serial, const Geofence& fence) override;
    void set_engine(const std::string& serial, bool on) override;

private:
    std::vector<std::unique_ptr<TrackerHost>> hosts_;
};

}  // namespace gpslab::tracker
