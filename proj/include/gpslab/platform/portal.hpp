#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/core/control.hpp"
#include "gpslab/core/fleet.hpp"
#include "gpslab/platform/history.hpp"

namespace gpslab::platform {

inline constexpr std::int64_t kFirstDeviceId = 82383;

// Platform-side integer ids, assigned in fleet order.
class DeviceRegistry {
public:
    explicit DeviceRegistry(const FleetConfig& fleet);

    std::optional<std::string> serial_for(std::int64_t device_id) const;
    std::optional<std::int64_t> id_for(std::string_view serial) const;
    const std::vector<std::pair<std::int64_t, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::int64_t, std::string>> entries_;
};

// 128-bit session tokens as 32 hex chars.
using TokenSource = std::function<std::string()>;
TokenSource random_token_source();
// Reproducible tokens for --deterministic runs. Not unguessable.
TokenSource seeded_token_source(std::uint64_t seed);

bool constant_time_equal(std::string_view a, std::string_view b) noexcept;

struct PortalSession {
    std::string session_id;
    std::string bound_serial;
};

// Web portal back end. Only login, history and password change look at the
// session; the device-control calls take none.
class Portal {
public:
    Portal(const FleetConfig& fleet, HistoryStore& store, TokenSource tokens);

    // Throws Errc::AuthFailed.
    PortalSession login(std::string_view user, std::string_view pass);
    bool is_valid(std::string_view session_id) const;
    std::optional<std::string> bound_serial(std::string_view session_id) const;

    // Any valid session reads any serial. Throws AuthFailed, NotFound.
    std::vector<TrackRecord> history(std::string_view session_id, std::string_view serial) const;

    // Throws AuthFailed, Range for an empty password.
    void change_password(std::string_view session_id, std::string new_pass);

    // Both return whether a live device took the change. Throws NotFound,
    // Range (radius), Unsupported (no engine relay).
    bool add_geofence(std::string_view serial, const Geofence& fence);
    bool set_engine(std::string_view serial, bool on);

    void set_device_control(DeviceControl* control);
    std::vector<Geofence> fences(std::string_view serial) const;

private:
    struct Account {
        std::string serial;
        Credentials creds;
        bool engine_relay = false;
    };
    const Account* account_for(std::string_view serial) const;

    HistoryStore& store_;
    TokenSource tokens_;
    mutable std::mutex mu_;
    std::vector<Account> accounts_;
    std::map<std::string, std::string, std::less<>> sessions_;  // id -> serial
    std::map<std::string, std::vector<Geofence>, std::less<>> fences_;
    DeviceControl* control_ = nullptr;
};

}  // namespace gpslab::platform
