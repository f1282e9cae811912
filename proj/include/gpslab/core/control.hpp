#pragma once

#include <string>
#include <string_view>

#include "gpslab/core/geo.hpp"

namespace gpslab {

enum class FenceAction { Alert, StopEngine };

std::string_view fence_action_name(FenceAction a) noexcept;

struct Geofence {
    GeoPosition center;
    double radius_m = 100.0;
    FenceAction action = FenceAction::Alert;

    friend bool operator==(const Geofence&, const Geofence&) = default;
};

// Platform-to-device configuration channel.
class DeviceControl {
public:
    virtual ~DeviceControl() = default;
    // Throws Errc::NotFound when no live device has this serial,
    // Errc::Range for a non-positive radius.
    virtual void push_geofence(const std::string& serial, const Geofence& fence) = 0;
    // Throws Errc::NotFound, or Errc::Unsupported without an engine relay.
    virtual void set_engine(const std::string& serial, bool on) = 0;
};

}  // namespace gpslab
