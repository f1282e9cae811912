#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gpslab {

struct Credentials {
    std::string user;
    std::string pass;

    friend bool operator==(const Credentials&, const Credentials&) = default;
};

struct DeviceIdentity {
    std::string serial;
    std::string iccid;  // empty when not provisioned
    std::string phone;
    std::optional<std::string> master_phone;
    Credentials portal;

    friend bool operator==(const DeviceIdentity&, const DeviceIdentity&) = default;
};

// Non-empty printable ASCII without ',' or '#'.
bool is_valid_serial(std::string_view serial) noexcept;
// 20 chars: digits with an optional trailing 'F'.
bool is_valid_iccid(std::string_view iccid) noexcept;
// Optional leading '+', then 1..15 digits.
bool is_valid_phone(std::string_view phone) noexcept;

// Portal login defaults to the trailing seven characters of the serial for
// both user and password. Throws Errc::Provisioning for shorter serials.
Credentials default_credentials(std::string_view serial);

// Validates fields and fills default portal credentials. Throws Errc::Provisioning.
DeviceIdentity provision(std::string serial, std::string iccid, std::string phone,
                         std::optional<std::string> master_phone = std::nullopt);

}  // namespace gpslab
