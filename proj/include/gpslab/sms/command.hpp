#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "gpslab/core/identity.hpp"

namespace gpslab::sms {

namespace cmd {

// "*reg <ip>[ <port>]": point the device at another management server.
struct Reg {
    std::string server_ip;
    std::optional<std::uint16_t> port;
    friend bool operator==(const Reg&, const Reg&) = default;
};
struct Status {
    friend bool operator==(const Status&, const Status&) = default;
};
// Firmware strings "*reboot*", "*3646655*" and "imeiset".
struct Reboot {
    friend bool operator==(const Reboot&, const Reboot&) = default;
};
struct FactoryCode {
    friend bool operator==(const FactoryCode&, const FactoryCode&) = default;
};
struct ImeiSet {
    std::string imei;
    friend bool operator==(const ImeiSet&, const ImeiSet&) = default;
};
struct Unknown {
    std::string body;
    friend bool operator==(const Unknown&, const Unknown&) = default;
};

}  // namespace cmd

struct Command {
    std::variant<cmd::Reg, cmd::Status, cmd::Reboot, cmd::FactoryCode, cmd::ImeiSet, cmd::Unknown> kind;

    bool requires_master() const noexcept;
    // Reboot, FactoryCode and ImeiSet only exist in the firmware, not the manual.
    bool is_backdoor() const noexcept;
    std::string_view name() const noexcept;

    friend bool operator==(const Command&, const Command&) = default;
};

// Total: anything unrecognized (including a malformed *reg) is Unknown.
Command parse_command(std::string_view body);

enum class Verdict { Allowed, Denied };

std::string_view verdict_name(Verdict v) noexcept;

// Master-number check on the claimed caller ID only. An unset master number
// leaves every command open.
Verdict authorize(const Command& cmd, std::string_view sender, const DeviceIdentity& identity);

}  // namespace gpslab::sms
