#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/sms/bus.hpp"

namespace gpslab::attack {

// prefix followed by zero-padded numbers first .. first+count-1.
struct PhoneRange {
    std::string prefix;
    std::uint64_t first = 0;
    std::size_t count = 0;
    int width = 0;

    std::vector<std::string> numbers() const;
};

enum class Verdict { NotDelivered, DeliveredReplied, DeliveredSilent };

std::string_view verdict_name(Verdict v) noexcept;

struct Probe {
    std::string phone;
    Verdict verdict = Verdict::NotDelivered;
    std::optional<std::string> serial;  // from the reply or a forwarded frame
};

// Looks a phone up in traffic the attacker already collects (forwarded SMS
// at a server it controls).
using ForwardLookup = std::function<std::optional<std::string>(const std::string& phone)>;

// Sends "Status" to every number in the range from `attacker_phone`. The
// attacker number is subscribed on the bus for the duration of the run.
// Must not be called from a bus subscriber.
std::vector<Probe> enumerate_numbers(sms::SmsBus& bus, const std::string& attacker_phone, const PhoneRange& range,
                                     const ForwardLookup& lookup = {});

std::vector<Probe> hits(const std::vector<Probe>& probes);

// Serial from a "SN:<serial> ..." status reply.
std::optional<std::string> serial_from_reply(std::string_view reply);

// Caller-ID spoofing is just choosing `from`.
sms::Delivery inject_sms(sms::SmsBus& bus, const std::string& spoofed_from, const std::string& to,
                         const std::string& body);

}  // namespace gpslab::attack
