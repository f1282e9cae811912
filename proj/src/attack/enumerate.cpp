#include "gpslab/attack/enumerate.hpp"

#include <map>
#include <mutex>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::attack {

std::vector<std::string> PhoneRange::numbers() const {
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto n = std::to_string(first + i);
        if (static_cast<int>(n.size()) < width) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
        out.push_back(prefix + n);
    }
    return out;
}

std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::NotDelivered: return "NOT_DELIVERED";
        case Verdict::DeliveredReplied: return "DELIVERED_REPLIED";
        case Verdict::DeliveredSilent: return "DELIVERED_SILENT";
    }
    return "?";
}

std::optional<std::string> serial_from_reply(std::string_view reply) {
    for (auto tok : text::split_ws(reply)) {
        if (tok.starts_with("SN:") && tok.size() > 3) return std::string(tok.substr(3));
    }
    return std::nullopt;
}

std::vector<Probe> enumerate_numbers(sms::SmsBus& bus, const std::string& attacker_phone, const PhoneRange& range,
                                     const ForwardLookup& lookup) {
    std::mutex mu;
    std::map<std::string, std::string> replies;
    bus.subscribe(attacker_phone, [&](const SmsMessage& m) {
        std::lock_guard lock(mu);
        replies.emplace(m.from, m.body);
    });

    std::vector<Probe> out;
    for (const auto& phone : range.numbers()) {
        Probe p{phone, Verdict::NotDelivered, std::nullopt};
        if (phone == attacker_phone) {
            out.push_back(std::move(p));
            continue;
        }
        const auto d = bus.send(make_sms(attacker_phone, phone, "Status"));
        bus.wait_idle();
        if (d == sms::Delivery::Delivered) {
            std::optional<std::string> reply;
            {
                std::lock_guard lock(mu);
                if (auto it = replies.find(phone); it != replies.end()) reply = it->second;
            }
            if (reply) {
                p.verdict = Verdict::DeliveredReplied;
                p.serial = serial_from_reply(*reply);
            } else if (auto s = lookup ? lookup(phone) : std::nullopt) {
                p.verdict = Verdict::DeliveredReplied;
                p.serial = s;
            } else {
                p.verdict = Verdict::DeliveredSilent;
            }
        }
        out.push_back(std::move(p));
    }
    bus.unsubscribe(attacker_phone);
    return out;
}

std::vector<Probe> hits(const std::vector<Probe>& probes) {
    std::vector<Probe> out;
    for (const auto& p : probes) {
        if (p.verdict == Verdict::DeliveredReplied) out.push_back(p);
    }
    return out;
}

sms::Delivery inject_sms(sms::SmsBus& bus, const std::string& spoofed_from, const std::string& to,
                         const std::string& body) {
    return bus.send(make_sms(spoofed_from, to, body));
}

}  // namespace gpslab::attack
