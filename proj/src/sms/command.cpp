#include "gpslab/sms/command.hpp"

#include "gpslab/core/fleet.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::sms {

namespace {

std::optional<cmd::Reg> parse_reg(std::string_view s) {
    // '*' [spaces] "reg" spaces ip [spaces port]
    if (s.empty() || s.front() != '*') return std::nullopt;
    s.remove_prefix(1);
    s = text::trim(s);
    if (!text::starts_with_icase(s, "reg")) return std::nullopt;
    s.remove_prefix(3);
    if (s.empty() || (s.front() != ' ' && s.front() != '\t')) return std::nullopt;
    const auto tokens = text::split_ws(s);
    if (tokens.empty() || tokens.size() > 2) return std::nullopt;
    if (!is_ipv4_literal(tokens[0])) return std::nullopt;
    cmd::Reg reg{std::string(tokens[0]), std::nullopt};
    if (tokens.size() == 2) {
        if (!text::all_digits(tokens[1])) return std::nullopt;
        const auto port = text::to_int(tokens[1]);
        if (!port || *port < 1 || *port > 65535) return std::nullopt;
        reg.port = static_cast<std::uint16_t>(*port);
    }
    return reg;
}

std::optional<cmd::ImeiSet> parse_imeiset(std::string_view s) {
    if (!text::starts_with_icase(s, "imeiset")) return std::nullopt;
    s.remove_prefix(7);
    if (s.empty() || (s.front() != ' ' && s.front() != '\t')) return std::nullopt;
    s = text::trim(s);
    if (s.size() < 14 || s.size() > 16 || !text::all_digits(s)) return std::nullopt;
    return cmd::ImeiSet{std::string(s)};
}

}  // namespace

bool Command::requires_master() const noexcept {
    return !std::holds_alternative<cmd::Status>(kind) && !std::holds_alternative<cmd::Unknown>(kind);
}

bool Command::is_backdoor() const noexcept {
    return std::holds_alternative<cmd::Reboot>(kind) || std::holds_alternative<cmd::FactoryCode>(kind) ||
           std::holds_alternative<cmd::ImeiSet>(kind);
}

std::string_view Command::name() const noexcept {
    switch (kind.index()) {
        case 0: return "REG";
        case 1: return "STATUS";
        case 2: return "REBOOT";
        case 3: return "FACTORY_CODE";
        case 4: return "IMEISET";
        default: return "UNKNOWN";
    }
}

Command parse_command(std::string_view body) {
    const auto s = text::trim(body);
    if (auto reg = parse_reg(s)) return {*reg};
    if (text::iequals(s, "status")) return {cmd::Status{}};
    if (text::iequals(s, "*reboot*")) return {cmd::Reboot{}};
    if (s == "*3646655*") return {cmd::FactoryCode{}};
    if (auto imei = parse_imeiset(s)) return {*imei};
    return {cmd::Unknown{std::string(body)}};
}

std::string_view verdict_name(Verdict v) noexcept { return v == Verdict::Allowed ? "ALLOWED" : "DENIED"; }

Verdict authorize(const Command& cmd, std::string_view sender, const DeviceIdentity& identity) {
    if (!cmd.requires_master()) return Verdict::Allowed;
    if (!identity.master_phone) return Verdict::Allowed;
    return sender == *identity.master_phone ? Verdict::Allowed : Verdict::Denied;
}

}  // namespace gpslab::sms
