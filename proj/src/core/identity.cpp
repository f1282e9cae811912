#include "gpslab/core/identity.hpp"

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab {

bool is_valid_serial(std::string_view serial) noexcept {
    if (serial.empty()) return false;
    for (char c : serial) {
        if (c < 0x20 || c > 0x7E || c == ',' || c == '#') return false;
    }
    return true;
}

bool is_valid_iccid(std::string_view iccid) noexcept {
    if (iccid.size() != 20) return false;
    const auto body = iccid.back() == 'F' ? iccid.substr(0, 19) : iccid;
    return text::all_digits(body);
}

bool is_valid_phone(std::string_view phone) noexcept {
    if (!phone.empty() && phone.front() == '+') phone.remove_prefix(1);
    return phone.size() >= 1 && phone.size() <= 15 && text::all_digits(phone);
}

Credentials default_credentials(std::string_view serial) {
    if (serial.size() < 7) {
        throw Error(Errc::Provisioning, std::string(serial), "serial shorter than 7 characters");
    }
    const std::string tail(serial.substr(serial.size() - 7));
    return {tail, tail};
}

DeviceIdentity provision(std::string serial, std::string iccid, std::string phone,
                         std::optional<std::string> master_phone) {
    if (!is_valid_serial(serial)) throw Error(Errc::Provisioning, serial, "illegal serial");
    if (!iccid.empty() && !is_valid_iccid(iccid)) throw Error(Errc::Provisioning, iccid, "illegal ICCID");
    if (!is_valid_phone(phone)) throw Error(Errc::Provisioning, phone, "illegal phone number");
    if (master_phone && !is_valid_phone(*master_phone)) {
        throw Error(Errc::Provisioning, *master_phone, "illegal master phone number");
    }
    DeviceIdentity id;
    id.portal = default_credentials(serial);
    id.serial = std::move(serial);
    id.iccid = std::move(iccid);
    id.phone = std::move(phone);
    id.master_phone = std::move(master_phone);
    return id;
}

}  // namespace gpslab
