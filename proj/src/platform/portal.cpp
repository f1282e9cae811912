#include "gpslab/platform/portal.hpp"

#include <sys/random.h>

#include <algorithm>
#include <array>
#include <memory>

#include "gpslab/core/error.hpp"

namespace gpslab::platform {

namespace {

std::string hex(const std::uint8_t* p, std::size_t n) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(kHex[p[i] >> 4]);
        out.push_back(kHex[p[i] & 0xF]);
    }
    return out;
}

}  // namespace

DeviceRegistry::DeviceRegistry(const FleetConfig& fleet) {
    std::int64_t id = kFirstDeviceId;
    for (const auto& d : fleet.devices) entries_.emplace_back(id++, d.identity.serial);
}

std::optional<std::string> DeviceRegistry::serial_for(std::int64_t device_id) const {
    for (const auto& [id, serial] : entries_) {
        if (id == device_id) return serial;
    }
    return std::nullopt;
}

std::optional<std::int64_t> DeviceRegistry::id_for(std::string_view serial) const {
    for (const auto& [id, s] : entries_) {
        if (s == serial) return id;
    }
    return std::nullopt;
}

TokenSource random_token_source() {
    return [] {
        std::array<std::uint8_t, 16> buf{};
        std::size_t got = 0;
        while (got < buf.size()) {
            const auto n = ::getrandom(buf.data() + got, buf.size() - got, 0);
            if (n < 0) throw Error(Errc::Unsupported, "getrandom", "no system randomness");
            got += static_cast<std::size_t>(n);
        }
        return hex(buf.data(), buf.size());
    };
}

TokenSource seeded_token_source(std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    auto mu = std::make_shared<std::mutex>();
    return [rng, mu] {
        std::lock_guard lock(*mu);
        std::array<std::uint8_t, 16> buf{};
        for (std::size_t i = 0; i < buf.size(); i += 8) {
            auto v = (*rng)();
            for (std::size_t j = 0; j < 8; ++j) buf[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
        }
        return hex(buf.data(), buf.size());
    };
}

bool constant_time_equal(std::string_view a, std::string_view b) noexcept {
    // Length still leaks; the content does not.
    unsigned char diff = a.size() == b.size() ? 0 : 1;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
        const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
        diff |= static_cast<unsigned char>(x ^ y);
    }
    return diff == 0;
}

Portal::Portal(const FleetConfig& fleet, HistoryStore& store, TokenSource tokens)
    : store_(store), tokens_(std::move(tokens)) {
    for (const auto& d : fleet.devices) {
        accounts_.push_back({d.identity.serial, d.identity.portal, d.engine_relay});
    }
}

const Portal::Account* Portal::account_for(std::string_view serial) const {
    for (const auto& a : accounts_) {
        if (a.serial == serial) return &a;
    }
    return nullptr;
}

PortalSession Portal::login(std::string_view user, std::string_view pass) {
    std::lock_guard lock(mu_);
    const Account* match = nullptr;
    // Every account is compared so timing does not depend on which one hits.
    for (const auto& a : accounts_) {
        const bool u = constant_time_equal(a.creds.user, user);
        const bool p = constant_time_equal(a.creds.pass, pass);
        if (u && p && !match) match = &a;
    }
    if (!match) throw Error(Errc::AuthFailed, "login", "bad user name or password");
    PortalSession s{tokens_(), match->serial};
    sessions_[s.session_id] = s.bound_serial;
    return s;
}

bool Portal::is_valid(std::string_view session_id) const {
    std::lock_guard lock(mu_);
    return sessions_.find(session_id) != sessions_.end();
}

std::optional<std::string> Portal::bound_serial(std::string_view session_id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::vector<TrackRecord> Portal::history(std::string_view session_id, std::string_view serial) const {
    {
        std::lock_guard lock(mu_);
        if (sessions_.find(session_id) == sessions_.end()) {
            throw Error(Errc::AuthFailed, "session", "no valid session");
        }
        // The bound serial is never compared with the requested one.
        if (!account_for(serial) && !store_.knows_serial(serial)) {
            throw Error(Errc::NotFound, std::string(serial), "unknown serial");
        }
    }
    return store_.for_serial(serial);
}

void Portal::change_password(std::string_view session_id, std::string new_pass) {
    if (new_pass.empty()) throw Error(Errc::Range, "password", "empty password");
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(Errc::AuthFailed, "session", "no valid session");
    for (auto& a : accounts_) {
        if (a.serial == it->second) a.creds.pass = std::move(new_pass);
    }
}

bool Portal::add_geofence(std::string_view serial, const Geofence& fence) {
    DeviceControl* control = nullptr;
    {
        std::lock_guard lock(mu_);
        if (!account_for(serial)) throw Error(Errc::NotFound, std::string(serial), "unknown serial");
        if (!(fence.radius_m > 0)) throw Error(Errc::Range, "radius", "radius must be positive");
        fences_[std::string(serial)].push_back(fence);
        control = control_;
    }
    if (!control) return false;
    try {
        control->push_geofence(std::string(serial), fence);
    } catch (const Error& e) {
        if (e.code() == Errc::NotFound) return false;
        throw;
    }
    return true;
}

bool Portal::set_engine(std::string_view serial, bool on) {
    DeviceControl* control = nullptr;
    {
        std::lock_guard lock(mu_);
        const auto* a = account_for(serial);
        if (!a) throw Error(Errc::NotFound, std::string(serial), "unknown serial");
        if (!a->engine_relay) throw Error(Errc::Unsupported, std::string(serial), "no engine relay fitted");
        control = control_;
    }
    if (!control) return false;
    try {
        control->set_engine(std::string(serial), on);
    } catch (const Error& e) {
        if (e.code() == Errc::NotFound) return false;
        throw;
    }
    return true;
}

void Portal::set_device_control(DeviceControl* control) {
    std::lock_guard lock(mu_);
    control_ = control;
}

std::vector<Geofence> Portal::fences(std::string_view serial) const {
    std::lock_guard lock(mu_);
    const auto it = fences_.find(serial);
    if (it == fences_.end()) return {};
    return it->second;
}

}  // namespace gpslab::platform
