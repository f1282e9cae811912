#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>

namespace gpslab {

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

struct TimeOfDay {
    int hour = 0;
    int minute = 0;
    int second = 0;

    friend bool operator==(const TimeOfDay&, const TimeOfDay&) = default;
};

bool is_valid_date(const CivilDate& d) noexcept;
bool is_valid_time(const TimeOfDay& t) noexcept;

// UTC instant with one-second resolution.
class SimTimestamp {
public:
    constexpr SimTimestamp() = default;
    constexpr explicit SimTimestamp(std::int64_t unix_seconds) : seconds_(unix_seconds) {}

    // Throws Errc::Range on an impossible calendar value.
    static SimTimestamp from_civil(const CivilDate& date, const TimeOfDay& time);

    std::int64_t unix_seconds() const noexcept { return seconds_; }
    CivilDate date() const;
    TimeOfDay time_of_day() const;

    SimTimestamp plus(std::int64_t seconds) const { return SimTimestamp(seconds_ + seconds); }

    // "2019-01-09T10:54:17Z"
    std::string iso8601() const;
    // "2019-01-09 10:54:17"
    std::string api_format() const;
    // Throws Errc::Parse.
    static SimTimestamp parse_iso8601(std::string_view text);

    friend auto operator<=>(const SimTimestamp&, const SimTimestamp&) = default;

private:
    std::int64_t seconds_ = 0;
};

// Wire encodings. Two-digit years map to 2000..2099.
std::string encode_hhmmss(const TimeOfDay& t);
std::string encode_ddmmyy(const CivilDate& d);
TimeOfDay decode_hhmmss(std::string_view text);
CivilDate decode_ddmmyy(std::string_view text);
std::string encode_yymmddhhmmss(SimTimestamp ts);
SimTimestamp decode_yymmddhhmmss(std::string_view text);

class Clock {
public:
    virtual ~Clock() = default;
    virtual SimTimestamp now() const = 0;
};

// Deterministic clock; moves only when told to.
class SimClock final : public Clock {
public:
    // Receive time of the captured SMS forward, 2019-01-09T10:54:17Z.
    static constexpr SimTimestamp kDefaultStart{1547031257};

    explicit SimClock(SimTimestamp start = kDefaultStart) : now_(start) {}

    SimTimestamp now() const override;
    void advance(std::int64_t seconds);
    void set(SimTimestamp t);

private:
    mutable std::mutex mu_;
    SimTimestamp now_;
};

class SystemClock final : public Clock {
public:
    SimTimestamp now() const override;
};

}  // namespace gpslab
