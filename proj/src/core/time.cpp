#include "gpslab/core/time.hpp"

#include <chrono>
#include <cstdio>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab {

namespace {

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[m - 1];
}

int two_digits(std::string_view s, std::size_t at) {
    return (s[at] - '0') * 10 + (s[at + 1] - '0');
}

}  // namespace

bool is_valid_date(const CivilDate& d) noexcept {
    return d.year >= 1 && d.year <= 9999 && d.month >= 1 && d.month <= 12 && d.day >= 1 &&
           d.day <= days_in_month(d.year, d.month);
}

bool is_valid_time(const TimeOfDay& t) noexcept {
    return t.hour >= 0 && t.hour < 24 && t.minute >= 0 && t.minute < 60 && t.second >= 0 &&
           t.second < 60;
}

SimTimestamp SimTimestamp::from_civil(const CivilDate& date, const TimeOfDay& time) {
    if (!is_valid_date(date)) throw Error(Errc::Range, "date", "impossible calendar date");
    if (!is_valid_time(time)) throw Error(Errc::Range, "time", "impossible time of day");
    const auto days = days_from_civil(date.year, static_cast<unsigned>(date.month),
                                      static_cast<unsigned>(date.day));
    return SimTimestamp(days * 86400 + time.hour * 3600 + time.minute * 60 + time.second);
}

CivilDate SimTimestamp::date() const {
    std::int64_t days = seconds_ / 86400;
    if (seconds_ % 86400 < 0) --days;
    return civil_from_days(days);
}

TimeOfDay SimTimestamp::time_of_day() const {
    std::int64_t secs = seconds_ % 86400;
    if (secs < 0) secs += 86400;
    return {static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
            static_cast<int>(secs % 60)};
}

std::string SimTimestamp::iso8601() const {
    const auto d = date();
    const auto t = time_of_day();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                  t.hour, t.minute, t.second);
    return buf;
}

std::string SimTimestamp::api_format() const {
    auto s = iso8601();
    s[10] = ' ';
    s.pop_back();
    return s;
}

SimTimestamp SimTimestamp::parse_iso8601(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ
    static constexpr std::string_view kShape = "dddd-dd-ddTdd:dd:ddZ";
    if (text.size() != kShape.size()) throw Error(Errc::Parse, std::string(text), "bad ISO-8601 timestamp");
    for (std::size_t i = 0; i < kShape.size(); ++i) {
        const bool ok = kShape[i] == 'd' ? (text[i] >= '0' && text[i] <= '9') : text[i] == kShape[i];
        if (!ok) throw Error(Errc::Parse, std::string(text), "bad ISO-8601 timestamp");
    }
    const CivilDate d{two_digits(text, 0) * 100 + two_digits(text, 2), two_digits(text, 5),
                      two_digits(text, 8)};
    const TimeOfDay t{two_digits(text, 11), two_digits(text, 14), two_digits(text, 17)};
    if (!is_valid_date(d) || !is_valid_time(t)) {
        throw Error(Errc::Parse, std::string(text), "impossible ISO-8601 timestamp");
    }
    return from_civil(d, t);
}

std::string encode_hhmmss(const TimeOfDay& t) {
    if (!is_valid_time(t)) throw Error(Errc::Range, "time", "impossible time of day");
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d%02d%02d", t.hour, t.minute, t.second);
    return buf;
}

std::string encode_ddmmyy(const CivilDate& d) {
    if (!is_valid_date(d) || d.year < 2000 || d.year > 2099) {
        throw Error(Errc::Range, "date", "date not representable with a two-digit year");
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d%02d%02d", d.day, d.month, d.year % 100);
    return buf;
}

TimeOfDay decode_hhmmss(std::string_view s) {
    if (s.size() != 6 || !text::all_digits(s)) throw Error(Errc::Parse, std::string(s), "time must be HHMMSS");
    TimeOfDay t{two_digits(s, 0), two_digits(s, 2), two_digits(s, 4)};
    if (!is_valid_time(t)) throw Error(Errc::Parse, std::string(s), "impossible time of day");
    return t;
}

CivilDate decode_ddmmyy(std::string_view s) {
    if (s.size() != 6 || !text::all_digits(s)) throw Error(Errc::Parse, std::string(s), "date must be DDMMYY");
    CivilDate d{2000 + two_digits(s, 4), two_digits(s, 2), two_digits(s, 0)};
    if (!is_valid_date(d)) throw Error(Errc::Parse, std::string(s), "impossible date");
    return d;
}

std::string encode_yymmddhhmmss(SimTimestamp ts) {
    const auto d = ts.date();
    const auto t = ts.time_of_day();
    if (d.year < 2000 || d.year > 2099) {
        throw Error(Errc::Range, "date", "date not representable with a two-digit year");
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d%02d%02d%02d%02d%02d", d.year % 100, d.month, d.day, t.hour,
                  t.minute, t.second);
    return buf;
}

SimTimestamp decode_yymmddhhmmss(std::string_view s) {
    if (s.size() != 12 || !text::all_digits(s)) {
        throw Error(Errc::Parse, std::string(s), "datetime must be YYMMDDHHMMSS");
    }
    const CivilDate d{2000 + two_digits(s, 0), two_digits(s, 2), two_digits(s, 4)};
    const TimeOfDay t{two_digits(s, 6), two_digits(s, 8), two_digits(s, 10)};
    if (!is_valid_date(d) || !is_valid_time(t)) {
        throw Error(Errc::Parse, std::string(s), "impossible datetime");
    }
    return SimTimestamp::from_civil(d, t);
}

SimTimestamp SimClock::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

void SimClock::advance(std::int64_t seconds) {
    std::lock_guard lock(mu_);
    now_ = now_.plus(seconds);
}

void SimClock::set(SimTimestamp t) {
    std::lock_guard lock(mu_);
    now_ = t;
}

SimTimestamp SystemClock::now() const {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::system_clock::now().time_since_epoch());
    return SimTimestamp(secs.count());
}

}  // namespace gpslab
