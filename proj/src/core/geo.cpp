#include "gpslab/core/geo.hpp"

#include <cmath>
#include <cstdio>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab {

namespace {

// 1e-4 minute units per degree.
constexpr long long kUnitsPerDegree = 600000;

int axis_limit(Axis axis) { return axis == Axis::Latitude ? 90 : 180; }
std::size_t degree_digits(Axis axis) { return axis == Axis::Latitude ? 2 : 3; }

}  // namespace

bool in_range(const GeoPosition& p) noexcept {
    return p.lat_deg >= -90.0 && p.lat_deg <= 90.0 && p.lon_deg >= -180.0 && p.lon_deg <= 180.0 &&
           std::isfinite(p.alt_m);
}

GeoPosition make_position(double lat_deg, double lon_deg, double alt_m, bool valid) {
    GeoPosition p{lat_deg, lon_deg, alt_m, valid};
    if (!in_range(p)) throw Error(Errc::Range, "position", "latitude/longitude out of range");
    return p;
}

double ddmm_to_degrees(std::string_view field, char hemisphere) {
    Axis axis;
    switch (hemisphere) {
        case 'N':
        case 'S': axis = Axis::Latitude; break;
        case 'E':
        case 'W': axis = Axis::Longitude; break;
        default:
            throw Error(Errc::Parse, std::string(1, hemisphere), "hemisphere must be N, S, E or W");
    }
    const std::size_t dd = degree_digits(axis);
    const auto err = [&](const char* why) {
        return Error(Errc::Parse, std::string(field), std::string("coordinate field '") +
                                                           std::string(field) + "': " + why);
    };
    if (field.size() != dd + 7 || field[dd + 2] != '.') throw err("wrong digit count");
    const auto deg_part = field.substr(0, dd);
    const auto min_part = field.substr(dd, 2);
    const auto frac_part = field.substr(dd + 3, 4);
    if (!text::all_digits(deg_part) || !text::all_digits(min_part) || !text::all_digits(frac_part)) {
        throw err("non-digit character");
    }
    const long long degrees = *text::to_int(deg_part);
    const long long minutes = *text::to_int(min_part);
    const long long frac = *text::to_int(frac_part);
    if (minutes >= 60) throw err("minutes >= 60");
    const long long units = degrees * kUnitsPerDegree + minutes * 10000 + frac;
    if (units > axis_limit(axis) * kUnitsPerDegree) throw err("degrees out of range");
    const double value = static_cast<double>(degrees) + static_cast<double>(minutes * 10000 + frac) /
                                                            static_cast<double>(kUnitsPerDegree);
    return (hemisphere == 'S' || hemisphere == 'W') ? -value : value;
}

double ddmm_to_degrees(const WireCoordinate& c) { return ddmm_to_degrees(c.field, c.hemisphere); }

WireCoordinate degrees_to_ddmm(double deg, Axis axis) {
    const int limit = axis_limit(axis);
    if (!std::isfinite(deg) || deg < -limit || deg > limit) {
        throw Error(Errc::Range, axis == Axis::Latitude ? "lat" : "lon", "value out of axis range");
    }
    const long long units = std::llround(std::fabs(deg) * static_cast<double>(kUnitsPerDegree));
    const long long degrees = units / kUnitsPerDegree;
    const long long rem = units % kUnitsPerDegree;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%0*lld%02lld.%04lld", static_cast<int>(degree_digits(axis)),
                  degrees, rem / 10000, rem % 10000);
    const bool negative = deg < 0 && units > 0;
    char hemi;
    if (axis == Axis::Latitude) {
        hemi = negative ? 'S' : 'N';
    } else {
        hemi = negative ? 'W' : 'E';
    }
    return {buf, hemi};
}

double haversine_m(const GeoPosition& a, const GeoPosition& b) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kRad = 3.14159265358979323846 / 180.0;
    const double dlat = (b.lat_deg - a.lat_deg) * kRad;
    const double dlon = (b.lon_deg - a.lon_deg) * kRad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.lat_deg * kRad) * std::cos(b.lat_deg * kRad) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

std::string format_decimal(double value, int decimals) {
    if (value == 0.0) value = 0.0;  // drop the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    // Rounding a tiny negative can still print "-0.000".
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

}  // namespace gpslab
