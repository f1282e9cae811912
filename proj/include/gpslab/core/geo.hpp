#pragma once

#include <string>
#include <string_view>

namespace gpslab {

enum class Axis { Latitude, Longitude };

struct GeoPosition {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt_m = 0.0;
    bool valid = true;

    friend bool operator==(const GeoPosition&, const GeoPosition&) = default;
};

bool in_range(const GeoPosition& p) noexcept;

// Throws Errc::Range when lat/lon fall outside their axis or alt is not finite.
GeoPosition make_position(double lat_deg, double lon_deg, double alt_m = 0.0, bool valid = true);

// A coordinate as it travels on the wire: "ddmm.mmmm"/"dddmm.mmmm" plus N/S/E/W.
struct WireCoordinate {
    std::string field;
    char hemisphere = 'N';

    friend bool operator==(const WireCoordinate&, const WireCoordinate&) = default;
};

// Largest error introduced by rounding to 1e-4 minutes.
inline constexpr double kDdmmQuantumDeg = 1e-4 / 60.0;

// The hemisphere selects the axis: N/S expects 2 degree digits, E/W expects 3.
// Throws Errc::Parse naming the field on malformed input.
double ddmm_to_degrees(std::string_view field, char hemisphere);
double ddmm_to_degrees(const WireCoordinate& c);

// Fixed-width canonical form. Throws Errc::Range when out of axis range.
WireCoordinate degrees_to_ddmm(double deg, Axis axis);

// Great-circle distance on a 6371 km sphere.
double haversine_m(const GeoPosition& a, const GeoPosition& b);

// "%.6f", the decimal form used by the AGPS login and the tracking API.
std::string format_decimal(double value, int decimals);

}  // namespace gpslab
