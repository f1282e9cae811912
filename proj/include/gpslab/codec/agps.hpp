#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gpslab/core/geo.hpp"
#include "gpslab/core/model.hpp"

// Assistance-data session: a plaintext key=value login line from the device,
// answered by a banner, two headers and an opaque blob.
namespace gpslab::agps {

inline constexpr std::string_view kBanner = "u-blox a-gps server (c) 1997-2009 u-blox AG";
inline constexpr std::string_view kContentType = "application/ubx";
inline constexpr std::size_t kDefaultBlobSize = 2856;

struct Login {
    std::string cmd = "full";
    std::string user;
    std::string pwd;
    GeoPosition position;  // decimal degrees, not ddmm
    double pacc = 100.0;

    friend bool operator==(const Login&, const Login&) = default;
};

struct Response {
    std::string banner{kBanner};
    std::string content_type{kContentType};
    Bytes blob;

    friend bool operator==(const Response&, const Response&) = default;
};

// Keys may come in any order; all seven are required. Throws gpslab::Error:
// MissingKey, DuplicateKey, UnknownKey, BadNumber, Parse.
Login parse_login(std::string_view line);

// "cmd=..;user=..;pwd=..;lat=%.6f;lon=%.6f;alt=%.1f;pacc=%.2f" (no line end).
std::string serialize_login(const Login& login);

// Banner CRLF, Content-Length, Content-Type, blank line, blob.
Bytes serialize_response(const Response& resp);

// Throws LengthMismatch when the blob size disagrees with Content-Length,
// Parse on a malformed header block.
Response parse_response(std::span<const std::uint8_t> bytes);

// Total size of a response once its header block is complete; nullopt when
// more bytes are needed. Throws Parse on a malformed header block.
std::optional<std::size_t> peek_response_size(std::span<const std::uint8_t> bytes);

// Deterministic stand-in blob keyed by the position quantized to 0.01 deg.
Bytes assistance_blob(const GeoPosition& position, std::size_t size = kDefaultBlobSize);

}  // namespace gpslab::agps
