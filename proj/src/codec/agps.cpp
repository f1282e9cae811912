#include "gpslab/codec/agps.hpp"

#include <array>
#include <cmath>
#include <random>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::agps {

namespace {

constexpr std::array<std::string_view, 7> kKeys{"cmd", "user", "pwd", "lat", "lon", "alt", "pacc"};
constexpr std::string_view kCrlf = "\r\n";
constexpr std::string_view kLengthHeader = "Content-Length: ";
constexpr std::string_view kTypeHeader = "Content-Type: ";

double number(std::string_view key, std::string_view value) {
    const auto v = text::to_double(value);
    if (!v || !std::isfinite(*v)) {
        throw Error(Errc::BadNumber, std::string(key), "non-numeric " + std::string(key) + "='" + std::string(value) + "'");
    }
    return *v;
}

struct HeaderBlock {
    std::string banner;
    std::size_t content_length = 0;
    std::string content_type;
    std::size_t header_size = 0;
};

std::optional<HeaderBlock> read_headers(std::span<const std::uint8_t> bytes) {
    const std::string_view s(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const auto end = s.find("\r\n\r\n");
    if (end == std::string_view::npos) {
        if (s.size() > 4096) throw Error(Errc::Parse, "header", "header block too long");
        return std::nullopt;
    }
    const auto lines = text::split(s.substr(0, end), '\n');
    if (lines.size() != 3) throw Error(Errc::Parse, "header", "expected banner and two header lines");
    std::array<std::string_view, 3> l;
    for (std::size_t i = 0; i < 3; ++i) {
        auto line = lines[i];
        if (i < 2) {
            if (line.empty() || line.back() != '\r') throw Error(Errc::Parse, "header", "header lines end with CRLF");
            line.remove_suffix(1);
        }
        l[i] = line;
    }
    HeaderBlock h;
    h.banner = l[0];
    if (l[1].substr(0, kLengthHeader.size()) != kLengthHeader) {
        throw Error(Errc::Parse, "Content-Length", "missing Content-Length header");
    }
    const auto len_text = l[1].substr(kLengthHeader.size());
    const auto len = text::to_int(len_text);
    if (!text::all_digits(len_text) || !len || *len > (1 << 24)) {
        throw Error(Errc::Parse, "Content-Length", "bad Content-Length");
    }
    h.content_length = static_cast<std::size_t>(*len);
    if (l[2].substr(0, kTypeHeader.size()) != kTypeHeader) {
        throw Error(Errc::Parse, "Content-Type", "missing Content-Type header");
    }
    h.content_type = l[2].substr(kTypeHeader.size());
    h.header_size = end + 4;
    return h;
}

}  // namespace

Login parse_login(std::string_view line) {
    if (line.find_first_of("\r\n") != std::string_view::npos) {
        throw Error(Errc::Parse, "line", "login must be a single line");
    }
    std::array<std::optional<std::string_view>, kKeys.size()> values;
    for (auto pair : text::split(line, ';')) {
        const auto eq = pair.find('=');
        if (eq == std::string_view::npos) throw Error(Errc::Parse, std::string(pair), "expected key=value");
        const auto key = pair.substr(0, eq);
        std::size_t idx = kKeys.size();
        for (std::size_t i = 0; i < kKeys.size(); ++i) {
            if (kKeys[i] == key) idx = i;
        }
        if (idx == kKeys.size()) throw Error(Errc::UnknownKey, std::string(key), "unknown key '" + std::string(key) + "'");
        if (values[idx]) throw Error(Errc::DuplicateKey, std::string(key), "duplicate key '" + std::string(key) + "'");
        values[idx] = pair.substr(eq + 1);
    }
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
        if (!values[i]) throw Error(Errc::MissingKey, std::string(kKeys[i]), "missing key '" + std::string(kKeys[i]) + "'");
    }
    Login l;
    l.cmd = *values[0];
    l.user = *values[1];
    l.pwd = *values[2];
    const double lat = number("lat", *values[3]);
    const double lon = number("lon", *values[4]);
    const double alt = number("alt", *values[5]);
    l.pacc = number("pacc", *values[6]);
    if (lat < -90 || lat > 90) throw Error(Errc::BadNumber, "lat", "latitude out of range");
    if (lon < -180 || lon > 180) throw Error(Errc::BadNumber, "lon", "longitude out of range");
    l.position = GeoPosition{lat, lon, alt, true};
    return l;
}

std::string serialize_login(const Login& l) {
    for (const auto* field : {&l.cmd, &l.user, &l.pwd}) {
        if (field->find_first_of(";=\r\n") != std::string::npos) {
            throw Error(Errc::Parse, *field, "login values may not contain ';', '=' or line breaks");
        }
    }
    return "cmd=" + l.cmd + ";user=" + l.user + ";pwd=" + l.pwd + ";lat=" + format_decimal(l.position.lat_deg, 6) +
           ";lon=" + format_decimal(l.position.lon_deg, 6) + ";alt=" + format_decimal(l.position.alt_m, 1) +
           ";pacc=" + format_decimal(l.pacc, 2);
}

Bytes serialize_response(const Response& r) {
    if (r.banner.find_first_of("\r\n") != std::string::npos || r.content_type.find_first_of("\r\n") != std::string::npos) {
        throw Error(Errc::Parse, "header", "header values may not contain line breaks");
    }
    std::string head = r.banner;
    head += kCrlf;
    head += kLengthHeader;
    head += std::to_string(r.blob.size());
    head += kCrlf;
    head += kTypeHeader;
    head += r.content_type;
    head += kCrlf;
    head += kCrlf;
    Bytes out = to_bytes(head);
    out.insert(out.end(), r.blob.begin(), r.blob.end());
    return out;
}

std::optional<std::size_t> peek_response_size(std::span<const std::uint8_t> bytes) {
    const auto h = read_headers(bytes);
    if (!h) return std::nullopt;
    return h->header_size + h->content_length;
}

Response parse_response(std::span<const std::uint8_t> bytes) {
    const auto h = read_headers(bytes);
    if (!h) throw Error(Errc::Parse, "header", "incomplete header block");
    const std::size_t have = bytes.size() - h->header_size;
    if (have != h->content_length) {
        throw Error(Errc::LengthMismatch, "Content-Length",
                    "declared " + std::to_string(h->content_length) + ", provided " + std::to_string(have));
    }
    Response r;
    r.banner = h->banner;
    r.content_type = h->content_type;
    r.blob.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h->header_size), bytes.end());
    return r;
}

Bytes assistance_blob(const GeoPosition& position, std::size_t size) {
    const auto qlat = static_cast<std::int64_t>(std::llround(position.lat_deg * 100.0));
    const auto qlon = static_cast<std::int64_t>(std::llround(position.lon_deg * 100.0));
    std::seed_seq seed{static_cast<std::uint32_t>(qlat), static_cast<std::uint32_t>(qlat >> 32),
                       static_cast<std::uint32_t>(qlon), static_cast<std::uint32_t>(qlon >> 32)};
    std::mt19937 rng(seed);
    Bytes blob(size);
    for (auto& b : blob) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return blob;
}

}  // namespace gpslab::agps
