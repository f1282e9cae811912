#include "gpslab/codec/yy.hpp"

#include "gpslab/core/error.hpp"
#include "gpslab/core/identity.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::yy {

namespace {

constexpr std::uint8_t kTilde = 0x7E;
constexpr std::uint8_t kLf = 0x0A;
constexpr std::uint8_t kSenderEnd = 0x01;
constexpr std::size_t kSerialLen = 15;
constexpr std::size_t kIccidLen = 20;
constexpr std::size_t kDatetimeLen = 12;

[[noreturn]] void malformed(const std::string& field, const std::string& why) {
    throw Error(Errc::MalformedSmsForward, field, "SMS forward " + field + ": " + why);
}

std::string take(std::span<const std::uint8_t> b, std::size_t at, std::size_t n) {
    return std::string(reinterpret_cast<const char*>(b.data() + at), n);
}

// Payload = bytes between type and check.
SmsForward decode_sms_forward(std::span<const std::uint8_t> p) {
    SmsForward f;
    std::size_t at = 0;
    const auto need = [&](std::size_t n, const char* field) {
        if (at + n > p.size()) malformed(field, "payload too short");
    };
    need(kSerialLen, "serial");
    f.serial = take(p, at, kSerialLen);
    if (!text::all_digits(f.serial)) malformed("serial", "must be 15 ASCII digits");
    at += kSerialLen;
    need(kIccidLen, "iccid");
    f.iccid = take(p, at, kIccidLen);
    if (!is_valid_iccid(f.iccid)) malformed("iccid", "must be 20 digits with optional trailing F");
    at += kIccidLen;
    need(2, "tag1");
    f.tag1 = p[at++];
    if (p[at++] != kTilde) malformed("separator", "expected 0x7E");
    need(kDatetimeLen, "datetime");
    try {
        f.datetime = decode_yymmddhhmmss(take(p, at, kDatetimeLen));
    } catch (const Error& e) {
        malformed("datetime", e.what());
    }
    at += kDatetimeLen;
    need(1, "separator");
    if (p[at++] != kLf) malformed("separator", "expected 0x0A");
    const auto start = at;
    while (at < p.size() && p[at] != kSenderEnd) {
        if (p[at] < 0x20 || p[at] > 0x7E) malformed("sender", "non-printable byte");
        ++at;
    }
    if (at == p.size()) malformed("sender", "missing 0x01 terminator");
    if (at == start) malformed("sender", "empty");
    f.sender = take(p, start, at - start);
    ++at;
    need(1, "text_len");
    const std::size_t len = p[at++];
    need(len, "text");
    f.text = take(p, at, len);
    at += len;
    need(3, "trailer");
    for (auto& t : f.trailer) t = p[at++];
    if (at != p.size()) malformed("trailer", "unexpected bytes after trailer");
    return f;
}

Bytes encode_sms_forward(const SmsForward& f) {
    if (f.text.size() > kMaxText) throw Error(Errc::TextTooLong, "text", "text longer than 255 bytes");
    if (f.serial.size() != kSerialLen || !text::all_digits(f.serial)) malformed("serial", "must be 15 ASCII digits");
    if (!is_valid_iccid(f.iccid)) malformed("iccid", "must be 20 digits with optional trailing F");
    if (f.sender.empty()) malformed("sender", "empty");
    for (char c : f.sender) {
        if (c < 0x20 || c > 0x7E) malformed("sender", "non-printable byte");
    }
    Bytes out;
    out.insert(out.end(), f.serial.begin(), f.serial.end());
    out.insert(out.end(), f.iccid.begin(), f.iccid.end());
    out.push_back(f.tag1);
    out.push_back(kTilde);
    const auto dt = encode_yymmddhhmmss(f.datetime);
    out.insert(out.end(), dt.begin(), dt.end());
    out.push_back(kLf);
    out.insert(out.end(), f.sender.begin(), f.sender.end());
    out.push_back(kSenderEnd);
    out.push_back(static_cast<std::uint8_t>(f.text.size()));
    out.insert(out.end(), f.text.begin(), f.text.end());
    out.insert(out.end(), f.trailer.begin(), f.trailer.end());
    return out;
}

std::uint8_t reflect8(std::uint8_t v) {
    std::uint8_t r = 0;
    for (int i = 0; i < 8; ++i) {
        if (v & (1u << i)) r |= static_cast<std::uint8_t>(0x80u >> i);
    }
    return r;
}

std::uint8_t crc8(std::span<const std::uint8_t> data, std::uint8_t poly, std::uint8_t init, bool reflected,
                  std::uint8_t xorout) {
    std::uint8_t crc = init;
    for (auto byte : data) {
        crc ^= reflected ? reflect8(byte) : byte;
        for (int i = 0; i < 8; ++i) {
            crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ poly) : static_cast<std::uint8_t>(crc << 1);
        }
    }
    if (reflected) crc = reflect8(crc);
    return crc ^ xorout;
}

}  // namespace

Bytes Frame::body_raw() const {
    Bytes body{frame_type};
    if (const auto* f = std::get_if<SmsForward>(&payload)) {
        const auto p = encode_sms_forward(*f);
        body.insert(body.end(), p.begin(), p.end());
    } else {
        const auto& o = std::get<Opaque>(payload);
        body.insert(body.end(), o.payload.begin(), o.payload.end());
    }
    body.push_back(check);
    return body;
}

Frame parse(std::span<const std::uint8_t> b) {
    if (b.empty() || b[0] != kMagic || (b.size() >= 2 && b[1] != kMagic)) {
        throw Error(Errc::NotYy, "magic", "frame must begin with 'yy'");
    }
    if (b.size() < 4) throw Error(Errc::Truncated, "header", "incomplete header");
    const std::size_t len = static_cast<std::size_t>(b[2]) << 8 | b[3];
    if (len + kFrameOverhead > b.size()) {
        throw Error(Errc::Truncated, "length",
                    "declared length " + std::to_string(len) + " exceeds " + std::to_string(b.size() - 4) +
                        " available bytes");
    }
    if (b[4 + len] != 0x0D || b[5 + len] != 0x0A) throw Error(Errc::BadTerminator, "terminator", "missing CRLF");
    if (b.size() != len + kFrameOverhead) {
        throw Error(Errc::TrailingBytes, "terminator", "bytes after CRLF");
    }
    if (len < 2) throw Error(Errc::BadLength, "length", "body must hold at least type and check");

    const auto body = b.subspan(4, len);
    Frame frame;
    frame.frame_type = body.front();
    frame.check = body.back();
    const auto payload = body.subspan(1, len - 2);
    if (frame.frame_type == kTypeSmsForward) {
        frame.payload = decode_sms_forward(payload);
    } else {
        frame.payload = Opaque{Bytes(payload.begin(), payload.end())};
    }
    return frame;
}

Bytes serialize(const Frame& frame) {
    if (frame.frame_type == kTypeSmsForward && !std::holds_alternative<SmsForward>(frame.payload)) {
        malformed("type", "type 0xF2 must carry an SMS forward");
    }
    if (frame.frame_type != kTypeSmsForward && std::holds_alternative<SmsForward>(frame.payload)) {
        malformed("type", "SMS forward payload needs type 0xF2");
    }
    const auto body = frame.body_raw();
    if (body.size() > 0xFFFF) throw Error(Errc::BadLength, "length", "body exceeds 65535 bytes");
    Bytes out{kMagic, kMagic, static_cast<std::uint8_t>(body.size() >> 8),
              static_cast<std::uint8_t>(body.size() & 0xFF)};
    out.insert(out.end(), body.begin(), body.end());
    out.push_back(0x0D);
    out.push_back(0x0A);
    return out;
}

std::optional<std::size_t> peek_frame_size(std::span<const std::uint8_t> b) {
    if (b.size() < 4) return std::nullopt;
    return (static_cast<std::size_t>(b[2]) << 8 | b[3]) + kFrameOverhead;
}

std::uint8_t placeholder_check(std::span<const std::uint8_t> body_before_check) {
    return compute_check(CheckAlgorithm::Xor, body_before_check);
}

Frame make_frame(SmsForward fwd) {
    Frame f;
    f.frame_type = kTypeSmsForward;
    f.payload = std::move(fwd);
    auto body = f.body_raw();
    body.pop_back();
    f.check = placeholder_check(body);
    return f;
}

Frame make_opaque_frame(std::uint8_t type, Bytes payload) {
    if (type == kTypeSmsForward) malformed("type", "0xF2 is reserved for SMS forwards");
    Frame f;
    f.frame_type = type;
    f.payload = Opaque{std::move(payload)};
    auto body = f.body_raw();
    body.pop_back();
    f.check = placeholder_check(body);
    return f;
}

std::optional<std::string> opaque_serial(const Opaque& o) {
    if (o.payload.size() < kSerialLen) return std::nullopt;
    std::string s(o.payload.begin(), o.payload.begin() + kSerialLen);
    if (!text::all_digits(s)) return std::nullopt;
    return s;
}

std::string_view check_algorithm_name(CheckAlgorithm a) noexcept {
    switch (a) {
        case CheckAlgorithm::Xor: return "xor";
        case CheckAlgorithm::NotXor: return "not-xor";
        case CheckAlgorithm::Sum: return "sum8";
        case CheckAlgorithm::NegSum: return "neg-sum8";
        case CheckAlgorithm::NotSum: return "not-sum8";
        case CheckAlgorithm::Crc8: return "crc8";
        case CheckAlgorithm::Crc8Itu: return "crc8-itu";
        case CheckAlgorithm::Crc8Maxim: return "crc8-maxim";
        case CheckAlgorithm::Crc8Rohc: return "crc8-rohc";
        case CheckAlgorithm::Crc8Cdma2000: return "crc8-cdma2000";
        case CheckAlgorithm::Crc8DvbS2: return "crc8-dvb-s2";
        case CheckAlgorithm::Crc8SaeJ1850: return "crc8-sae-j1850";
        case CheckAlgorithm::Crc8Wcdma: return "crc8-wcdma";
    }
    return "?";
}

std::string_view check_range_name(CheckRange r) noexcept {
    switch (r) {
        case CheckRange::FromMagic: return "from-magic";
        case CheckRange::FromLength: return "from-length";
        case CheckRange::FromType: return "from-type";
        case CheckRange::FromPayload: return "from-payload";
    }
    return "?";
}

std::uint8_t compute_check(CheckAlgorithm a, std::span<const std::uint8_t> data) {
    std::uint8_t x = 0;
    std::uint8_t s = 0;
    for (auto b : data) {
        x ^= b;
        s = static_cast<std::uint8_t>(s + b);
    }
    switch (a) {
        case CheckAlgorithm::Xor: return x;
        case CheckAlgorithm::NotXor: return static_cast<std::uint8_t>(~x);
        case CheckAlgorithm::Sum: return s;
        case CheckAlgorithm::NegSum: return static_cast<std::uint8_t>(-s);
        case CheckAlgorithm::NotSum: return static_cast<std::uint8_t>(~s);
        case CheckAlgorithm::Crc8: return crc8(data, 0x07, 0x00, false, 0x00);
        case CheckAlgorithm::Crc8Itu: return crc8(data, 0x07, 0x00, false, 0x55);
        case CheckAlgorithm::Crc8Maxim: return crc8(data, 0x31, 0x00, true, 0x00);
        case CheckAlgorithm::Crc8Rohc: return crc8(data, 0x07, 0xFF, true, 0x00);
        case CheckAlgorithm::Crc8Cdma2000: return crc8(data, 0x9B, 0xFF, false, 0x00);
        case CheckAlgorithm::Crc8DvbS2: return crc8(data, 0xD5, 0x00, false, 0x00);
        case CheckAlgorithm::Crc8SaeJ1850: return crc8(data, 0x1D, 0xFF, false, 0xFF);
        case CheckAlgorithm::Crc8Wcdma: return crc8(data, 0x9B, 0x00, true, 0x00);
    }
    return 0;
}

std::optional<CheckSolution> solve_check_algorithm(std::span<const std::uint8_t> frame_bytes) {
    // magic(2) len(2) type(1) ... check(1) CR LF
    if (frame_bytes.size() < kFrameOverhead + 2) return std::nullopt;
    const std::size_t check_at = frame_bytes.size() - 3;
    const std::uint8_t target = frame_bytes[check_at];
    constexpr std::array<std::pair<CheckRange, std::size_t>, 4> kStarts{{
        {CheckRange::FromMagic, 0},
        {CheckRange::FromLength, 2},
        {CheckRange::FromType, 4},
        {CheckRange::FromPayload, 5},
    }};
    for (const auto& [range, start] : kStarts) {
        if (start > check_at) continue;
        const auto span = frame_bytes.subspan(start, check_at - start);
        for (auto algo : kAllCheckAlgorithms) {
            if (compute_check(algo, span) == target) return CheckSolution{range, algo};
        }
    }
    return std::nullopt;
}

}  // namespace gpslab::yy
