#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "gpslab/core/model.hpp"
#include "gpslab/core/time.hpp"

// Binary "yy" frames: 'y' 'y', big-endian u16 length L, L body bytes
// (type .. check inclusive), CR LF.
namespace gpslab::yy {

inline constexpr std::uint8_t kMagic = 0x79;
inline constexpr std::uint8_t kTypeSmsForward = 0xF2;
// Frame types the emulator uses for its own position and alert reports.
// They travel as Opaque frames; the platform does not interpret them.
inline constexpr std::uint8_t kTypeEmulatorPosition = 0x10;
inline constexpr std::uint8_t kTypeEmulatorAlert = 0x11;
inline constexpr std::size_t kFrameOverhead = 6;  // magic 2 + length 2 + CRLF 2
inline constexpr std::size_t kMaxText = 255;

struct SmsForward {
    std::string serial;  // 15 ASCII digits
    std::string iccid;   // 20 chars
    std::uint8_t tag1 = 0x01;
    SimTimestamp datetime;
    std::string sender;
    std::string text;
    std::array<std::uint8_t, 3> trailer{0x00, 0x05, 0x30};

    friend bool operator==(const SmsForward&, const SmsForward&) = default;
};

struct Opaque {
    Bytes payload;  // bytes between type and check

    friend bool operator==(const Opaque&, const Opaque&) = default;
};

struct Frame {
    std::uint8_t frame_type = kTypeSmsForward;
    std::variant<SmsForward, Opaque> payload;
    std::uint8_t check = 0;

    // Type through check, exactly as carried on the wire.
    Bytes body_raw() const;

    friend bool operator==(const Frame&, const Frame&) = default;
};

// Throws gpslab::Error: NotYy, Truncated, BadTerminator, BadLength,
// TrailingBytes, MalformedSmsForward.
Frame parse(std::span<const std::uint8_t> bytes);

// Throws TextTooLong, MalformedSmsForward, BadLength.
Bytes serialize(const Frame& frame);

// Total size of the frame starting at bytes[0], or nullopt if the 4-byte
// header is not complete yet. Does not check the magic.
std::optional<std::size_t> peek_frame_size(std::span<const std::uint8_t> bytes);

// The check algorithm is unknown; frames we generate carry the XOR of the
// body bytes before the check. This is a stand-in, not the device's algorithm.
std::uint8_t placeholder_check(std::span<const std::uint8_t> body_before_check);

Frame make_frame(SmsForward fwd);
Frame make_opaque_frame(std::uint8_t type, Bytes payload);

// Leading 15-digit serial of an opaque payload ("YY.I.[S/N]...").
std::optional<std::string> opaque_serial(const Opaque& o);

// --- check-byte solver --------------------------------------------------

enum class CheckAlgorithm {
    Xor,
    NotXor,
    Sum,
    NegSum,
    NotSum,
    Crc8,          // poly 0x07
    Crc8Itu,       // poly 0x07, xorout 0x55
    Crc8Maxim,     // poly 0x31 reflected
    Crc8Rohc,      // poly 0x07 reflected, init 0xFF
    Crc8Cdma2000,  // poly 0x9B, init 0xFF
    Crc8DvbS2,     // poly 0xD5
    Crc8SaeJ1850,  // poly 0x1D, init 0xFF, xorout 0xFF
    Crc8Wcdma,     // poly 0x9B reflected
};

inline constexpr std::array kAllCheckAlgorithms{
    CheckAlgorithm::Xor,       CheckAlgorithm::NotXor,       CheckAlgorithm::Sum,
    CheckAlgorithm::NegSum,    CheckAlgorithm::NotSum,       CheckAlgorithm::Crc8,
    CheckAlgorithm::Crc8Itu,   CheckAlgorithm::Crc8Maxim,    CheckAlgorithm::Crc8Rohc,
    CheckAlgorithm::Crc8Cdma2000, CheckAlgorithm::Crc8DvbS2, CheckAlgorithm::Crc8SaeJ1850,
    CheckAlgorithm::Crc8Wcdma,
};

// Where the checked span starts; it always ends just before the check byte.
enum class CheckRange { FromMagic, FromLength, FromType, FromPayload };

struct CheckSolution {
    CheckRange range;
    CheckAlgorithm algorithm;

    friend bool operator==(const CheckSolution&, const CheckSolution&) = default;
};

std::string_view check_algorithm_name(CheckAlgorithm a) noexcept;
std::string_view check_range_name(CheckRange r) noexcept;
std::uint8_t compute_check(CheckAlgorithm a, std::span<const std::uint8_t> data);

// Tries every (structural range, algorithm) pair against a known-good
// complete frame and returns the first that reproduces its check byte;
// nullopt means Unknown.
std::optional<CheckSolution> solve_check_algorithm(std::span<const std::uint8_t> frame_bytes);

}  // namespace gpslab::yy
