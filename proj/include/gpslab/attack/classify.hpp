#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace gpslab::attack {

enum class Protocol { Hq, Yy, AgpsLogin, AgpsResponse, Unknown };

std::string_view protocol_name(Protocol p) noexcept;

// Content-only classification of one captured frame or segment; ports are
// not consulted. Total.
Protocol classify(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace gpslab::attack
