#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpslab {

// Every failure the lab reports is one of these codes. Parsers never throw
// anything else on bad input.
enum class Errc {
    Parse,
    Range,
    Provisioning,
    UnknownVariant,
    FieldCount,
    IllegalSerial,
    NotYy,
    Truncated,
    BadTerminator,
    BadLength,
    TrailingBytes,
    MalformedSmsForward,
    TextTooLong,
    MissingKey,
    DuplicateKey,
    UnknownKey,
    BadNumber,
    LengthMismatch,
    Config,
    Network,
    NotFound,
    Unsupported,
    AuthFailed,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    // `subject` names the offending field, key, or token.
    Error(Errc code, std::string subject, const std::string& message);
    Error(Errc code, std::string subject);

    Errc code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    Errc code_;
    std::string subject_;
};

}  // namespace gpslab
