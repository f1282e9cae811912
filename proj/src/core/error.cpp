#include "gpslab/core/error.hpp"

namespace gpslab {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::Parse: return "Parse";
        case Errc::Range: return "Range";
        case Errc::Provisioning: return "Provisioning";
        case Errc::UnknownVariant: return "UnknownVariant";
        case Errc::FieldCount: return "FieldCount";
        case Errc::IllegalSerial: return "IllegalSerial";
        case Errc::NotYy: return "NotYy";
        case Errc::Truncated: return "Truncated";
        case Errc::BadTerminator: return "BadTerminator";
        case Errc::BadLength: return "BadLength";
        case Errc::TrailingBytes: return "TrailingBytes";
        case Errc::MalformedSmsForward: return "MalformedSmsForward";
        case Errc::TextTooLong: return "TextTooLong";
        case Errc::MissingKey: return "MissingKey";
        case Errc::DuplicateKey: return "DuplicateKey";
        case Errc::UnknownKey: return "UnknownKey";
        case Errc::BadNumber: return "BadNumber";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::Config: return "Config";
        case Errc::Network: return "Network";
        case Errc::NotFound: return "NotFound";
        case Errc::Unsupported: return "Unsupported";
        case Errc::AuthFailed: return "AuthFailed";
    }
    return "Unknown";
}

Error::Error(Errc code, std::string subject, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

Error::Error(Errc code, std::string subject)
    : std::runtime_error(std::string(errc_name(code)) + ": " + subject),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace gpslab
