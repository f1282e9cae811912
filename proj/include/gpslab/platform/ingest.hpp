#pragma once

#include <cstddef>

#include "gpslab/core/time.hpp"
#include "gpslab/net/network.hpp"
#include "gpslab/platform/history.hpp"

// Per-connection stream decoders. Each one frames the byte stream, turns
// every frame into a record and appends it; anything that does not decode
// is logged and skipped, and the connection stays up.
namespace gpslab::platform {

inline constexpr std::size_t kMaxPendingBytes = 4096;

struct IngestContext {
    HistoryStore* store = nullptr;
    EventLog* log = nullptr;
    const Clock* clock = nullptr;
};

net::SessionFactory hq_session_factory(IngestContext ctx);
net::SessionFactory yy_session_factory(IngestContext ctx);
// Answers each login line with the banner and an assistance blob.
net::SessionFactory agps_session_factory(IngestContext ctx);

}  // namespace gpslab::platform
