#include "gpslab/attack/spoof.hpp"

#include "gpslab/codec/hq.hpp"
#include "gpslab/core/error.hpp"

namespace gpslab::attack {

Bytes spoof_position(net::Network& network, const Endpoint& server, const std::string& serial,
                     const GeoPosition& position, SimTimestamp ts) {
    const hq::Message msg{serial, hq::make_v1(position, ts)};
    const auto frame = to_bytes(hq::serialize(msg));
    auto conn = network.connect(server, nullptr);
    if (!conn) throw Error(Errc::Network, server.str(), "connection refused by " + server.str());
    const bool ok = conn->write(frame);
    conn->close();
    if (!ok) throw Error(Errc::Network, server.str(), "connection reset by " + server.str());
    return frame;
}

}  // namespace gpslab::attack
