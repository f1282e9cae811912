#pragma once

#include <string>

#include "gpslab/core/fleet.hpp"
#include "gpslab/core/model.hpp"
#include "gpslab/net/network.hpp"

namespace gpslab::attack {

// Sends one V1 report for `serial` and hangs up. The serial is all the
// server checks. Returns the frame sent. Throws Errc::Network when the
// server refuses the connection, IllegalSerial / Range for bad input.
Bytes spoof_position(net::Network& network, const Endpoint& server, const std::string& serial,
                     const GeoPosition& position, SimTimestamp ts);

}  // namespace gpslab::attack
