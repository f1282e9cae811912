#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "gpslab/core/model.hpp"
#include "gpslab/net/network.hpp"

namespace gpslab::net {

// Loopback-free, single-timeline network. connect() and write() run the
// peer's handler synchronously on the caller's thread, so a run is fully
// determined by the order of calls.
class SimNetwork final : public Network {
public:
    enum class Direction { ToServer, ToClient };
    using Tap = std::function<void(std::uint64_t conn_id, const Endpoint& server, Direction, const Bytes&)>;

    // Replaces any existing listener on `at`.
    void listen(const Endpoint& at, SessionFactory factory);
    void unlisten(const Endpoint& at);
    bool is_listening(const Endpoint& at) const;

    std::shared_ptr<Connection> connect(const Endpoint& to, std::shared_ptr<ByteSink> inbound) override;

    // Observes every byte written in either direction.
    void set_tap(Tap tap);

private:
    mutable std::mutex mu_;
    std::map<Endpoint, SessionFactory> listeners_;
    std::uint64_t next_conn_ = 1;
    std::uint16_t next_client_port_ = 40000;
    Tap tap_;
};

}  // namespace gpslab::net
