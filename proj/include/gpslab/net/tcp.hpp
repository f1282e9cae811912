#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "gpslab/net/network.hpp"

namespace gpslab::net {

// Counts running reader threads so owners can wait for them on shutdown.
class WaitGroup {
public:
    void add();
    void done();
    void wait();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int count_ = 0;
};

namespace detail {
struct Socket;
}

// Outbound TCP. Each connection gets a reader thread that feeds `inbound`.
class TcpNetwork final : public Network {
public:
    explicit TcpNetwork(std::chrono::milliseconds connect_timeout = std::chrono::milliseconds(2000));
    ~TcpNetwork() override;

    TcpNetwork(const TcpNetwork&) = delete;
    TcpNetwork& operator=(const TcpNetwork&) = delete;

    std::shared_ptr<Connection> connect(const Endpoint& to, std::shared_ptr<ByteSink> inbound) override;

    // Closes every connection made through this object and waits for
    // their reader threads.
    void shutdown();

private:
    std::chrono::milliseconds timeout_;
    std::mutex mu_;
    std::vector<std::weak_ptr<detail::Socket>> sockets_;
    std::shared_ptr<WaitGroup> readers_;
};

// Accept loop plus one reader thread per connection.
class TcpServer {
public:
    TcpServer() = default;
    ~TcpServer();

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    // Port 0 picks an ephemeral port; see bound(). Throws Errc::Network.
    void start(const Endpoint& at, SessionFactory factory);
    void stop();
    Endpoint bound() const { return bound_; }

private:
    void accept_loop();

    int listen_fd_ = -1;
    Endpoint bound_;
    SessionFactory factory_;
    std::thread acceptor_;
    std::atomic<bool> running_{false};
    std::mutex mu_;
    std::vector<std::weak_ptr<detail::Socket>> sockets_;
    std::shared_ptr<WaitGroup> readers_ = std::make_shared<WaitGroup>();
};

// Datagram relay helpers live with the relay; this only exposes a bound
// UDP socket for tests and the relay.
int open_udp_socket(const Endpoint& at, Endpoint* bound_out);

}  // namespace gpslab::net
