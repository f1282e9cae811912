#include "gpslab/net/tcp.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "gpslab/core/error.hpp"

namespace gpslab::net {

void WaitGroup::add() {
    std::lock_guard lock(mu_);
    ++count_;
}

void WaitGroup::done() {
    std::lock_guard lock(mu_);
    if (--count_ == 0) cv_.notify_all();
}

void WaitGroup::wait() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return count_ == 0; });
}

namespace detail {

struct Socket {
    explicit Socket(int f) : fd(f) {}
    ~Socket() { ::close(fd); }

    void shutdown_both() {
        if (!closed.exchange(true)) ::shutdown(fd, SHUT_RDWR);
    }

    int fd;
    std::mutex write_mu;
    std::atomic<bool> closed{false};
};

}  // namespace detail

namespace {

using detail::Socket;

class TcpConnection final : public Connection {
public:
    explicit TcpConnection(std::shared_ptr<Socket> s) : s_(std::move(s)) {}
    ~TcpConnection() override = default;

    bool write(std::span<const std::uint8_t> bytes) override {
        std::lock_guard lock(s_->write_mu);
        if (s_->closed) return false;
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const auto n = ::send(s_->fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                s_->shutdown_both();
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    void close() override { s_->shutdown_both(); }
    bool is_open() const override { return !s_->closed; }

private:
    std::shared_ptr<Socket> s_;
};

sockaddr_in to_sockaddr(const Endpoint& e) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(e.port);
    if (::inet_pton(AF_INET, e.host.c_str(), &addr.sin_addr) != 1) {
        throw Error(Errc::Network, e.str(), "bad IPv4 address " + e.host);
    }
    return addr;
}

Endpoint from_sockaddr(const sockaddr_in& addr) {
    char buf[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
    return {buf, ntohs(addr.sin_port)};
}

void spawn_reader(std::shared_ptr<Socket> s, std::shared_ptr<ByteSink> sink, std::shared_ptr<WaitGroup> wg) {
    wg->add();
    std::thread([s = std::move(s), sink = std::move(sink), wg]() mutable {
        std::uint8_t buf[4096];
        while (true) {
            const auto n = ::recv(s->fd, buf, sizeof buf, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            if (sink) {
                try {
                    sink->on_data(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
                } catch (const std::exception&) {
                    break;
                }
            }
        }
        s->shutdown_both();
        if (sink) sink->on_close();
        sink.reset();
        s.reset();
        wg->done();
    }).detach();
}

void prune(std::vector<std::weak_ptr<Socket>>& v) {
    std::erase_if(v, [](const auto& w) { return w.expired(); });
}

}  // namespace

TcpNetwork::TcpNetwork(std::chrono::milliseconds connect_timeout)
    : timeout_(connect_timeout), readers_(std::make_shared<WaitGroup>()) {}

TcpNetwork::~TcpNetwork() { shutdown(); }

std::shared_ptr<Connection> TcpNetwork::connect(const Endpoint& to, std::shared_ptr<ByteSink> inbound) {
    const auto addr = to_sockaddr(to);
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(Errc::Network, to.str(), std::string("socket: ") + std::strerror(errno));
    auto sock = std::make_shared<Socket>(fd);

    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
    if (rc < 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        rc = ::poll(&p, 1, static_cast<int>(timeout_.count()));
        if (rc <= 0) return nullptr;
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) return nullptr;
    } else if (rc < 0) {
        return nullptr;
    }
    ::fcntl(fd, F_SETFL, flags);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    {
        std::lock_guard lock(mu_);
        prune(sockets_);
        sockets_.push_back(sock);
    }
    spawn_reader(sock, std::move(inbound), readers_);
    return std::make_shared<TcpConnection>(std::move(sock));
}

void TcpNetwork::shutdown() {
    std::vector<std::weak_ptr<Socket>> socks;
    {
        std::lock_guard lock(mu_);
        socks.swap(sockets_);
    }
    for (auto& w : socks) {
        if (auto s = w.lock()) s->shutdown_both();
    }
    readers_->wait();
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start(const Endpoint& at, SessionFactory factory) {
    if (running_) throw Error(Errc::Network, at.str(), "server already running");
    const auto addr = to_sockaddr(at);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listen_fd_ < 0) throw Error(Errc::Network, at.str(), std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 64) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error(Errc::Network, at.str(), "cannot listen on " + at.str() + ": " + why);
    }
    sockaddr_in actual{};
    socklen_t len = sizeof actual;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&actual), &len);
    bound_ = from_sockaddr(actual);
    factory_ = std::move(factory);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::accept_loop() {
    while (running_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, 100);
        if (rc <= 0) continue;
        sockaddr_in peer{};
        socklen_t len = sizeof peer;
        const int fd = ::accept4(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len, SOCK_CLOEXEC);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto sock = std::make_shared<Socket>(fd);
        {
            std::lock_guard lock(mu_);
            prune(sockets_);
            sockets_.push_back(sock);
        }
        auto reply = std::make_shared<TcpConnection>(sock);
        std::shared_ptr<ByteSink> session;
        try {
            session = factory_(reply, from_sockaddr(peer));
        } catch (const std::exception&) {
            sock->shutdown_both();
            continue;
        }
        spawn_reader(std::move(sock), std::move(session), readers_);
    }
}

void TcpServer::stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::vector<std::weak_ptr<Socket>> socks;
    {
        std::lock_guard lock(mu_);
        socks.swap(sockets_);
    }
    for (auto& w : socks) {
        if (auto s = w.lock()) s->shutdown_both();
    }
    readers_->wait();
}

int open_udp_socket(const Endpoint& at, Endpoint* bound_out) {
    const auto addr = to_sockaddr(at);
    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(Errc::Network, at.str(), std::string("socket: ") + std::strerror(errno));
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw Error(Errc::Network, at.str(), "cannot bind " + at.str() + ": " + why);
    }
    if (bound_out) {
        sockaddr_in actual{};
        socklen_t len = sizeof actual;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
        *bound_out = from_sockaddr(actual);
    }
    return fd;
}

}  // namespace gpslab::net
