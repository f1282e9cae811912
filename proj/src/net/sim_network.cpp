#include "gpslab/net/sim_network.hpp"

namespace gpslab::net {

namespace {

struct Link {
    std::shared_ptr<ByteSink> to_server;
    std::shared_ptr<ByteSink> to_client;
    bool open = true;
};

class SimConnection final : public Connection {
public:
    SimConnection(std::shared_ptr<Link> link, SimNetwork::Direction dir, std::uint64_t id, Endpoint server,
                  SimNetwork::Tap tap)
        : link_(std::move(link)), dir_(dir), id_(id), server_(std::move(server)), tap_(std::move(tap)) {}

    bool write(std::span<const std::uint8_t> bytes) override {
        if (!link_->open) return false;
        if (tap_) tap_(id_, server_, dir_, Bytes(bytes.begin(), bytes.end()));
        const auto target = dir_ == SimNetwork::Direction::ToServer ? link_->to_server : link_->to_client;
        if (target) target->on_data(bytes);
        return true;
    }

    void close() override {
        if (!link_->open) return;
        link_->open = false;
        // Both ends learn about the close, the initiator included.
        auto server = std::move(link_->to_server);
        auto client = std::move(link_->to_client);
        if (server) server->on_close();
        if (client) client->on_close();
    }

    bool is_open() const override { return link_->open; }

private:
    std::shared_ptr<Link> link_;
    SimNetwork::Direction dir_;
    std::uint64_t id_;
    Endpoint server_;
    SimNetwork::Tap tap_;
};

}  // namespace

void SimNetwork::listen(const Endpoint& at, SessionFactory factory) {
    std::lock_guard lock(mu_);
    listeners_[at] = std::move(factory);
}

void SimNetwork::unlisten(const Endpoint& at) {
    std::lock_guard lock(mu_);
    listeners_.erase(at);
}

bool SimNetwork::is_listening(const Endpoint& at) const {
    std::lock_guard lock(mu_);
    return listeners_.contains(at);
}

void SimNetwork::set_tap(Tap tap) {
    std::lock_guard lock(mu_);
    tap_ = std::move(tap);
}

std::shared_ptr<Connection> SimNetwork::connect(const Endpoint& to, std::shared_ptr<ByteSink> inbound) {
    SessionFactory factory;
    std::uint64_t id = 0;
    Endpoint remote{"127.0.0.1", 0};
    Tap tap;
    {
        std::lock_guard lock(mu_);
        const auto it = listeners_.find(to);
        if (it == listeners_.end()) return nullptr;
        factory = it->second;
        id = next_conn_++;
        remote.port = next_client_port_++;
        if (next_client_port_ == 0) next_client_port_ = 40000;
        tap = tap_;
    }
    auto link = std::make_shared<Link>();
    link->to_client = std::move(inbound);
    auto reply = std::make_shared<SimConnection>(link, Direction::ToClient, id, to, tap);
    link->to_server = factory(reply, remote);
    return std::make_shared<SimConnection>(link, Direction::ToServer, id, to, tap);
}

}  // namespace gpslab::net
