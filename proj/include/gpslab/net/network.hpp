#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include "gpslab/core/fleet.hpp"

namespace gpslab::net {

// Receives one direction of a byte stream.
class ByteSink {
public:
    virtual ~ByteSink() = default;
    virtual void on_data(std::span<const std::uint8_t> bytes) = 0;
    virtual void on_close() {}
};

class Connection {
public:
    virtual ~Connection() = default;
    // False once the connection is closed or broken.
    virtual bool write(std::span<const std::uint8_t> bytes) = 0;
    virtual void close() = 0;
    virtual bool is_open() const = 0;
};

// Builds the server-side handler for one accepted connection. `reply` writes
// back to the client.
using SessionFactory =
    std::function<std::shared_ptr<ByteSink>(std::shared_ptr<Connection> reply, const Endpoint& remote)>;

class Network {
public:
    virtual ~Network() = default;
    // Returns nullptr when nothing listens at `to` (connection refused).
    // `inbound` receives what the server sends back; may be null.
    virtual std::shared_ptr<Connection> connect(const Endpoint& to, std::shared_ptr<ByteSink> inbound) = 0;
};

// Collects bytes into a callback; handy for one-off clients.
class FunctionSink final : public ByteSink {
public:
    using DataFn = std::function<void(std::span<const std::uint8_t>)>;
    using CloseFn = std::function<void()>;

    explicit FunctionSink(DataFn on_data, CloseFn on_close = {})
        : data_(std::move(on_data)), close_(std::move(on_close)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        if (data_) data_(bytes);
    }
    void on_close() override {
        if (close_) close_();
    }

private:
    DataFn data_;
    CloseFn close_;
};

}  // namespace gpslab::net
