#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gpslab/core/fleet.hpp"
#include "gpslab/core/model.hpp"
#include "gpslab/net/network.hpp"

namespace gpslab::attack {

enum class Transport { Tcp, Udp };
enum class Transform { Identity, PositionOffset, RecordOnly };

std::string_view transform_name(Transform t) noexcept;

struct RelaySpec {
    Endpoint listen;
    Endpoint upstream;
    Transport transport = Transport::Tcp;
    Transform transform = Transform::Identity;
    double dlat = 0.0;
    double dlon = 0.0;
};

// listen must differ from upstream. Throws Errc::Config.
void validate(const RelaySpec& spec);

// Splits one direction of a relayed stream into frames once the first
// significant byte gives the protocol away. Unrecognised streams come out
// as the chunks they arrived in.
class Framer {
public:
    enum class Kind { Undetermined, Hq, Yy, AgpsLogin, AgpsResponse, Raw };

    std::vector<Bytes> push(std::span<const std::uint8_t> bytes);
    // Whatever is buffered, even if incomplete.
    Bytes take_rest();
    Kind kind() const { return kind_; }

private:
    std::optional<Bytes> next();

    Kind kind_ = Kind::Undetermined;
    Bytes buf_;
};

// V1 frames get (dlat, dlon) added and are re-encoded; everything else is
// returned unchanged. nullopt when the frame was left alone.
std::optional<Bytes> offset_v1(const Bytes& frame, double dlat, double dlon);

// Relay log in the history line format, plus dir= and, for rewritten
// frames, orig= (the bytes as received).
class Transcript {
public:
    enum class Dir { Up, Down };

    void add(SimTimestamp ts, Dir dir, const Bytes& sent, const std::optional<Bytes>& original = std::nullopt,
             std::string_view note = {});
    std::vector<std::string> lines() const;
    std::string text() const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
};

struct RelayStats {
    std::uint64_t connections = 0;
    std::uint64_t refused = 0;  // upstream down
    std::uint64_t bytes_up = 0;
    std::uint64_t bytes_down = 0;
    std::uint64_t frames_up = 0;
    std::uint64_t frames_modified = 0;
};

// Stream relay usable on any Network: install factory() on a listener and
// every accepted connection is paired with a fresh upstream connection.
class Relay : public std::enable_shared_from_this<Relay> {
public:
    static std::shared_ptr<Relay> create(RelaySpec spec, net::Network& upstream_network, const Clock& clock);

    net::SessionFactory factory();
    const RelaySpec& spec() const { return spec_; }
    Transcript& transcript() { return transcript_; }
    RelayStats stats() const;

private:
    Relay(RelaySpec spec, net::Network& upstream_network, const Clock& clock);
    class Session;
    friend class Session;
    void count(const std::function<void(RelayStats&)>& f);

    RelaySpec spec_;
    net::Network& network_;
    const Clock& clock_;
    Transcript transcript_;
    mutable std::mutex mu_;
    RelayStats stats_;
};

// Datagram relay on real sockets; each client address gets its own
// upstream socket. Each datagram is one frame.
class UdpRelay {
public:
    UdpRelay(RelaySpec spec, const Clock& clock);
    ~UdpRelay();
    UdpRelay(const UdpRelay&) = delete;
    UdpRelay& operator=(const UdpRelay&) = delete;

    // Throws Errc::Network.
    Endpoint start();
    void stop();
    Transcript& transcript() { return transcript_; }
    RelayStats stats() const;

private:
    void loop();

    RelaySpec spec_;
    const Clock& clock_;
    Transcript transcript_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread thread_;
    mutable std::mutex mu_;
    RelayStats stats_;
};

}  // namespace gpslab::attack
