#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "gpslab/attack/relay.hpp"
#include "gpslab/codec/hq.hpp"
#include "gpslab/platform/platform.hpp"
#include "samples.hpp"

using namespace gpslab;
namespace t = gpslab::testing;

namespace {

FleetConfig loopback_fleet() {
    FleetConfig f;
    f.platform = {"127.0.0.1", 0, 0, 0, 0};
    DeviceConfig d;
    d.identity = provision("17000XXXXX", "", "+8613800000001");
    f.devices.push_back(d);
    return f;
}

bool wait_for(const std::function<bool()>& done, std::chrono::milliseconds limit = std::chrono::milliseconds(5000)) {
    const auto until = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < until) {
        if (done()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return done();
}

sockaddr_in addr_of(const Endpoint& e) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(e.port);
    ::inet_pton(AF_INET, e.host.c_str(), &a.sin_addr);
    return a;
}

std::optional<Bytes> recv_within(int fd, int ms, sockaddr_in* from = nullptr) {
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, ms) <= 0) return std::nullopt;
    Bytes buf(2048);
    socklen_t len = sizeof(sockaddr_in);
    sockaddr_in tmp{};
    const auto n = ::recvfrom(fd, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(from ? from : &tmp), &len);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return buf;
}

}  // namespace

TEST(Tcp, PlatformIngestAndApi) {
    SimClock clock;
    const auto fleet = loopback_fleet();
    platform::Platform p("platform", fleet, clock, platform::seeded_token_source(1));
    const auto bound = p.start_tcp();
    for (const auto& e : {bound.hq, bound.yy, bound.agps, bound.http}) {
        EXPECT_EQ(e.host, "127.0.0.1");
        EXPECT_NE(e.port, 0);
    }

    net::TcpNetwork tcp;
    auto c = tcp.connect(bound.hq, nullptr);
    ASSERT_TRUE(c);
    c->write(to_bytes(std::string(t::kV1) + "\r\n" + std::string(t::kNbr)));
    auto y = tcp.connect(bound.yy, nullptr);
    ASSERT_TRUE(y);
    y->write(t::captured_forward());
    ASSERT_TRUE(wait_for([&] { return p.store().size() == 3; }));

    httplib::Client http(bound.http.host, bound.http.port);
    auto res = http.Get("/OpenAPIV2.asmx/GetTracking?DeviceID=82383");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_NE(res->body.find(R"("latitude":"22.680193")"), std::string::npos);

    res = http.Post("/login", "user=000XXXXX&pass=x", "application/x-www-form-urlencoded");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 401);
    res = http.Post("/login", "user=00XXXXX&pass=00XXXXX", "application/x-www-form-urlencoded");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const std::string session = nlohmann::json::parse(res->body).at("session");
    res = http.Get("/history?serial=690217122612463", {{"Cookie", "session=" + session}});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_NE(res->body.find("SMS_FORWARD"), std::string::npos);

    c->close();
    y->close();
    tcp.shutdown();
    p.stop();
}

TEST(Tcp, AgpsAnswersOverSocket) {
    SimClock clock;
    platform::Platform p("platform", loopback_fleet(), clock, platform::seeded_token_source(1));
    const auto bound = p.start_tcp();
    net::TcpNetwork tcp;
    std::mutex mu;
    Bytes got;
    auto c = tcp.connect(bound.agps, std::make_shared<net::FunctionSink>([&](std::span<const std::uint8_t> b) {
        std::lock_guard lock(mu);
        got.insert(got.end(), b.begin(), b.end());
    }));
    ASSERT_TRUE(c);
    c->write(to_bytes(std::string(t::kAgpsLogin) + "\n"));
    ASSERT_TRUE(wait_for([&] {
        std::lock_guard lock(mu);
        return got.size() >= 2856;
    }));
    {
        std::lock_guard lock(mu);
        EXPECT_TRUE(to_string(got).starts_with(t::kAgpsHeader));
    }
    EXPECT_EQ(p.store().count("XXXXXX@gmail.com", RecordKind::AgpsLogin), 1u);
    tcp.shutdown();
    p.stop();
}

TEST(Tcp, RelayRewritesOnTheWire) {
    SimClock clock;
    platform::Platform p("platform", loopback_fleet(), clock, platform::seeded_token_source(1));
    const auto bound = p.start_tcp();

    net::TcpNetwork upstream_net;
    auto relay = attack::Relay::create(
        {{"127.0.0.1", 0}, bound.hq, attack::Transport::Tcp, attack::Transform::PositionOffset, 0.5, 0.0},
        upstream_net, clock);
    net::TcpServer relay_server;
    relay_server.start({"127.0.0.1", 0}, relay->factory());

    net::TcpNetwork client_net;
    auto c = client_net.connect(relay_server.bound(), nullptr);
    ASSERT_TRUE(c);
    c->write(to_bytes(t::kV1));
    ASSERT_TRUE(wait_for([&] { return p.store().size() == 1; }));
    const auto rec = p.store().all()[0];
    EXPECT_EQ(rec.meta.at("lat"), "23.1801933");
    EXPECT_EQ(relay->stats().frames_modified, 1u);

    c->close();
    client_net.shutdown();
    relay_server.stop();
    upstream_net.shutdown();
    p.stop();
}

TEST(Udp, RelayForwardsDatagramsBothWays) {
    Endpoint up_bound;
    const int up = net::open_udp_socket({"127.0.0.1", 0}, &up_bound);
    SimClock clock;
    attack::UdpRelay relay({{"127.0.0.1", 0}, up_bound, attack::Transport::Udp, attack::Transform::RecordOnly}, clock);
    const auto relay_at = relay.start();
    EXPECT_EQ(relay_at.host, "127.0.0.1");

    Endpoint client_bound;
    const int client = net::open_udp_socket({"127.0.0.1", 0}, &client_bound);
    const auto frame = t::captured_forward();
    const auto to = addr_of(relay_at);
    ASSERT_EQ(::sendto(client, frame.data(), frame.size(), 0, reinterpret_cast<const sockaddr*>(&to), sizeof to),
              static_cast<ssize_t>(frame.size()));

    sockaddr_in relay_side{};
    const auto at_server = recv_within(up, 3000, &relay_side);
    ASSERT_TRUE(at_server);
    EXPECT_EQ(*at_server, frame);

    const auto reply = to_bytes("ack");
    ::sendto(up, reply.data(), reply.size(), 0, reinterpret_cast<const sockaddr*>(&relay_side), sizeof relay_side);
    const auto at_client = recv_within(client, 3000);
    ASSERT_TRUE(at_client);
    EXPECT_EQ(*at_client, reply);

    relay.stop();
    EXPECT_EQ(relay.stats().frames_up, 1u);
    ASSERT_EQ(relay.transcript().lines().size(), 2u);
    ::close(up);
    ::close(client);
}
