#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "gpslab/attack/classify.hpp"
#include "gpslab/attack/enumerate.hpp"
#include "gpslab/attack/relay.hpp"
#include "gpslab/attack/spoof.hpp"
#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/hq.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"
#include "gpslab/net/sim_network.hpp"
#include "gpslab/platform/history.hpp"
#include "samples.hpp"

using namespace gpslab;
using namespace gpslab::attack;
namespace t = gpslab::testing;

namespace {

const Endpoint kServer{"127.0.0.1", 9011};
const Endpoint kRelay{"127.0.0.1", 8011};

Protocol classify_text(std::string_view s) {
    const auto b = to_bytes(s);
    return classify(b);
}

// Records what reaches it and answers every chunk with a fixed reply.
struct Upstream {
    Bytes received;
    int closes = 0;
    std::string answer;

    void install(net::SimNetwork& net, const Endpoint& at) {
        net.listen(at, [this](std::shared_ptr<net::Connection> reply, const Endpoint&) {
            return std::make_shared<net::FunctionSink>(
                [this, reply](std::span<const std::uint8_t> b) {
                    received.insert(received.end(), b.begin(), b.end());
                    if (!answer.empty()) reply->write(to_bytes(answer));
                },
                [this] { ++closes; });
        });
    }
};

struct RelayBench {
    SimClock clock;
    net::SimNetwork net;
    Upstream up;
    std::shared_ptr<Relay> relay;
    Bytes back;

    explicit RelayBench(Transform tf, double dlat = 0, double dlon = 0) {
        up.install(net, kServer);
        relay = Relay::create({kRelay, kServer, Transport::Tcp, tf, dlat, dlon}, net, clock);
        net.listen(kRelay, relay->factory());
    }
    std::shared_ptr<net::Connection> client() {
        return net.connect(kRelay, std::make_shared<net::FunctionSink>(
                                       [this](std::span<const std::uint8_t> b) { back.insert(back.end(), b.begin(), b.end()); }));
    }
};

std::string random_v1(std::mt19937_64& rng, const std::string& serial) {
    const auto ts = SimClock::kDefaultStart.plus(static_cast<std::int64_t>(rng() % 100000000));
    const auto v = hq::make_v1(make_position(t::uniform(rng, -89, 89), t::uniform(rng, -179.9, 179.9)), ts);
    return hq::serialize({serial, v});
}

}  // namespace

TEST(Classify, Examples) {
    EXPECT_EQ(classify_text(t::kV1), Protocol::Hq);
    EXPECT_EQ(classify_text(t::kLink), Protocol::Hq);
    EXPECT_EQ(classify(t::captured_forward()), Protocol::Yy);
    EXPECT_EQ(classify_text(t::kAgpsLogin), Protocol::AgpsLogin);
    agps::Response r;
    r.blob = agps::assistance_blob(make_position(22.68, 114.14));
    const auto resp = agps::serialize_response(r);
    EXPECT_EQ(classify(resp), Protocol::AgpsResponse);
    EXPECT_EQ(classify_text(""), Protocol::Unknown);
    EXPECT_EQ(classify_text("GET / HTTP/1.1\r\n"), Protocol::Unknown);
    EXPECT_EQ(classify_text("*HQ"), Protocol::Unknown);
    EXPECT_EQ(protocol_name(Protocol::AgpsResponse), "AGPS_RESPONSE");

    auto cut = t::captured_forward();
    cut.pop_back();
    EXPECT_EQ(classify(cut), Protocol::Unknown);
    auto longer = t::captured_forward();
    longer.push_back('x');
    EXPECT_EQ(classify(longer), Protocol::Unknown);
}

TEST(Spoof, LandsUnderChosenSerial) {
    net::SimNetwork net;
    Upstream server;
    server.install(net, kServer);
    const auto ts = SimTimestamp::from_civil({2019, 1, 12}, {16, 43, 24});
    const auto sent = spoof_position(net, kServer, "1700054321", make_position(39.056417, 126.2572), ts);
    EXPECT_EQ(sent, server.received);
    EXPECT_EQ(server.closes, 1);
    const auto r = platform::record_from_frame(platform::Source::Hq, ts, sent);
    EXPECT_EQ(r.serial, "1700054321");
    EXPECT_EQ(to_string(sent), "*HQ,1700054321,V1,164324,A,3903.3850,N,12615.4320,E,000.0,000.00,120119,FFFFFFFF#");
}

TEST(Spoof, Errors) {
    net::SimNetwork net;
    auto code = [&](const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::Config;
    };
    const auto p = make_position(1, 1);
    EXPECT_EQ(code([&] { spoof_position(net, kServer, "1700054321", p, SimClock::kDefaultStart); }), Errc::Network);
    Upstream server;
    server.install(net, kServer);
    EXPECT_EQ(code([&] { spoof_position(net, kServer, "17,00", p, SimClock::kDefaultStart); }), Errc::IllegalSerial);
    EXPECT_TRUE(server.received.empty());
}

TEST(Relay, RejectsLoop) {
    SimClock clock;
    net::SimNetwork net;
    EXPECT_THROW(Relay::create({kRelay, kRelay}, net, clock), Error);
    EXPECT_THROW(Relay::create({kRelay, kServer, Transport::Udp}, net, clock), Error);
}

TEST(RelayProperty, IdentityIsByteExactBothWays) {
    std::mt19937_64 rng(91);
    for (int round = 0; round < 200; ++round) {
        RelayBench b(round % 2 ? Transform::Identity : Transform::RecordOnly);
        b.up.answer = round % 3 ? "ok\r\n" : "";
        auto c = b.client();
        ASSERT_TRUE(c);
        Bytes sent, expected_back;
        const int chunks = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < chunks; ++i) {
            auto chunk = rng() % 2 ? to_bytes(random_v1(rng, "1700012345")) : t::random_bytes(rng, 64);
            if (chunk.empty()) continue;
            sent.insert(sent.end(), chunk.begin(), chunk.end());
            c->write(chunk);
            const auto a = to_bytes(b.up.answer);
            expected_back.insert(expected_back.end(), a.begin(), a.end());
        }
        c->close();
        // identity forwards chunk by chunk; record_only the same, so the answers line up
        EXPECT_EQ(b.up.received, sent);
        EXPECT_EQ(b.back, expected_back);
        const auto st = b.relay->stats();
        EXPECT_EQ(st.bytes_up, sent.size());
        EXPECT_EQ(st.bytes_down, b.back.size());
        EXPECT_EQ(b.up.closes, 1);
    }
}

TEST(RelayProperty, OffsetMovesV1WithinQuantum) {
    std::mt19937_64 rng(92);
    for (int round = 0; round < 300; ++round) {
        const double dlat = t::uniform(rng, -0.9, 0.9), dlon = t::uniform(rng, -0.9, 0.9);
        RelayBench b(Transform::PositionOffset, dlat, dlon);
        auto c = b.client();
        std::vector<std::string> frames;
        for (int i = 0; i < 3; ++i) {
            auto ts = SimClock::kDefaultStart.plus(i * 30);
            auto v = hq::make_v1(make_position(t::uniform(rng, -80, 80), t::uniform(rng, -170, 170)), ts);
            frames.push_back(hq::serialize({"1700012345", v}));
        }
        frames.push_back(std::string(t::kNbr));
        std::string stream;
        for (const auto& f : frames) stream += f + "\r\n";
        // split at a random point to exercise buffering
        const auto cut = rng() % stream.size();
        c->write(to_bytes(stream.substr(0, cut)));
        c->write(to_bytes(stream.substr(cut)));
        c->close();

        const auto got = to_string(b.up.received);
        std::vector<std::string> out;
        for (auto piece : text::split(got, '#')) {
            auto s = std::string(text::trim(piece));
            if (!s.empty()) out.push_back(s + "#");
        }
        ASSERT_EQ(out.size(), frames.size());
        for (std::size_t i = 0; i < 3; ++i) {
            const auto a = std::get<hq::V1>(hq::parse(frames[i]).body);
            const auto m = std::get<hq::V1>(hq::parse(out[i]).body);
            EXPECT_NEAR(m.position().lat_deg, a.position().lat_deg + dlat, 1.0 / 60000 + 1e-9);
            EXPECT_NEAR(m.position().lon_deg, a.position().lon_deg + dlon, 1.0 / 60000 + 1e-9);
            EXPECT_EQ(m.time, a.time);
            EXPECT_EQ(m.status_hex, a.status_hex);
        }
        EXPECT_EQ(out[3], t::kNbr);
        EXPECT_EQ(b.relay->stats().frames_modified, 3u);
        EXPECT_EQ(b.relay->stats().frames_up, 4u);
    }
}

TEST(Relay, OffsetPassesYyUntouched) {
    RelayBench b(Transform::PositionOffset, 0.5, 0.5);
    auto c = b.client();
    const auto f = t::captured_forward();
    c->write(std::span(f).first(10));
    c->write(std::span(f).subspan(10));
    c->close();
    EXPECT_EQ(b.up.received, f);
    EXPECT_EQ(b.relay->stats().frames_modified, 0u);
    EXPECT_EQ(b.relay->stats().frames_up, 1u);
    const auto lines = b.relay->transcript().lines();
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_NE(lines[0].find("\tSMS_FORWARD\t"), std::string::npos);
    EXPECT_NE(lines[0].find("dir=up"), std::string::npos);
}

TEST(Relay, UpstreamDownRefusesClient) {
    SimClock clock;
    net::SimNetwork net;
    auto relay = Relay::create({kRelay, kServer}, net, clock);
    net.listen(kRelay, relay->factory());
    int closed = 0;
    auto c = net.connect(kRelay, std::make_shared<net::FunctionSink>(nullptr, [&] { ++closed; }));
    ASSERT_TRUE(c);
    EXPECT_EQ(relay->stats().refused, 1u);
    EXPECT_EQ(closed, 1);
}

TEST(Relay, TranscriptRecordsOriginal) {
    RelayBench b(Transform::PositionOffset, 0.5, 0);
    auto c = b.client();
    c->write(to_bytes(t::kV1));
    const auto lines = b.relay->transcript().lines();
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_NE(lines[0].find("orig=" + hex_upper(to_bytes(t::kV1))), std::string::npos);
    EXPECT_NE(to_string(b.up.received).find("2310.8116,N"), std::string::npos);
}

TEST(Offset, V1Only) {
    EXPECT_FALSE(offset_v1(to_bytes(t::kLink), 1, 1));
    const auto moved = offset_v1(to_bytes(t::kV1), 0.5, 0);
    ASSERT_TRUE(moved);
    EXPECT_NE(to_string(*moved).find(",2310.8116,N,11408.8108,E,"), std::string::npos);
    const auto wrapped = offset_v1(to_bytes(t::kV1), 0, 70);
    ASSERT_TRUE(wrapped);
    EXPECT_EQ(std::get<hq::V1>(hq::parse(*wrapped).body).lon.hemisphere, 'W');
    EXPECT_THROW(offset_v1(to_bytes(t::kV1), 70, 0), Error);
    EXPECT_THROW(offset_v1(to_bytes("junk"), 1, 1), Error);
}

TEST(Framer, SplitsEachProtocol) {
    Framer hq;
    auto out = hq.push(to_bytes(std::string(t::kV1).substr(0, 20)));
    EXPECT_TRUE(out.empty());
    out = hq.push(to_bytes(std::string(t::kV1).substr(20) + std::string(t::kNbr)));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(to_string(out[1]), t::kNbr);
    EXPECT_EQ(hq.kind(), Framer::Kind::Hq);

    Framer yy;
    Bytes two = t::captured_forward();
    two.insert(two.end(), t::captured_forward().begin(), t::captured_forward().end());
    out = yy.push(two);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], t::captured_forward());

    Framer login;
    out = login.push(to_bytes(std::string(t::kAgpsLogin) + "\r\n"));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(login.kind(), Framer::Kind::AgpsLogin);

    Framer raw;
    out = raw.push(to_bytes("hello"));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(raw.kind(), Framer::Kind::Raw);
    EXPECT_EQ(raw.push(to_bytes("x")).size(), 1u);

    Framer partial;
    partial.push(to_bytes("*HQ,1"));
    EXPECT_EQ(to_string(partial.take_rest()), "*HQ,1");
}

TEST(Enumerate, RangeNumbers) {
    PhoneRange r{"+86138000000", 5, 3, 2};
    EXPECT_EQ(r.numbers(), (std::vector<std::string>{"+8613800000005", "+8613800000006", "+8613800000007"}));
    EXPECT_TRUE((PhoneRange{"+1", 0, 0, 0}).numbers().empty());
    EXPECT_EQ(verdict_name(Verdict::DeliveredSilent), "DELIVERED_SILENT");
}

TEST(Enumerate, SerialFromReply) {
    EXPECT_EQ(serial_from_reply("SN:1700012345 GPS:A LAT:1 LON:2"), "1700012345");
    EXPECT_FALSE(serial_from_reply("SN: 17"));
    EXPECT_FALSE(serial_from_reply("hello"));
}

TEST(EnumerateProperty, SoundAndComplete) {
    std::mt19937_64 rng(93);
    for (int round = 0; round < 100; ++round) {
        sms::SmsBus bus;
        const std::size_t n = rng() % 30;
        std::map<std::string, std::string> repliers;
        std::set<std::string> silent;
        PhoneRange range{"+8613900", rng() % 1000, n, 6};
        for (const auto& phone : range.numbers()) {
            const auto roll = rng() % 4;
            if (roll == 0) {
                const auto serial = "17" + t::random_digits(rng, 8);
                repliers[phone] = serial;
                bus.subscribe(phone, [&bus, phone, serial](const SmsMessage& m) {
                    bus.send(make_sms(phone, m.from, "SN:" + serial + " GPS:A"));
                });
            } else if (roll == 1) {
                silent.insert(phone);
                bus.subscribe(phone, [](const SmsMessage&) {});
            }
        }
        const auto probes = enumerate_numbers(bus, "+10000000000", range);
        ASSERT_EQ(probes.size(), n);
        for (const auto& p : probes) {
            if (repliers.count(p.phone)) {
                EXPECT_EQ(p.verdict, Verdict::DeliveredReplied);
                EXPECT_EQ(p.serial, repliers[p.phone]);
            } else if (silent.count(p.phone)) {
                EXPECT_EQ(p.verdict, Verdict::DeliveredSilent);
            } else {
                EXPECT_EQ(p.verdict, Verdict::NotDelivered);
            }
        }
        EXPECT_EQ(hits(probes).size(), repliers.size());
        EXPECT_FALSE(bus.is_registered("+10000000000"));
    }
}

TEST(Enumerate, LookupCountsAsHit) {
    sms::SmsBus bus;
    bus.subscribe("+100", [](const SmsMessage&) {});
    const auto probes = enumerate_numbers(bus, "+999", {"+10", 0, 1, 1},
                                          [](const std::string& phone) -> std::optional<std::string> {
                                              if (phone == "+100") return "690217122612463";
                                              return std::nullopt;
                                          });
    ASSERT_EQ(probes.size(), 1u);
    EXPECT_EQ(probes[0].verdict, Verdict::DeliveredReplied);
    EXPECT_EQ(probes[0].serial, "690217122612463");
}

TEST(Inject, SenderIsWhateverWeSay) {
    sms::SmsBus bus;
    std::vector<SmsMessage> got;
    bus.subscribe("+861", [&](const SmsMessage& m) { got.push_back(m); });
    EXPECT_EQ(inject_sms(bus, "+8613800000001", "+861", "reg 10.66.0.1 8011"), sms::Delivery::Delivered);
    EXPECT_EQ(inject_sms(bus, "+1", "+2", "x"), sms::Delivery::NotDelivered);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].from, "+8613800000001");
}
