#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "gpslab/core/error.hpp"
#include "gpslab/sms/bus.hpp"
#include "gpslab/sms/command.hpp"
#include "samples.hpp"

using namespace gpslab;
using namespace gpslab::sms;

namespace {

DeviceIdentity with_master(std::optional<std::string> master) {
    return provision("1700012345", "", "+8613800000001", std::move(master));
}

}  // namespace

TEST(SmsCommand, Grammar) {
    EXPECT_EQ(parse_command("*reg 10.0.0.5 8841"), (Command{cmd::Reg{"10.0.0.5", 8841}}));
    EXPECT_EQ(parse_command("*reg 10.0.0.9"), (Command{cmd::Reg{"10.0.0.9", std::nullopt}}));
    EXPECT_EQ(parse_command("* REG   10.0.0.9  "), (Command{cmd::Reg{"10.0.0.9", std::nullopt}}));
    EXPECT_EQ(parse_command("Status"), (Command{cmd::Status{}}));
    EXPECT_EQ(parse_command("STATUS"), (Command{cmd::Status{}}));
    EXPECT_EQ(parse_command("*reboot*"), (Command{cmd::Reboot{}}));
    EXPECT_EQ(parse_command("*3646655*"), (Command{cmd::FactoryCode{}}));
    EXPECT_EQ(parse_command("imeiset 123456789012345"), (Command{cmd::ImeiSet{"123456789012345"}}));
    EXPECT_EQ(parse_command("hello world"), (Command{cmd::Unknown{"hello world"}}));
}

TEST(SmsCommand, MalformedIsUnknown) {
    for (auto body : {"*reg", "*reg host.example", "*reg 10.0.0.5 0", "*reg 10.0.0.5 99999", "*reg 10.0.0.5 1 2",
                      "*regx 10.0.0.5", "imeiset 123", "imeiset12345678901234", "*reboot", ""}) {
        EXPECT_TRUE(std::holds_alternative<cmd::Unknown>(parse_command(body).kind)) << body;
    }
}

TEST(SmsCommand, MasterRequirement) {
    EXPECT_TRUE(parse_command("*reg 10.0.0.5").requires_master());
    EXPECT_TRUE(parse_command("*reboot*").requires_master());
    EXPECT_TRUE(parse_command("*3646655*").requires_master());
    EXPECT_TRUE(parse_command("imeiset 123456789012345").requires_master());
    EXPECT_FALSE(parse_command("Status").requires_master());
    EXPECT_FALSE(parse_command("hi").requires_master());
    EXPECT_TRUE(parse_command("*3646655*").is_backdoor());
    EXPECT_FALSE(parse_command("*reg 1.2.3.4").is_backdoor());
}

TEST(SmsAuthorize, Examples) {
    const auto id = with_master("+441");
    EXPECT_EQ(authorize(parse_command("Status"), "+000", id), Verdict::Allowed);
    EXPECT_EQ(authorize(parse_command("*reg 1.2.3.4"), "+441", id), Verdict::Allowed);
    EXPECT_EQ(authorize(parse_command("*reboot*"), "+999", id), Verdict::Denied);
    // the attacker at +999 claims to be +441; only the claim is compared
    const SmsMessage spoofed{"+441", "+8613800000001", "*reg 1.2.3.4"};
    EXPECT_EQ(authorize(parse_command(spoofed.body), spoofed.from, id), Verdict::Allowed);
}

TEST(SmsAuthorizeProperty, StatusOpenToEveryone) {
    std::mt19937_64 rng(51);
    const auto id = with_master("+441");
    for (int i = 0; i < 2000; ++i) {
        const auto sender = "+" + gpslab::testing::random_digits(rng, 1 + i % 15);
        EXPECT_EQ(authorize(parse_command("Status"), sender, id), Verdict::Allowed);
    }
}

TEST(SmsAuthorizeProperty, NoMasterMeansOpen) {
    const auto id = with_master(std::nullopt);
    for (auto body : {"*reg 1.2.3.4", "*reboot*", "*3646655*", "imeiset 123456789012345"}) {
        EXPECT_EQ(authorize(parse_command(body), "+999", id), Verdict::Allowed) << body;
    }
}

TEST(SmsParseProperty, Total) {
    std::mt19937_64 rng(52);
    for (int i = 0; i < 20000; ++i) {
        const auto b = gpslab::testing::random_bytes(rng, 200);
        const auto c = parse_command(to_string(b));
        if (auto* u = std::get_if<cmd::Unknown>(&c.kind)) {
            EXPECT_EQ(u->body, to_string(b));
        }
    }
}

TEST(SmsBus, DeliveryAndLog) {
    SimClock clock;
    SmsBus bus(&clock);
    std::vector<SmsMessage> got;
    bus.subscribe("+1", [&](const SmsMessage& m) { got.push_back(m); });
    EXPECT_EQ(bus.send({"+441", "+1", "hi"}), Delivery::Delivered);
    EXPECT_EQ(bus.send({"+441", "+2", "hi"}), Delivery::NotDelivered);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].from, "+441");  // carried verbatim
    const auto log = bus.log();
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[1].delivery, Delivery::NotDelivered);
    EXPECT_EQ(log[0].ts, SimClock::kDefaultStart);
    EXPECT_THROW(bus.send({"a", "+1", std::string(161, 'x')}), Error);
    bus.unsubscribe("+1");
    EXPECT_FALSE(bus.is_registered("+1"));
}

TEST(SmsBus, ReplyFromSubscriberDeliveredAfterReturn) {
    SmsBus bus;
    std::vector<std::string> order;
    bus.subscribe("+1", [&](const SmsMessage& m) {
        order.push_back("dev:" + m.body);
        bus.send({"+1", m.from, "reply"});
        order.push_back("dev-done");
    });
    bus.subscribe("+2", [&](const SmsMessage& m) { order.push_back("handset:" + m.body); });
    bus.send({"+2", "+1", "Status"});
    EXPECT_EQ(order, (std::vector<std::string>{"dev:Status", "dev-done", "handset:reply"}));
}

TEST(SmsBus, ConcurrentSendersKeepPairOrder) {
    SmsBus bus;
    std::mutex mu;
    std::map<std::string, std::vector<int>> seen;
    bus.subscribe("+1", [&](const SmsMessage& m) {
        std::lock_guard l(mu);
        seen[m.from].push_back(std::stoi(m.body));
    });
    std::vector<std::thread> ts;
    for (int s = 0; s < 4; ++s) {
        ts.emplace_back([&, s] {
            for (int i = 0; i < 500; ++i) bus.send({"+9" + std::to_string(s), "+1", std::to_string(i)});
        });
    }
    for (auto& t : ts) t.join();
    bus.wait_idle();
    ASSERT_EQ(seen.size(), 4u);
    for (auto& [from, v] : seen) {
        ASSERT_EQ(v.size(), 500u) << from;
        for (int i = 0; i < 500; ++i) EXPECT_EQ(v[i], i);
    }
    EXPECT_EQ(bus.log().size(), 2000u);
}
