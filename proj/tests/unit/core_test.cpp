#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "gpslab/core/error.hpp"
#include "gpslab/core/fleet.hpp"
#include "gpslab/core/geo.hpp"
#include "gpslab/core/identity.hpp"
#include "gpslab/core/model.hpp"
#include "gpslab/core/text.hpp"
#include "gpslab/core/time.hpp"
#include "samples.hpp"

using namespace gpslab;
using gpslab::testing::uniform;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no gpslab::Error thrown";
    return Errc::Config;
}

}  // namespace

// Reference values below come from an exact rational evaluation of
// dd + mm.mmmm/60 done outside this code base.
TEST(Ddmm, CapturedLatitude) { EXPECT_NEAR(ddmm_to_degrees("2240.8116", 'N'), 22.680193, 1e-6); }
TEST(Ddmm, CapturedLongitude) { EXPECT_NEAR(ddmm_to_degrees("11408.8108", 'E'), 114.146846, 1e-6); }

TEST(Ddmm, ExactValues) {
    EXPECT_DOUBLE_EQ(ddmm_to_degrees("2240.8116", 'N'), 22.0 + 40.8116 / 60.0);
    EXPECT_EQ(ddmm_to_degrees("0000.0000", 'N'), 0.0);
    EXPECT_EQ(ddmm_to_degrees("4530.0000", 'S'), -45.5);
    EXPECT_EQ(ddmm_to_degrees("00000.0000", 'W'), 0.0);
    EXPECT_EQ(ddmm_to_degrees("18000.0000", 'E'), 180.0);
}

TEST(Ddmm, Rejects) {
    for (auto bad : {"2260.0000", "240.8116", "2240.811", "2240.81160", "22a0.8116", "", "9100.0000", "2240,8116"}) {
        EXPECT_EQ(code_of([&] { ddmm_to_degrees(bad, 'N'); }), Errc::Parse) << bad;
    }
    EXPECT_EQ(code_of([] { ddmm_to_degrees("2240.8116", 'E'); }), Errc::Parse);
    EXPECT_EQ(code_of([] { ddmm_to_degrees("2240.8116", 'X'); }), Errc::Parse);
    EXPECT_EQ(code_of([] { ddmm_to_degrees("18000.0001", 'E'); }), Errc::Parse);
}

TEST(Ddmm, ErrorNamesField) {
    try {
        ddmm_to_degrees("2275.0000", 'N');
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.subject(), "2275.0000");
    }
}

TEST(Ddmm, Encode) {
    EXPECT_EQ(degrees_to_ddmm(22.680193, Axis::Latitude), (WireCoordinate{"2240.8116", 'N'}));
    EXPECT_EQ(degrees_to_ddmm(114.146846, Axis::Longitude), (WireCoordinate{"11408.8108", 'E'}));
    EXPECT_EQ(degrees_to_ddmm(0.0, Axis::Longitude), (WireCoordinate{"00000.0000", 'E'}));
    EXPECT_EQ(degrees_to_ddmm(-45.5, Axis::Latitude), (WireCoordinate{"4530.0000", 'S'}));
    EXPECT_EQ(degrees_to_ddmm(39.056417, Axis::Latitude), (WireCoordinate{"3903.3850", 'N'}));
    EXPECT_EQ(degrees_to_ddmm(126.2572, Axis::Longitude), (WireCoordinate{"12615.4320", 'E'}));
    // minutes that round up to 60 carry into the degrees
    EXPECT_EQ(degrees_to_ddmm(10.9999999, Axis::Latitude), (WireCoordinate{"1100.0000", 'N'}));
}

TEST(Ddmm, EncodeRange) {
    EXPECT_EQ(code_of([] { degrees_to_ddmm(90.5, Axis::Latitude); }), Errc::Range);
    EXPECT_EQ(code_of([] { degrees_to_ddmm(-180.01, Axis::Longitude); }), Errc::Range);
    EXPECT_EQ(code_of([] { degrees_to_ddmm(NAN, Axis::Longitude); }), Errc::Range);
}

TEST(DdmmProperty, DegreesRoundTripWithinQuantum) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20000; ++i) {
        const double lat = uniform(rng, -90, 90);
        const double lon = uniform(rng, -180, 180);
        EXPECT_LE(std::abs(ddmm_to_degrees(degrees_to_ddmm(lat, Axis::Latitude)) - lat), kDdmmQuantumDeg);
        EXPECT_LE(std::abs(ddmm_to_degrees(degrees_to_ddmm(lon, Axis::Longitude)) - lon), kDdmmQuantumDeg);
    }
}

TEST(DdmmProperty, WireStringsAreCanonical) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> deg_lat(0, 89), deg_lon(0, 179), mins(0, 59), frac(0, 9999), h(0, 1);
    char buf[32];
    for (int i = 0; i < 20000; ++i) {
        std::snprintf(buf, sizeof buf, "%02d%02d.%04d", deg_lat(rng), mins(rng), frac(rng));
        const WireCoordinate lat{buf, h(rng) ? 'N' : 'S'};
        std::snprintf(buf, sizeof buf, "%03d%02d.%04d", deg_lon(rng), mins(rng), frac(rng));
        const WireCoordinate lon{buf, h(rng) ? 'E' : 'W'};
        auto back_lat = degrees_to_ddmm(ddmm_to_degrees(lat), Axis::Latitude);
        auto back_lon = degrees_to_ddmm(ddmm_to_degrees(lon), Axis::Longitude);
        EXPECT_EQ(back_lat.field, lat.field);
        EXPECT_EQ(back_lon.field, lon.field);
        // zero has no sign to carry
        if (ddmm_to_degrees(lat) != 0) {
            EXPECT_EQ(back_lat.hemisphere, lat.hemisphere);
        }
        if (ddmm_to_degrees(lon) != 0) {
            EXPECT_EQ(back_lon.hemisphere, lon.hemisphere);
        }
    }
}

TEST(Geo, Haversine) {
    const auto a = make_position(0, 0);
    const auto b = make_position(0, 1);
    EXPECT_NEAR(haversine_m(a, b), 6371000.0 * M_PI / 180.0, 1e-6);
    EXPECT_EQ(haversine_m(a, a), 0.0);
}

TEST(Geo, MakePositionRange) {
    EXPECT_EQ(code_of([] { make_position(91, 0); }), Errc::Range);
    EXPECT_EQ(code_of([] { make_position(0, 181); }), Errc::Range);
    EXPECT_EQ(code_of([] { make_position(0, 0, INFINITY); }), Errc::Range);
    EXPECT_EQ(format_decimal(126.2572, 6), "126.257200");
}

TEST(Credentials, LastSeven) {
    EXPECT_EQ(default_credentials("690217122612463"), (Credentials{"2612463", "2612463"}));
    EXPECT_EQ(default_credentials("1234567"), (Credentials{"1234567", "1234567"}));
    EXPECT_EQ(default_credentials("17000ABCDE"), (Credentials{"00ABCDE", "00ABCDE"}));
    EXPECT_EQ(code_of([] { default_credentials("123456"); }), Errc::Provisioning);
}

TEST(Credentials, SuffixCollision) {
    // two devices whose serials share a tail share a login
    EXPECT_EQ(default_credentials("1700012345"), default_credentials("9990012345"));
}

TEST(Identity, Provision) {
    auto id = provision("690217122612463", "8988211000000276405F", "+8613800000002", "+441");
    EXPECT_EQ(id.portal.user, "2612463");
    EXPECT_EQ(id.master_phone, "+441");
    EXPECT_EQ(code_of([] { provision("69021,7122612463", "", "+1"); }), Errc::Provisioning);
    EXPECT_EQ(code_of([] { provision("690217122612463", "123", "+1"); }), Errc::Provisioning);
    EXPECT_EQ(code_of([] { provision("690217122612463", "", "phone"); }), Errc::Provisioning);
    EXPECT_TRUE(is_valid_iccid("8988211000000276405F"));
    EXPECT_TRUE(is_valid_iccid("89882110000002764050"));
    EXPECT_FALSE(is_valid_iccid("898821100000027640F5"));
}

TEST(Time, CaptureInstant) {
    const auto t = SimClock::kDefaultStart;
    EXPECT_EQ(t.iso8601(), "2019-01-09T10:54:17Z");
    EXPECT_EQ(t.api_format(), "2019-01-09 10:54:17");
    EXPECT_EQ(encode_yymmddhhmmss(t), "190109105417");
    EXPECT_EQ(decode_yymmddhhmmss("190109105417"), t);
    EXPECT_EQ(SimTimestamp::parse_iso8601("2019-01-09T10:54:17Z"), t);
    EXPECT_EQ(SimTimestamp::from_civil({2019, 1, 9}, {10, 54, 17}), t);
}

TEST(Time, WireFields) {
    EXPECT_EQ(decode_hhmmss("115112"), (TimeOfDay{11, 51, 12}));
    EXPECT_EQ(decode_ddmmyy("100119"), (CivilDate{2019, 1, 10}));
    EXPECT_EQ(encode_ddmmyy({2000, 1, 1}), "010100");
    EXPECT_EQ(encode_hhmmss({0, 0, 0}), "000000");
    EXPECT_EQ(code_of([] { decode_ddmmyy("300219"); }), Errc::Parse);
    EXPECT_EQ(code_of([] { decode_hhmmss("246000"); }), Errc::Parse);
    EXPECT_EQ(code_of([] { SimTimestamp::from_civil({2019, 2, 29}, {0, 0, 0}); }), Errc::Range);
}

TEST(TimeProperty, CivilRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> secs(946684800, 4102444799);  // 2000..2099
    for (int i = 0; i < 5000; ++i) {
        const SimTimestamp t(secs(rng));
        EXPECT_EQ(SimTimestamp::from_civil(t.date(), t.time_of_day()), t);
        EXPECT_EQ(decode_yymmddhhmmss(encode_yymmddhhmmss(t)), t);
        EXPECT_EQ(SimTimestamp::parse_iso8601(t.iso8601()), t);
    }
}

TEST(Clock, SimAdvancesOnlyWhenTold) {
    SimClock c;
    EXPECT_EQ(c.now(), SimClock::kDefaultStart);
    EXPECT_EQ(c.now(), SimClock::kDefaultStart);
    c.advance(5);
    EXPECT_EQ(c.now().unix_seconds(), SimClock::kDefaultStart.unix_seconds() + 5);
}

TEST(Model, HexAndSms) {
    EXPECT_EQ(hex_upper(parse_hex("0aff")), "0AFF");
    EXPECT_EQ(code_of([] { parse_hex("abc"); }), Errc::Parse);
    EXPECT_EQ(code_of([] { parse_hex("zz"); }), Errc::Parse);
    EXPECT_EQ(code_of([] { make_sms("a", "b", std::string(161, 'x')); }), Errc::Range);
    EXPECT_NO_THROW(make_sms("a", "b", std::string(160, 'x')));
    for (auto k : {RecordKind::Position, RecordKind::CellNbr, RecordKind::Link, RecordKind::SmsForward,
                   RecordKind::AgpsLogin, RecordKind::Alert, RecordKind::Opaque}) {
        EXPECT_EQ(parse_record_kind(record_kind_name(k)), k);
    }
}

TEST(Text, TokenizeQuotes) {
    auto t = text::tokenize(R"(at 5 body="a b \"c\"" x)");
    ASSERT_TRUE(t);
    ASSERT_EQ(t->size(), 4u);
    EXPECT_EQ((*t)[2], R"(body=a b "c")");
    EXPECT_FALSE(text::tokenize(R"(a "b)"));
}

TEST(Text, PercentRoundTrip) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        auto b = gpslab::testing::random_bytes(rng, 40);
        const std::string s = to_string(b);
        const auto enc = text::percent_encode(s);
        EXPECT_EQ(enc.find_first_of("\t\n;= "), std::string::npos);
        EXPECT_EQ(text::percent_decode(enc), s);
    }
}

TEST(Endpoint, Parse) {
    EXPECT_EQ(parse_endpoint("10.66.0.1:8011"), (Endpoint{"10.66.0.1", 8011}));
    EXPECT_EQ(parse_endpoint("10.66.0.1:8011").str(), "10.66.0.1:8011");
    for (auto bad : {"10.66.0.1", "10.66.0:80", "host:80", "1.2.3.4:70000", "1.2.3.256:1"}) {
        EXPECT_EQ(code_of([&] { parse_endpoint(bad); }), Errc::Parse) << bad;
    }
}

TEST(Fleet, Parse) {
    auto f = parse_fleet_config(
        "# bench\n"
        "platform hq_port=9011 yy_port=9841 agps_port=9447 http_port=9080\n"
        "device serial=690217122612463 protocol=YY iccid=8988211000000276405F phone=+8613800000002 "
        "master=+441 home=22.680193,114.146846 interval=10 engine_relay=yes agps_user=u agps_pwd=p\n"
        "device serial=1700012345 protocol=HQ phone=+8613800000001 waypoints=1,2;3,4\n");
    ASSERT_EQ(f.devices.size(), 2u);
    EXPECT_EQ(f.platform.hq_port, 9011);
    const auto& d = f.devices[0];
    EXPECT_EQ(d.protocol_family, ProtocolFamily::Yy);
    EXPECT_EQ(d.identity.portal.user, "2612463");
    EXPECT_EQ(d.report_interval_s, 10);
    EXPECT_TRUE(d.engine_relay);
    ASSERT_TRUE(d.agps);
    EXPECT_EQ(d.agps->user, "u");
    EXPECT_EQ(f.devices[1].waypoints.size(), 2u);
    EXPECT_EQ(f.find("1700012345"), &f.devices[1]);
}

TEST(Fleet, Errors) {
    auto line_of = [](std::string_view text) {
        try {
            parse_fleet_config(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::Config);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(line_of("\n\ndevice serial=1 phone=+1\n").find("line 3"), std::string::npos);
    EXPECT_NE(line_of("device serial=1700012345 phone=+1 bogus=1\n").find("line 1"), std::string::npos);
    EXPECT_NE(line_of("device serial=1700012345 phone=+1\ndevice serial=1700012345 phone=+2\n"), "no error");
    EXPECT_NE(line_of("device serial=1700012345 phone=+1\ndevice serial=1700012346 phone=+1\n"), "no error");
    EXPECT_NE(line_of("platform hq_port=1 yy_port=1\n"), "no error");
    EXPECT_NE(line_of("device serial=1700012345 phone=+1 interval=0\n"), "no error");
    EXPECT_NE(line_of("frobnicate\n"), "no error");
}
