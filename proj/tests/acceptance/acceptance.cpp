// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fuzz.hpp"
#include "gpslab/attack/classify.hpp"
#include "gpslab/attack/spoof.hpp"
#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/hq.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/net/sim_network.hpp"
#include "gpslab/platform/platform.hpp"
#include "gpslab/scenario/runner.hpp"
#include "samples.hpp"

using namespace gpslab;
namespace t = gpslab::testing;
using Wall = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string why;

    void need(bool ok, const std::string& what) {
        if (!ok && pass) why = what;
        pass = pass && ok;
    }
};

double seconds_since(Wall::time_point t0) {
    return std::chrono::duration<double>(Wall::now() - t0).count();
}

scenario::RunReport run_named(const std::string& name, std::uint64_t seed = 0) {
    return scenario::run_scenario(scenario::load_scenario(std::string(GPSLAB_SCENARIOS) + "/" + name), {true, seed});
}

void scenarios_pass(Outcome& o, std::initializer_list<const char*> names, double limit_s = 0) {
    for (const char* n : names) {
        const auto t0 = Wall::now();
        const auto r = run_named(n);
        const double took = seconds_since(t0);
        std::size_t passed = 0;
        for (const auto& a : r.asserts) passed += a.pass;
        o.need(r.passed(), std::string(n) + " " + std::to_string(passed) + "/" + std::to_string(r.asserts.size()) +
                               (r.error.empty() ? "" : " error: " + r.error));
        if (limit_s > 0) o.need(took < limit_s, std::string(n) + " took " + std::to_string(took) + " s");
    }
}

Outcome verbatim_codecs() {
    Outcome o;
    const auto t0 = Wall::now();
    for (auto s : {t::kV1, t::kNbr, t::kLink, t::kNbr2}) {
        const auto m = hq::parse(s);
        o.need(m.serial == "17000XXXXX", "hq serial");
        o.need(hq::serialize(m) == s, "hq round trip " + std::string(s));
    }
    const auto v1 = std::get<hq::V1>(hq::parse(t::kV1).body);
    o.need(v1.lat == WireCoordinate{"2240.8116", 'N'} && v1.lon == WireCoordinate{"11408.8108", 'E'}, "V1 coords");
    o.need(v1.fix == 'A' && v1.status_hex == "FFFFFFFF", "V1 fix/status");
    o.need(hq::timestamp(hq::parse(t::kV1)).iso8601() == "2019-01-10T11:51:12Z", "V1 time");
    o.need(std::get<hq::Link>(hq::parse(t::kLink).body).fields_raw == std::vector<std::string>{"22", "0", "6", "0", "0"},
           "LINK fields");
    o.need(std::get<hq::Nbr>(hq::parse(t::kNbr).body).fields_raw.size() == 7, "NBR fields");

    const auto f = yy::parse(t::captured_forward());
    const auto& s = std::get<yy::SmsForward>(f.payload);
    o.need(t::captured_forward().size() == 79 && f.frame_type == 0xF2 && f.check == 0xF3, "forward framing");
    o.need(s.serial == "690217122612463" && s.iccid == "8988211000000276405F", "forward ids");
    o.need(s.sender == "+440025239" && s.text == "Status", "forward sms");
    o.need(s.datetime.iso8601() == "2019-01-09T10:54:17Z", "forward time");
    o.need(yy::serialize(f) == t::captured_forward(), "forward round trip");

    const auto login = agps::parse_login(t::kAgpsLogin);
    o.need(login.cmd == "full" && login.user == "XXXXXX@gmail.com" && login.pwd == "XXXXXX", "agps creds");
    o.need(std::abs(login.position.lat_deg - 22.680193) < 1e-9 && std::abs(login.position.lon_deg - 114.146846) < 1e-9,
           "agps position");
    o.need(agps::serialize_login(login) == t::kAgpsLogin, "agps login round trip");

    agps::Response resp;
    resp.blob = agps::assistance_blob(login.position);
    const auto wire = agps::serialize_response(resp);
    o.need(to_string(wire).starts_with(t::kAgpsHeader), "agps header bytes");
    const auto back = agps::parse_response(wire);
    o.need(back.banner == agps::kBanner && back.content_type == "application/ubx" && back.blob.size() == 2856,
           "agps header fields");
    o.need(agps::serialize_response(back) == wire, "agps response round trip");
    o.need(seconds_since(t0) < 1.0, "slower than 1 s");
    return o;
}

Outcome conversion_oracle() {
    Outcome o;
    const auto t0 = Wall::now();
    o.need(std::abs(ddmm_to_degrees("2240.8116", 'N') - 22.680193) <= 1e-6, "2240.8116N");
    o.need(std::abs(ddmm_to_degrees("11408.8108", 'E') - 114.146846) <= 1e-6, "11408.8108E");
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10000; ++i) {
        const double lat = t::uniform(rng, -90, 90), lon = t::uniform(rng, -180, 180);
        const double lat2 = ddmm_to_degrees(degrees_to_ddmm(lat, Axis::Latitude));
        const double lon2 = ddmm_to_degrees(degrees_to_ddmm(lon, Axis::Longitude));
        if (std::abs(lat2 - lat) > kDdmmQuantumDeg || std::abs(lon2 - lon) > kDdmmQuantumDeg) {
            o.need(false, "round trip off at " + std::to_string(lat) + "," + std::to_string(lon));
            break;
        }
    }
    o.need(seconds_since(t0) < 1.0, "slower than 1 s");
    return o;
}

Outcome fuzz_totality() {
    Outcome o;
    const auto t0 = Wall::now();
    for (const auto& target : t::fuzz_targets()) {
        std::string first;
        const auto escapes = t::fuzz_escapes(target, 0xACCE97 + target.name.size(), 100000, &first);
        o.need(escapes == 0, target.name + ": " + std::to_string(escapes) + " escapes, first " + first);
    }
    const double took = seconds_since(t0);
    o.need(took < 30.0, "took " + std::to_string(took) + " s");
    return o;
}

Outcome forge_position() {
    Outcome o;
    scenarios_pass(o, {"forge_position"});
    // and straight through the library: serial plus position is enough
    SimClock clock;
    FleetConfig fleet;
    DeviceConfig d;
    d.identity = provision("1700054321", "", "+8613800000002");
    fleet.devices.push_back(d);
    platform::Platform p("platform", fleet, clock, platform::seeded_token_source(7));
    net::SimNetwork net;
    p.listen_sim(net);
    attack::spoof_position(net, {"127.0.0.1", 8011}, "1700054321", make_position(39.056417, 126.2572),
                           SimTimestamp::from_civil({2019, 1, 12}, {16, 43, 24}));
    const auto doc = platform::tracking_json(p.registry(), p.store(), 82383);
    o.need(doc.find(R"("latitude":"39.056417","longitude":"126.257200")") != std::string::npos, "tracking doc " + doc);
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto suite = scenario::load_scenario(std::string(GPSLAB_SCENARIOS) + "/all");
    std::size_t compared = 0;
    for (const auto& name : suite.suite) {
        const auto a = run_named(name, 7), b = run_named(name, 7);
        o.need(a.files.size() == b.files.size(), name + " artifact sets differ");
        for (std::size_t i = 0; i < a.files.size() && i < b.files.size(); ++i) {
            o.need(a.files[i] == b.files[i], name + "/" + a.files[i].first + " differs");
            ++compared;
        }
    }
    o.need(compared >= suite.suite.size() * 2, "too few artifacts compared");
    return o;
}

// Random well-formed frames per protocol.
Bytes gen_hq(std::mt19937_64& rng) {
    const auto serial = "1" + t::random_digits(rng, 9);
    const auto ts = SimClock::kDefaultStart.plus(static_cast<std::int64_t>(rng() % 300000000));
    hq::Message m{serial, {}};
    switch (rng() % 3) {
        case 0: m.body = hq::make_v1(make_position(t::uniform(rng, -90, 90), t::uniform(rng, -180, 180)), ts); break;
        case 1: m.body = hq::Nbr{ts.time_of_day(), {"310", "26", t::random_digits(rng, 2)}, ts.date(), "FFFFFFFF"}; break;
        default: m.body = hq::Link{ts.time_of_day(), {"22", "0", t::random_digits(rng, 1)}, ts.date(), "FFFFFFF"}; break;
    }
    return to_bytes(hq::serialize(m));
}

Bytes gen_yy(std::mt19937_64& rng) {
    if (rng() % 4 == 0) {
        auto payload = t::random_bytes(rng, 200);
        return yy::serialize(yy::make_opaque_frame(static_cast<std::uint8_t>(0x10 + rng() % 2), payload));
    }
    yy::SmsForward s;
    s.serial = t::random_digits(rng, 15);
    s.iccid = "8988" + t::random_digits(rng, 15) + "F";
    s.datetime = SimClock::kDefaultStart.plus(static_cast<std::int64_t>(rng() % 300000000));
    s.sender = "+" + t::random_digits(rng, 1 + rng() % 14);
    std::uniform_int_distribution<int> ch(0x20, 0x7E);
    s.text.resize(rng() % 160);
    for (auto& c : s.text) c = static_cast<char>(ch(rng));
    return yy::serialize(yy::make_frame(s));
}

Bytes gen_login(std::mt19937_64& rng) {
    agps::Login l;
    l.user = t::random_digits(rng, 8) + "@example.com";
    l.pwd = t::random_digits(rng, 6);
    l.position = make_position(t::uniform(rng, -90, 90), t::uniform(rng, -180, 180), t::uniform(rng, 0, 500));
    return to_bytes(agps::serialize_login(l));
}

Bytes gen_response(std::mt19937_64& rng) {
    agps::Response r;
    r.blob = agps::assistance_blob(make_position(t::uniform(rng, -90, 90), t::uniform(rng, -180, 180)),
                                   rng() % 4096);
    return agps::serialize_response(r);
}

Outcome classifier() {
    Outcome o;
    std::mt19937_64 rng(12);
    const std::vector<std::pair<attack::Protocol, std::function<Bytes(std::mt19937_64&)>>> gens{
        {attack::Protocol::Hq, gen_hq},
        {attack::Protocol::Yy, gen_yy},
        {attack::Protocol::AgpsLogin, gen_login},
        {attack::Protocol::AgpsResponse, gen_response},
    };
    for (const auto& [want, gen] : gens) {
        int wrong = 0;
        for (int i = 0; i < 1000; ++i) wrong += attack::classify(gen(rng)) != want;
        o.need(wrong == 0, std::string(attack::protocol_name(want)) + ": " + std::to_string(wrong) + " misclassified");
    }
    int loud = 0;
    for (int i = 0; i < 10000; ++i) loud += attack::classify(t::random_bytes(rng, 1024)) != attack::Protocol::Unknown;
    o.need(loud == 0, std::to_string(loud) + " noise buffers got a protocol");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"verbatim_codecs", verbatim_codecs},
        {"conversion_oracle", conversion_oracle},
        {"fuzz_totality", fuzz_totality},
        {"redirect_mitm", [] { Outcome o; scenarios_pass(o, {"redirect_mitm"}, 5.0); return o; }},
        {"forge_position", forge_position},
        {"sms_relay+status_bypass", [] { Outcome o; scenarios_pass(o, {"sms_relay", "status_bypass"}); return o; }},
        {"enum_range", [] { Outcome o; scenarios_pass(o, {"enum_range"}, 10.0); return o; }},
        {"idor_api+idor_portal_history", [] { Outcome o; scenarios_pass(o, {"idor_api", "idor_portal_history"}); return o; }},
        {"default_creds", [] { Outcome o; scenarios_pass(o, {"default_creds"}); return o; }},
        {"geofence_unauth+engine_stop_unauth",
         [] { Outcome o; scenarios_pass(o, {"geofence_unauth", "engine_stop_unauth"}); return o; }},
        {"determinism_seed7", determinism},
        {"classifier", classifier},
    };
    int failures = 0;
    int n = 0;
    for (const auto& c : criteria) {
        ++n;
        Outcome o;
        const auto t0 = Wall::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.why = std::string("threw: ") + e.what();
        }
        const double took = seconds_since(t0);
        std::printf("%s %d %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", n, c.name, took, o.pass ? "" : " ",
                    o.why.c_str());
        failures += !o.pass;
    }
    std::fflush(stdout);
    return failures;
}
