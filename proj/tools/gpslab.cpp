// gpslab: servers, emulators, attack clients and the scenario runner.

#include <csignal>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "gpslab/attack/classify.hpp"
#include "gpslab/attack/enumerate.hpp"
#include "gpslab/attack/relay.hpp"
#include "gpslab/attack/spoof.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"
#include "gpslab/net/tcp.hpp"
#include "gpslab/platform/platform.hpp"
#include "gpslab/scenario/runner.hpp"
#include "gpslab/tracker/host.hpp"

using namespace gpslab;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signals() {
    struct sigaction sa{};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
}

// Sleeps until a signal arrives or `seconds` (if > 0) have passed, calling
// `tick` once a second.
void run_until_stopped(int seconds, const std::function<void()>& tick = {}) {
    const auto start = std::chrono::steady_clock::now();
    auto next = start + std::chrono::seconds(1);
    while (!g_stop) {
        const auto now = std::chrono::steady_clock::now();
        if (seconds > 0 && now - start >= std::chrono::seconds(seconds)) break;
        if (now >= next) {
            if (tick) tick();
            next += std::chrono::seconds(1);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

struct Globals {
    bool deterministic = false;
    std::uint64_t seed = 0;
    bool unsafe_bind = false;
};

bool is_loopback(const std::string& host) { return host.starts_with("127."); }

void check_bind(const Globals& g, const std::string& host) {
    if (!is_loopback(host) && !g.unsafe_bind) {
        throw Error(Errc::Config, host,
                    "refusing to listen on " + host + "; only 127.0.0.0/8 is allowed without --unsafe-bind");
    }
}

platform::TokenSource tokens(const Globals& g) {
    return g.deterministic ? platform::seeded_token_source(g.seed) : platform::random_token_source();
}

std::unique_ptr<httplib::Client> http_client(const std::string& url) {
    auto c = std::make_unique<httplib::Client>(url);
    c->set_connection_timeout(2, 0);
    c->set_read_timeout(10, 0);
    return c;
}

std::string fetch(const std::string& server, const std::string& path) {
    auto c = http_client(server);
    auto res = c->Get(path);
    if (!res) throw Error(Errc::Network, server, "cannot reach " + server);
    if (res->status != 200) throw Error(Errc::NotFound, path, "HTTP " + std::to_string(res->status) + ": " + res->body);
    return res->body;
}

std::string post_form(const std::string& server, const std::string& path, const httplib::Params& params) {
    auto c = http_client(server);
    auto res = c->Post(path, params);
    if (!res) throw Error(Errc::Network, server, "cannot reach " + server);
    if (res->status != 200) throw Error(Errc::Config, path, "HTTP " + std::to_string(res->status) + ": " + res->body);
    return res->body;
}

// Bench-only endpoints on `serve --emulate`: the SMS network lives in the
// server process, so CLI clients reach it over HTTP.
platform::Platform::HttpHook bench_hook(sms::SmsBus& bus) {
    return [&bus](const platform::HttpRequest& req) -> std::optional<platform::HttpResponse> {
        using nlohmann::json;
        if (req.method != "POST" || !req.path.starts_with("/_bench/")) return std::nullopt;
        try {
            if (req.path == "/_bench/sms") {
                const auto from = req.param("from").value_or("");
                const auto to = req.param("to").value_or("");
                const auto before = bus.log().size();
                const auto d = attack::inject_sms(bus, from, to, req.param("body").value_or(""));
                bus.wait_idle();
                json replies = json::array();
                const auto log = bus.log();
                for (auto i = before + 1; i < log.size(); ++i) {
                    if (log[i].msg.to == from && log[i].msg.from == to) replies.push_back(log[i].msg.body);
                }
                return platform::HttpResponse{
                    200, "application/json",
                    json{{"delivered", d == sms::Delivery::Delivered}, {"replies", replies}}.dump(), {}};
            }
            if (req.path == "/_bench/enum") {
                attack::PhoneRange range;
                range.prefix = req.param("prefix").value_or("");
                range.first = static_cast<std::uint64_t>(text::to_int(req.param("first").value_or("0")).value_or(0));
                range.count = static_cast<std::size_t>(text::to_int(req.param("count").value_or("0")).value_or(0));
                range.width = static_cast<int>(text::to_int(req.param("width").value_or("0")).value_or(0));
                const auto probes = attack::enumerate_numbers(bus, req.param("from").value_or("+10000000000"), range);
                json arr = json::array();
                for (const auto& p : probes) {
                    arr.push_back(json{{"phone", p.phone},
                                       {"verdict", std::string(attack::verdict_name(p.verdict))},
                                       {"serial", p.serial.value_or("")}});
                }
                return platform::HttpResponse{200, "application/json", arr.dump(), {}};
            }
        } catch (const Error& e) {
            return platform::HttpResponse{400, "application/json", json{{"error", e.what()}}.dump(), {}};
        }
        return std::nullopt;
    };
}

int cmd_serve(const Globals& g, const std::string& config_path, bool emulate, const std::string& history,
              int duration) {
    const auto fleet = load_fleet_config(config_path);
    check_bind(g, fleet.platform.bind);
    SystemClock clock;
    platform::Platform platform("platform", fleet, clock, tokens(g));
    if (!history.empty()) platform.persist_to(history);

    net::TcpNetwork network;
    sms::SmsBus bus(&clock);
    std::unique_ptr<tracker::FleetHost> fleet_host;
    if (emulate) {
        fleet_host = std::make_unique<tracker::FleetHost>(fleet, network, bus, clock);
        platform.set_device_control(fleet_host.get());
        platform.set_http_hook(bench_hook(bus));
    }
    const auto b = platform.start_tcp();
    std::printf("hq %s\nyy %s\nagps %s\nhttp %s\n", b.hq.str().c_str(), b.yy.str().c_str(), b.agps.str().c_str(),
                b.http.str().c_str());
    std::fflush(stdout);
    if (fleet_host) {
        fleet_host->attach_all();
        fleet_host->step_all();
    }
    run_until_stopped(duration, [&] {
        if (fleet_host) fleet_host->step_all();
    });
    network.shutdown();
    platform.stop();
    for (const auto& l : platform.log().lines()) std::fprintf(stderr, "%s\n", l.c_str());
    return 0;
}

int cmd_emulate(const std::string& config_path, const std::string& device, int duration) {
    auto fleet = load_fleet_config(config_path);
    if (!device.empty()) {
        std::erase_if(fleet.devices, [&](const DeviceConfig& d) { return d.identity.serial != device; });
        if (fleet.devices.empty()) throw Error(Errc::Config, device, "no device " + device + " in the fleet");
    }
    SystemClock clock;
    net::TcpNetwork network;
    sms::SmsBus bus(&clock);
    tracker::FleetHost hosts(fleet, network, bus, clock);
    for (auto* h : hosts.hosts()) {
        h->set_observer([](const std::string& serial, const tracker::OutboundFrame& f, bool ok) {
            std::printf("%s %s -> %s %s\n", serial.c_str(), f.what.c_str(), f.to.str().c_str(), ok ? "sent" : "dropped");
            std::fflush(stdout);
        });
    }
    hosts.attach_all();
    hosts.step_all();
    run_until_stopped(duration, [&] { hosts.step_all(); });
    network.shutdown();
    return 0;
}

int cmd_spoof(const std::string& server, const std::string& serial, double lat, double lon) {
    SystemClock clock;
    net::TcpNetwork network;
    const auto frame = attack::spoof_position(network, parse_endpoint(server), serial, make_position(lat, lon), clock.now());
    std::printf("%s\n", to_string(frame).c_str());
    network.shutdown();
    return 0;
}

int cmd_relay(const Globals& g, const std::string& listen, const std::string& upstream, double dlat, double dlon,
              const std::string& transform, bool udp, const std::string& transcript, int duration) {
    attack::RelaySpec spec;
    spec.listen = parse_endpoint(listen);
    spec.upstream = parse_endpoint(upstream);
    check_bind(g, spec.listen.host);
    spec.dlat = dlat;
    spec.dlon = dlon;
    if (transform.empty()) {
        spec.transform = (dlat != 0.0 || dlon != 0.0) ? attack::Transform::PositionOffset : attack::Transform::Identity;
    } else if (transform == "identity") {
        spec.transform = attack::Transform::Identity;
    } else if (transform == "record_only") {
        spec.transform = attack::Transform::RecordOnly;
    } else if (transform == "position_offset") {
        spec.transform = attack::Transform::PositionOffset;
    } else {
        throw Error(Errc::Config, transform, "unknown transform " + transform);
    }
    spec.transport = udp ? attack::Transport::Udp : attack::Transport::Tcp;
    SystemClock clock;
    std::string text;
    if (udp) {
        attack::UdpRelay relay(spec, clock);
        std::printf("relay udp %s -> %s\n", relay.start().str().c_str(), spec.upstream.str().c_str());
        std::fflush(stdout);
        run_until_stopped(duration);
        relay.stop();
        text = relay.transcript().text();
    } else {
        net::TcpNetwork network;
        auto relay = attack::Relay::create(spec, network, clock);
        net::TcpServer server;
        server.start(spec.listen, relay->factory());
        std::printf("relay tcp %s -> %s (%s)\n", server.bound().str().c_str(), spec.upstream.str().c_str(),
                    std::string(attack::transform_name(spec.transform)).c_str());
        std::fflush(stdout);
        run_until_stopped(duration);
        server.stop();
        network.shutdown();
        text = relay->transcript().text();
    }
    if (!transcript.empty()) {
        std::ofstream(transcript, std::ios::binary | std::ios::trunc) << text;
    } else {
        std::fputs(text.c_str(), stdout);
    }
    return 0;
}

int cmd_classify(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Config, path, "cannot open " + path);
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::printf("%s\n", std::string(attack::protocol_name(attack::classify(bytes))).c_str());
    return 0;
}

int cmd_scenario(const Globals& g, const std::string& path, const std::string& out) {
    const auto sc = scenario::load_scenario(path);
    const scenario::RunOptions opt{g.deterministic, g.seed};
    if (sc.suite.empty()) {
        const auto report = scenario::run_scenario(sc, opt);
        std::fputs(report.text().c_str(), stdout);
        if (!out.empty()) scenario::write_artifacts(report, out);
        return report.passed() ? 0 : 1;
    }
    const auto base = std::filesystem::path(path).parent_path();
    std::vector<scenario::RunReport> reports;
    for (const auto& entry : sc.suite) {
        const auto sub = scenario::load_scenario((base / entry).string());
        auto report = scenario::run_scenario(sub, opt);
        std::fputs(report.text().c_str(), stdout);
        if (!out.empty()) scenario::write_artifacts(report, (std::filesystem::path(out) / sub.name).string());
        reports.push_back(std::move(report));
    }
    const auto table = scenario::suite_table(reports);
    std::printf("\n%s", table.c_str());
    if (!out.empty()) std::ofstream(std::filesystem::path(out) / "summary.txt", std::ios::binary) << table;
    for (const auto& r : reports) {
        if (!r.passed()) return 1;
    }
    return 0;
}

int cmd_history(const std::string& serial, const std::string& server, const std::string& file) {
    if (!file.empty()) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error(Errc::Config, file, "cannot open " + file);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty()) continue;
            try {
                const auto r = platform::parse_history_line(line);
                if (serial.empty() || r.serial == serial) std::printf("%s\n", line.c_str());
            } catch (const Error& e) {
                std::fprintf(stderr, "%s:%d: %s\n", file.c_str(), n, e.what());
            }
        }
        return 0;
    }
    std::string path = "/admin/history";
    if (!serial.empty()) path += "?serial=" + httplib::detail::encode_query_param(serial);
    std::fputs(fetch(server, path).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPS tracker protocol lab (loopback only)"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_flag("--deterministic", g.deterministic, "Seeded session tokens; reproducible runs");
    app.add_option("--seed", g.seed, "Seed for --deterministic");
    app.add_flag("--unsafe-bind", g.unsafe_bind, "Allow listening on non-loopback addresses");

    std::string config, history, device, out, server = "http://127.0.0.1:8080", file, serial;
    bool emulate = false;
    int duration = 0;

    auto* serve = app.add_subcommand("serve", "Run the collection platform");
    serve->add_option("--config", config, "Fleet config")->required();
    serve->add_flag("--emulate", emulate, "Also run the fleet's trackers and the bench SMS endpoints");
    serve->add_option("--history", history, "Append records to this file");
    serve->add_option("--duration", duration, "Stop after N seconds (0 = until signalled)");

    auto* emu = app.add_subcommand("emulate", "Run tracker emulators against a platform");
    emu->add_option("--config", config, "Fleet config")->required();
    emu->add_option("--device", device, "Only this serial");
    emu->add_option("--duration", duration, "Stop after N seconds (0 = until signalled)");

    auto* sms_cmd = app.add_subcommand("sms", "SMS network");
    sms_cmd->require_subcommand(1);
    std::string from, to, body;
    auto* sms_send = sms_cmd->add_subcommand("send", "Send one SMS through a serve --emulate instance");
    sms_send->add_option("--from", from, "Claimed sender")->required();
    sms_send->add_option("--to", to, "Recipient")->required();
    sms_send->add_option("--body", body, "Text")->required();
    sms_send->add_option("--server", server, "Platform HTTP base URL");

    double lat = 0, lon = 0;
    std::string target;
    auto* spoof = app.add_subcommand("spoof", "Send a forged position report");
    spoof->add_option("--server", target, "Platform HQ endpoint ip:port")->required();
    spoof->add_option("--serial", serial, "Victim serial")->required();
    spoof->add_option("--lat", lat, "Latitude, decimal degrees")->required();
    spoof->add_option("--lon", lon, "Longitude, decimal degrees")->required();

    std::string listen, upstream, transform, transcript;
    double dlat = 0, dlon = 0;
    bool udp = false;
    auto* relay = app.add_subcommand("relay", "Man-in-the-middle relay");
    relay->add_option("--listen", listen, "ip:port")->required();
    relay->add_option("--upstream", upstream, "ip:port")->required();
    relay->add_option("--dlat", dlat, "Latitude offset for V1 reports");
    relay->add_option("--dlon", dlon, "Longitude offset for V1 reports");
    relay->add_option("--transform", transform, "identity | record_only | position_offset");
    relay->add_flag("--udp", udp, "Datagram relay");
    relay->add_option("--transcript", transcript, "Write the relay log here instead of stdout");
    relay->add_option("--duration", duration, "Stop after N seconds (0 = until signalled)");

    std::string prefix, enum_from = "+10000000000";
    std::size_t count = 0;
    std::uint64_t first = 0;
    int width = 0;
    auto* enumerate = app.add_subcommand("enum", "Probe a phone-number range with Status SMS");
    enumerate->add_option("--prefix", prefix, "Number prefix")->required();
    enumerate->add_option("--count", count, "How many numbers")->required();
    enumerate->add_option("--first", first, "First suffix");
    enumerate->add_option("--width", width, "Zero-pad suffixes to this width");
    enumerate->add_option("--from", enum_from, "Attacker number");
    enumerate->add_option("--server", server, "Platform HTTP base URL");

    auto* classify = app.add_subcommand("classify", "Name the protocol of a captured frame");
    classify->add_option("--file", file, "Raw bytes")->required();

    auto* scen = app.add_subcommand("scenario", "Scripted reproductions");
    scen->require_subcommand(1);
    std::string scen_path;
    auto* scen_run = scen->add_subcommand("run", "Run a scenario or suite file");
    scen_run->add_option("path", scen_path, "Scenario file")->required();
    scen_run->add_option("--out", out, "Write report and artifacts here");

    auto* hist = app.add_subcommand("history", "History store");
    hist->require_subcommand(1);
    auto* hist_dump = hist->add_subcommand("dump", "Print history lines");
    hist_dump->add_option("--serial", serial, "Only this serial");
    hist_dump->add_option("--server", server, "Platform HTTP base URL");
    hist_dump->add_option("--file", file, "Read a history file instead of a server");

    auto* admin = app.add_subcommand("admin", "Platform administration");
    admin->require_subcommand(1);
    auto* admin_devices = admin->add_subcommand("devices", "Device id to serial mapping");
    admin_devices->add_option("--server", server, "Platform HTTP base URL");

    CLI11_PARSE(app, argc, argv);
    install_signals();

    try {
        if (*serve) return cmd_serve(g, config, emulate, history, duration);
        if (*emu) return cmd_emulate(config, device, duration);
        if (*sms_send) {
            std::printf("%s\n", post_form(server, "/_bench/sms", {{"from", from}, {"to", to}, {"body", body}}).c_str());
            return 0;
        }
        if (*spoof) return cmd_spoof(target, serial, lat, lon);
        if (*relay) return cmd_relay(g, listen, upstream, dlat, dlon, transform, udp, transcript, duration);
        if (*enumerate) {
            const auto res = nlohmann::json::parse(post_form(
                server, "/_bench/enum",
                {{"prefix", prefix}, {"count", std::to_string(count)}, {"first", std::to_string(first)},
                 {"width", std::to_string(width)}, {"from", enum_from}}));
            std::size_t hits = 0;
            for (const auto& p : res) {
                const auto verdict = p.at("verdict").get<std::string>();
                hits += verdict == "DELIVERED_REPLIED";
                std::printf("%s %s %s\n", p.at("phone").get<std::string>().c_str(), verdict.c_str(),
                            p.at("serial").get<std::string>().c_str());
            }
            std::printf("hits %zu\n", hits);
            return 0;
        }
        if (*classify) return cmd_classify(file);
        if (*scen_run) return cmd_scenario(g, scen_path, out);
        if (*hist_dump) return cmd_history(serial, server, file);
        if (*admin_devices) {
            std::printf("%s\n", fetch(server, "/admin/devices").c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "gpslab: %s\n", e.what());
        return e.code() == Errc::Config || e.code() == Errc::Provisioning ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gpslab: %s\n", e.what());
        return 1;
    }
    return 0;
}
