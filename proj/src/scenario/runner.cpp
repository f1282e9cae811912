#include "gpslab/scenario/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "json.hpp"

#include "gpslab/attack/enumerate.hpp"
#include "gpslab/attack/relay.hpp"
#include "gpslab/attack/spoof.hpp"
#include "gpslab/codec/agps.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"
#include "gpslab/net/sim_network.hpp"
#include "gpslab/platform/platform.hpp"
#include "gpslab/sms/bus.hpp"
#include "gpslab/tracker/host.hpp"

namespace gpslab::scenario {

namespace {

struct Value {
    bool numeric = false;
    double num = 0.0;
    std::string str;

    static Value of(double v) { return {true, v, {}}; }
    static Value of(std::string s) { return {false, 0.0, std::move(s)}; }
    // Numeric when the text is a number; the text is kept for display and
    // for string comparison.
    static Value parse(const std::string& s) {
        if (auto v = text::to_double(s)) return {true, *v, s};
        if (auto i = text::to_int(s)) return {true, static_cast<double>(*i), s};
        return of(s);
    }

    std::string text() const { return numeric && str.empty() ? show() : str; }

    std::string show() const {
        if (!numeric) return "\"" + str + "\"";
        if (!str.empty()) return str;
        if (num == std::floor(num) && std::fabs(num) < 1e15) return std::to_string(static_cast<long long>(num));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9f", num);
        return buf;
    }
};

struct CallResult {
    int status = 0;
    std::string body;
};

struct SmsResult {
    bool delivered = false;
    std::vector<std::string> replies;
    std::optional<std::string> verdict;
    std::optional<std::string> command;
};

struct EnumResult {
    std::vector<attack::Probe> probes;
    std::set<std::string> truth;  // fleet phones inside the range
};

struct AgpsResult {
    bool ok = false;
    Bytes blob;
};

struct FrameEvent {
    SimTimestamp ts;
    std::string what;
    Endpoint to;
    bool delivered = false;
};

std::string fnv1a_hex(const Bytes& b) {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto c : b) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string arg(const Args& a, const std::string& k, const std::string& dflt = {}) {
    const auto it = a.find(k);
    return it == a.end() ? dflt : it->second;
}

double num_arg(const Args& a, const std::string& k) {
    const auto s = arg(a, k);
    const auto v = text::to_double(s);
    if (!v) throw Error(Errc::Config, k, k + "= is not a number: '" + s + "'");
    return *v;
}

std::int64_t int_arg(const Args& a, const std::string& k, std::int64_t dflt) {
    if (!a.count(k)) return dflt;
    const auto v = text::to_int(a.at(k));
    if (!v) throw Error(Errc::Config, k, k + "= is not an integer: '" + a.at(k) + "'");
    return *v;
}

std::string xml_unescape(std::string s) {
    const std::pair<std::string_view, std::string_view> map[] = {{"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
                                                                 {"&apos;", "'"}, {"&amp;", "&"}};
    for (const auto& [from, to] : map) {
        std::size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, from.size(), to);
            pos += to.size();
        }
    }
    return s;
}

// JSON payload of an API or portal response; the API wraps it in XML.
nlohmann::json response_json(const std::string& body) {
    std::string payload = body;
    const auto open = body.find("<GetTrackingResult>");
    const auto close = body.find("</GetTrackingResult>");
    if (open != std::string::npos && close != std::string::npos) {
        payload = xml_unescape(body.substr(open + 19, close - open - 19));
    }
    return nlohmann::json::parse(payload);
}

class World {
public:
    World(const Scenario& sc, const RunOptions& opt)
        : sc_(sc),
          bus_(&clock_),
          tokens_(opt.deterministic ? platform::seeded_token_source(opt.seed) : platform::random_token_source()) {
        fleet_host_ = std::make_unique<tracker::FleetHost>(sc.fleet, net_, bus_, clock_);
        const auto hosts = fleet_host_->hosts();
        for (std::size_t i = 0; i < hosts.size(); ++i) {
            const auto serial = sc.fleet.devices[i].identity.serial;
            trackers_[serial] = hosts[i];
            hosts[i]->set_observer([this, serial](const std::string&, const tracker::OutboundFrame& f, bool ok) {
                frames_[serial].push_back({clock_.now(), f.what, f.to, ok});
            });
        }
        net_.set_tap([this](std::uint64_t id, const Endpoint& server, net::SimNetwork::Direction dir, const Bytes& b) {
            tap_.push_back(clock_.now().iso8601() + "\tconn=" + std::to_string(id) + "\t" + server.str() + "\t" +
                           (dir == net::SimNetwork::Direction::ToServer ? "up" : "down") + "\t" + hex_upper(b));
        });
    }

    ~World() {
        for (auto* h : started_) h->detach();
    }

    SimTimestamp start() const { return start_; }

    void advance_to(std::int64_t at) {
        const auto target = start_.plus(at);
        while (clock_.now() < target) {
            clock_.advance(1);
            for (auto* h : started_) h->step();
        }
    }

    void execute(const Step& s) {
        const auto& a = s.args;
        switch (s.action) {
            case Action::StartPlatform: start_platform(); break;
            case Action::StartAttacker: start_attacker(a); break;
            case Action::StartTracker: start_tracker(arg(a, "serial", "all")); break;
            case Action::Sms: send_sms(a); break;
            case Action::Spoof: spoof(a); break;
            case Action::Relay: relay(a); break;
            case Action::Wait: break;
            case Action::ApiCall: api_call(a); break;
            case Action::PortalCall: portal_call(a); break;
            case Action::Enum: enumerate(a); break;
            case Action::Agps: agps(a); break;
            case Action::Assert: break;
        }
    }

    AssertResult check(const Step& s) {
        AssertResult r{s.line, s.source, false, {}};
        const auto& c = *s.check;
        try {
            const auto lhs = metric(c.lhs);
            Value rhs = c.literal ? Value::parse(*c.literal) : metric(*c.ref);
            if (c.ref && c.ref_offset != 0.0) {
                if (!rhs.numeric) throw Error(Errc::Config, "offset", "offset applied to a non-number");
                rhs.num += c.ref_offset;
                rhs.str.clear();
            }
            r.pass = compare(lhs, c.op, rhs, c.tol);
            r.detail = "got " + lhs.show() + ", want " + c.op + " " + rhs.show();
            if (c.op == "~=") r.detail += " tol " + Value::of(c.tol).show();
        } catch (const Error& e) {
            r.detail = e.what();
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        return r;
    }

    std::vector<std::pair<std::string, std::string>> artifacts() {
        std::vector<std::pair<std::string, std::string>> files;
        if (platform_) files.emplace_back("history.tsv", platform_->store().dump());
        for (const auto& [name, p] : attackers_) files.emplace_back("history-" + name + ".tsv", p->store().dump());
        for (const auto& [name, r] : relays_) files.emplace_back("relay-" + name + ".tsv", r->transcript().text());

        std::string t;
        for (const auto& l : tap_) t += l + "\n";
        for (const auto& e : bus_.log()) {
            t += e.ts.iso8601() + "\tsms\t" + e.msg.from + "\t" + e.msg.to + "\t" +
                 (e.delivery == sms::Delivery::Delivered ? "delivered" : "not-delivered") + "\t" +
                 text::percent_encode(e.msg.body) + "\n";
        }
        for (auto* h : started_) {
            for (const auto& e : h->sms_events()) {
                t += e.ts.iso8601() + "\ttracker\t" + h->serial() + "\t" + e.command + "\t" +
                     std::string(sms::verdict_name(e.verdict)) + (e.backdoor ? "\tbackdoor" : "") + "\n";
            }
        }
        auto logs = [&t](platform::Platform& p) {
            for (const auto& l : p.log().lines()) t += l + "\n";
        };
        if (platform_) logs(*platform_);
        for (auto& [_, p] : attackers_) logs(*p);
        files.emplace_back("transcript.txt", t);
        return files;
    }

private:
    void start_platform() {
        if (platform_) throw Error(Errc::Config, "platform", "platform already started");
        platform_ = std::make_unique<platform::Platform>("platform", sc_.fleet, clock_, tokens_);
        platform_->set_device_control(fleet_host_.get());
        platform_->listen_sim(net_);
    }

    void start_attacker(const Args& a) {
        const auto name = arg(a, "name");
        if (attackers_.count(name)) throw Error(Errc::Config, name, "attacker " + name + " already started");
        const auto host = arg(a, "host");
        if (!is_ipv4_literal(host)) throw Error(Errc::Config, host, "host= must be an IPv4 address");
        FleetConfig cfg;
        cfg.platform.bind = host;
        cfg.platform.hq_port = static_cast<std::uint16_t>(int_arg(a, "hq_port", 8011));
        cfg.platform.yy_port = static_cast<std::uint16_t>(int_arg(a, "yy_port", 8841));
        cfg.platform.agps_port = static_cast<std::uint16_t>(int_arg(a, "agps_port", 56447));
        auto p = std::make_unique<platform::Platform>(name, cfg, clock_, tokens_);
        p->listen_sim(net_);
        attackers_[name] = std::move(p);
    }

    void start_tracker(const std::string& which) {
        for (const auto& d : sc_.fleet.devices) {
            if (which != "all" && which != d.identity.serial) continue;
            auto* h = trackers_.at(d.identity.serial);
            if (started_set_.insert(h).second) {
                started_.push_back(h);
                h->attach();
                h->step();
            }
        }
    }

    void send_sms(const Args& a) {
        const auto from = arg(a, "from");
        const auto to = arg(a, "to");
        ensure_handset(from);
        tracker::TrackerHost* target = nullptr;
        for (auto* h : started_) {
            if (h->phone() == to) target = h;
        }
        const auto before_events = target ? target->sms_events().size() : 0;
        const auto before = bus_.log().size();
        SmsResult res;
        res.delivered = attack::inject_sms(bus_, from, to, arg(a, "body")) == sms::Delivery::Delivered;
        bus_.wait_idle();
        const auto log = bus_.log();
        for (std::size_t i = before + 1; i < log.size(); ++i) {
            if (log[i].msg.to == from && log[i].msg.from == to) res.replies.push_back(log[i].msg.body);
        }
        if (target) {
            const auto events = target->sms_events();
            if (events.size() > before_events) {
                res.verdict = std::string(sms::verdict_name(events.back().verdict));
                res.command = events.back().command;
            }
        }
        if (a.count("as")) sms_[a.at("as")] = std::move(res);
    }

    void ensure_handset(const std::string& phone) {
        if (bus_.is_registered(phone)) return;
        bus_.subscribe(phone, [](const SmsMessage&) {});
        handsets_.insert(phone);
    }

    void spoof(const Args& a) {
        CallResult r;
        try {
            const auto frame = attack::spoof_position(net_, parse_endpoint(arg(a, "server")), arg(a, "serial"),
                                                      make_position(num_arg(a, "lat"), num_arg(a, "lon")), clock_.now());
            r.status = 200;
            r.body = to_string(frame);
        } catch (const Error& e) {
            if (e.code() != Errc::Network) throw;
            r.status = 0;
            r.body = e.what();
        }
        if (a.count("as")) calls_[a.at("as")] = std::move(r);
    }

    void relay(const Args& a) {
        attack::RelaySpec spec;
        spec.listen = parse_endpoint(arg(a, "listen"));
        spec.upstream = parse_endpoint(arg(a, "upstream"));
        const auto t = arg(a, "transform", "identity");
        if (t == "identity") spec.transform = attack::Transform::Identity;
        else if (t == "record_only") spec.transform = attack::Transform::RecordOnly;
        else if (t == "position_offset") spec.transform = attack::Transform::PositionOffset;
        else throw Error(Errc::Config, t, "unknown transform '" + t + "'");
        if (a.count("dlat")) spec.dlat = num_arg(a, "dlat");
        if (a.count("dlon")) spec.dlon = num_arg(a, "dlon");
        auto r = attack::Relay::create(spec, net_, clock_);
        net_.listen(spec.listen, r->factory());
        relays_[arg(a, "name")] = std::move(r);
    }

    platform::Platform& need_platform() {
        if (!platform_) throw Error(Errc::Config, "platform", "start_platform has not run");
        return *platform_;
    }

    void api_call(const Args& a) {
        const auto id = arg(a, "device_id");
        platform::HttpRequest req;
        if (arg(a, "style", "soap") == "form") {
            req.method = "GET";
            req.path = std::string(platform::kApiPath) + "/GetTracking";
            req.params["DeviceID"] = id;
        } else {
            req.method = "POST";
            req.path = std::string(platform::kApiPath);
            req.headers["content-type"] = "text/xml; charset=utf-8";
            req.body =
                R"(<v:Envelope xmlns:i="http://www.w3.org/2001/XMLSchema-instance" xmlns:d="http://www.w3.org/2001/XMLSchema" )"
                R"(xmlns:c="http://schemas.xmlsoap.org/soap/encoding/" xmlns:v="http://schemas.xmlsoap.org/soap/envelope/">)"
                R"(<v:Header /><v:Body><GetTracking xmlns="http://tempuri.org/" id="o0" c:root="1"><DeviceID i:type="d:int">)" +
                id +
                R"(</DeviceID><TimeZone i:type="d:string">UTC</TimeZone><MapType i:type="d:string">Google</MapType>)"
                R"(</GetTracking></v:Body></v:Envelope>)";
        }
        const auto resp = need_platform().handle_http(req);
        calls_[arg(a, "as")] = {resp.status, resp.body};
    }

    void portal_call(const Args& a) {
        const auto op = arg(a, "op");
        platform::HttpRequest req;
        req.method = "POST";
        const auto session = arg(a, "session", "none");
        if (session != "none") req.headers["cookie"] = "session=" + sessions_.at(session);
        auto copy = [&](const char* k) {
            if (a.count(k)) req.params[k] = a.at(k);
        };
        if (op == "login") {
            req.path = "/login";
            copy("user");
            copy("pass");
        } else if (op == "history") {
            req.method = "GET";
            req.path = "/history";
            copy("serial");
        } else if (op == "geofence") {
            req.path = "/geofence";
            for (auto k : {"serial", "lat", "lon", "radius", "action"}) copy(k);
        } else if (op == "engine") {
            req.path = "/engine";
            copy("serial");
            copy("action");
        } else if (op == "password") {
            req.path = "/password";
            copy("new");
        } else {
            throw Error(Errc::Config, op, "unknown portal op '" + op + "'");
        }
        const auto resp = need_platform().handle_http(req);
        const auto label = arg(a, "as");
        calls_[label] = {resp.status, resp.body};
        if (op == "login" && resp.status == 200) {
            sessions_[label] = nlohmann::json::parse(resp.body).at("session").get<std::string>();
        } else if (op == "login") {
            sessions_[label] = "invalid";
        }
    }

    void enumerate(const Args& a) {
        attack::PhoneRange range;
        range.prefix = arg(a, "prefix");
        range.first = static_cast<std::uint64_t>(int_arg(a, "first", 0));
        range.count = static_cast<std::size_t>(int_arg(a, "count", 0));
        range.width = static_cast<int>(int_arg(a, "width", 0));
        attack::ForwardLookup lookup;
        if (a.count("lookup")) {
            auto* store = &platform_for(a.at("lookup")).store();
            lookup = [store](const std::string& phone) { return store->serial_for_phone(phone); };
        }
        const auto from = arg(a, "from");
        const bool had_handset = handsets_.count(from) > 0;
        EnumResult res;
        res.probes = attack::enumerate_numbers(bus_, from, range, lookup);
        if (had_handset) bus_.subscribe(from, [](const SmsMessage&) {});
        const auto numbers = range.numbers();
        const std::set<std::string> in_range(numbers.begin(), numbers.end());
        for (const auto& d : sc_.fleet.devices) {
            if (in_range.count(d.identity.phone)) res.truth.insert(d.identity.phone);
        }
        enums_[arg(a, "as")] = std::move(res);
    }

    void agps(const Args& a) {
        AgpsResult res;
        if (a.count("serial")) {
            auto it = trackers_.find(a.at("serial"));
            if (it == trackers_.end()) throw Error(Errc::Config, a.at("serial"), "no such tracker");
            if (auto r = it->second->run_agps_session()) {
                res.ok = true;
                res.blob = r->blob;
            }
        } else {
            agps::Login login;
            login.user = arg(a, "user");
            login.pwd = arg(a, "pwd");
            login.position = make_position(num_arg(a, "lat"), num_arg(a, "lon"));
            const auto server = a.count("server")
                                    ? parse_endpoint(a.at("server"))
                                    : Endpoint{sc_.fleet.platform.bind, sc_.fleet.platform.agps_port};
            auto buf = std::make_shared<Bytes>();
            auto sink = std::make_shared<net::FunctionSink>(
                [buf](std::span<const std::uint8_t> b) { buf->insert(buf->end(), b.begin(), b.end()); });
            if (auto conn = net_.connect(server, sink)) {
                conn->write(to_bytes(agps::serialize_login(login) + "\r\n"));
                conn->close();
                try {
                    if (const auto size = agps::peek_response_size(*buf); size && buf->size() >= *size) {
                        res.blob = agps::parse_response(std::span<const std::uint8_t>(buf->data(), *size)).blob;
                        res.ok = true;
                    }
                } catch (const Error&) {
                }
            }
        }
        agps_[arg(a, "as")] = std::move(res);
    }

    platform::Platform& platform_for(const std::string& target) {
        if (target == "platform") return need_platform();
        const auto name = target.substr(target.find(':') + 1);
        const auto it = attackers_.find(name);
        if (it == attackers_.end()) throw Error(Errc::NotFound, name, "attacker " + name + " not started");
        return *it->second;
    }

    static std::string kind_of(const std::string& target) { return target.substr(0, target.find(':')); }
    static std::string name_of(const std::string& target) { return target.substr(target.find(':') + 1); }

    Value metric(const Probe& p) {
        const auto kind = kind_of(p.target);
        if (kind == "platform" || kind == "attacker") return platform_metric(platform_for(p.target), p);
        if (kind == "tracker") return tracker_metric(name_of(p.target), p);
        if (kind == "relay") return relay_metric(*relays_.at(name_of(p.target)), p);
        if (kind == "call") return call_metric(calls_.at(name_of(p.target)), p);
        if (kind == "enum") return enum_metric(enums_.at(name_of(p.target)), p);
        if (kind == "sms") return sms_metric(sms_.at(name_of(p.target)), p);
        if (kind == "agps") return agps_metric(agps_.at(name_of(p.target)), p);
        throw Error(Errc::Config, p.target, "unknown target " + p.target);
    }

    [[noreturn]] static void unknown_metric(const Probe& p) {
        throw Error(Errc::Config, p.metric, "unknown metric '" + p.metric + "' for " + p.target);
    }

    Value platform_metric(platform::Platform& pl, const Probe& p) {
        const auto serial = arg(p.args, "serial");
        if (p.metric == "records") {
            const auto records = serial.empty() ? pl.store().all() : pl.store().for_serial(serial);
            const auto kind = p.args.count("kind") ? std::optional(parse_record_kind(p.args.at("kind"))) : std::nullopt;
            const auto since = p.args.count("since") ? std::optional(start_.plus(int_arg(p.args, "since", 0))) : std::nullopt;
            double n = 0;
            for (const auto& r : records) {
                if (kind && r.kind != *kind) continue;
                if (since && r.ts < *since) continue;
                ++n;
            }
            return Value::of(n);
        }
        if (p.metric == "latest_lat" || p.metric == "latest_lon") {
            const auto r = pl.store().latest_position(serial);
            if (!r) throw Error(Errc::NotFound, serial, "no position stored for " + serial);
            return Value::of(p.metric == "latest_lat" ? r->position->lat_deg : r->position->lon_deg);
        }
        if (p.metric == "last_meta") {
            const auto kind = parse_record_kind(arg(p.args, "kind", "POSITION"));
            const auto key = arg(p.args, "key");
            const auto records = pl.store().for_serial(serial);
            for (auto it = records.rbegin(); it != records.rend(); ++it) {
                if (it->kind != kind) continue;
                const auto m = it->meta.find(key);
                if (m == it->meta.end()) throw Error(Errc::NotFound, key, "record has no " + key);
                return Value::of(m->second);
            }
            throw Error(Errc::NotFound, serial, "no matching record for " + serial);
        }
        if (p.metric == "decode_errors") return Value::of(static_cast<double>(pl.log().count("decode-error")));
        if (p.metric == "phone_serial") {
            const auto s = pl.store().serial_for_phone(arg(p.args, "phone"));
            return Value::of(s.value_or(""));
        }
        if (p.metric == "fences") return Value::of(static_cast<double>(pl.portal().fences(serial).size()));
        unknown_metric(p);
    }

    Value tracker_metric(const std::string& serial, const Probe& p) {
        const auto it = trackers_.find(serial);
        if (it == trackers_.end()) throw Error(Errc::NotFound, serial, "no tracker " + serial);
        auto* h = it->second;
        const auto st = h->state();
        const auto stats = h->stats();
        const auto& m = p.metric;
        if (m == "engine_on") return Value::of(st.engine_on ? 1.0 : 0.0);
        if (m == "fences") return Value::of(static_cast<double>(st.geofences.size()));
        if (m == "server") return Value::of(st.server_addr.str());
        if (m == "lat") return Value::of(st.position.lat_deg);
        if (m == "lon") return Value::of(st.position.lon_deg);
        if (m == "serial") return Value::of(st.identity.serial);
        if (m == "master") return Value::of(st.identity.master_phone.value_or(""));
        if (m == "reports") return Value::of(static_cast<double>(st.report_count));
        if (m == "reboots") return Value::of(static_cast<double>(st.reboots));
        if (m == "frames_sent") return Value::of(static_cast<double>(stats.frames_sent));
        if (m == "frames_dropped") return Value::of(static_cast<double>(stats.frames_dropped));
        if (m == "sms_received") return Value::of(static_cast<double>(stats.sms_received));
        if (m == "frames") {
            const auto since = start_.plus(int_arg(p.args, "since", 0));
            const auto to = p.args.count("to") ? std::optional(parse_endpoint(p.args.at("to"))) : std::nullopt;
            const auto what = arg(p.args, "what");
            double n = 0;
            for (const auto& f : frames_[serial]) {
                if (f.ts < since || (to && f.to != *to) || (!what.empty() && f.what != what)) continue;
                if (p.args.count("delivered") && f.delivered != (p.args.at("delivered") == "1")) continue;
                ++n;
            }
            return Value::of(n);
        }
        if (m == "sms_allowed" || m == "sms_denied") {
            const auto want = m == "sms_allowed" ? sms::Verdict::Allowed : sms::Verdict::Denied;
            double n = 0;
            for (const auto& e : h->sms_events()) n += e.verdict == want;
            return Value::of(n);
        }
        unknown_metric(p);
    }

    static Value relay_metric(const attack::Relay& r, const Probe& p) {
        const auto s = r.stats();
        const auto& m = p.metric;
        if (m == "connections") return Value::of(static_cast<double>(s.connections));
        if (m == "refused") return Value::of(static_cast<double>(s.refused));
        if (m == "frames_up") return Value::of(static_cast<double>(s.frames_up));
        if (m == "frames_modified") return Value::of(static_cast<double>(s.frames_modified));
        if (m == "bytes_up") return Value::of(static_cast<double>(s.bytes_up));
        if (m == "bytes_down") return Value::of(static_cast<double>(s.bytes_down));
        unknown_metric(p);
    }

    static Value call_metric(const CallResult& c, const Probe& p) {
        if (p.metric == "status") return Value::of(static_cast<double>(c.status));
        if (p.metric == "body") return Value::of(c.body);
        if (p.metric == "field") {
            const auto j = response_json(c.body);
            const auto key = arg(p.args, "key");
            if (!j.is_object() || !j.contains(key)) throw Error(Errc::NotFound, key, "response has no field " + key);
            const auto& v = j.at(key);
            if (v.is_string()) return Value::parse(v.get<std::string>());
            if (v.is_number()) return Value::of(v.get<double>());
            if (v.is_boolean()) return Value::of(v.get<bool>() ? 1.0 : 0.0);
            return Value::of(v.dump());
        }
        if (p.metric == "field_text") {
            const auto j = response_json(c.body);
            const auto key = arg(p.args, "key");
            if (!j.is_object() || !j.contains(key)) throw Error(Errc::NotFound, key, "response has no field " + key);
            const auto& v = j.at(key);
            return Value::of(v.is_string() ? v.get<std::string>() : v.dump());
        }
        if (p.metric == "records") {
            const auto j = response_json(c.body);
            if (!j.is_array()) throw Error(Errc::Parse, "body", "response is not a record list");
            return Value::of(static_cast<double>(j.size()));
        }
        unknown_metric(p);
    }

    static Value enum_metric(const EnumResult& e, const Probe& p) {
        const auto hits = attack::hits(e.probes);
        std::set<std::string> hit_phones;
        for (const auto& h : hits) hit_phones.insert(h.phone);
        auto count = [&](attack::Verdict v) {
            double n = 0;
            for (const auto& pr : e.probes) n += pr.verdict == v;
            return Value::of(n);
        };
        const auto& m = p.metric;
        if (m == "probes") return Value::of(static_cast<double>(e.probes.size()));
        if (m == "hits") return Value::of(static_cast<double>(hits.size()));
        if (m == "not_delivered") return count(attack::Verdict::NotDelivered);
        if (m == "silent") return count(attack::Verdict::DeliveredSilent);
        if (m == "truth") return Value::of(static_cast<double>(e.truth.size()));
        if (m == "false_positives" || m == "false_negatives") {
            double n = 0;
            if (m == "false_positives") {
                for (const auto& ph : hit_phones) n += !e.truth.count(ph);
            } else {
                for (const auto& ph : e.truth) n += !hit_phones.count(ph);
            }
            return Value::of(n);
        }
        if (m == "hit_serials") {
            std::string out;
            for (const auto& h : hits) {
                if (!out.empty()) out += ',';
                out += h.serial.value_or("?");
            }
            return Value::of(out);
        }
        unknown_metric(p);
    }

    static Value sms_metric(const SmsResult& s, const Probe& p) {
        const auto& m = p.metric;
        if (m == "delivered") return Value::of(s.delivered ? 1.0 : 0.0);
        if (m == "replies") return Value::of(static_cast<double>(s.replies.size()));
        if (m == "reply") return Value::of(s.replies.empty() ? std::string() : s.replies.front());
        if (m == "verdict") return Value::of(s.verdict.value_or("NONE"));
        if (m == "command") return Value::of(s.command.value_or("NONE"));
        unknown_metric(p);
    }

    static Value agps_metric(const AgpsResult& a, const Probe& p) {
        if (p.metric == "ok") return Value::of(a.ok ? 1.0 : 0.0);
        if (p.metric == "blob_size") return Value::of(static_cast<double>(a.blob.size()));
        if (p.metric == "blob_hash") return Value::of(fnv1a_hex(a.blob));
        unknown_metric(p);
    }

    static bool compare(const Value& l, const std::string& op, const Value& r, double tol) {
        if (l.numeric && r.numeric) {
            if (op == "==") return l.num == r.num;
            if (op == "!=") return l.num != r.num;
            if (op == ">=") return l.num >= r.num;
            if (op == "<=") return l.num <= r.num;
            if (op == ">") return l.num > r.num;
            if (op == "<") return l.num < r.num;
            if (op == "~=") return std::fabs(l.num - r.num) <= tol;
        }
        const auto ls = l.text();
        const auto rs = r.text();
        if (op == "==") return ls == rs;
        if (op == "!=") return ls != rs;
        throw Error(Errc::Config, op, "operator " + op + " needs two numbers");
    }

    const Scenario& sc_;
    SimClock clock_;
    SimTimestamp start_ = SimClock::kDefaultStart;
    net::SimNetwork net_;
    sms::SmsBus bus_;
    platform::TokenSource tokens_;
    std::unique_ptr<tracker::FleetHost> fleet_host_;
    std::map<std::string, tracker::TrackerHost*> trackers_;
    std::vector<tracker::TrackerHost*> started_;
    std::set<tracker::TrackerHost*> started_set_;
    std::set<std::string> handsets_;
    std::unique_ptr<platform::Platform> platform_;
    std::map<std::string, std::unique_ptr<platform::Platform>> attackers_;
    std::map<std::string, std::shared_ptr<attack::Relay>> relays_;
    std::map<std::string, CallResult> calls_;
    std::map<std::string, std::string> sessions_;
    std::map<std::string, SmsResult> sms_;
    std::map<std::string, EnumResult> enums_;
    std::map<std::string, AgpsResult> agps_;
    std::map<std::string, std::vector<FrameEvent>> frames_;
    std::vector<std::string> tap_;
};

}  // namespace

bool RunReport::passed() const {
    if (!error.empty()) return false;
    for (const auto& a : asserts) {
        if (!a.pass) return false;
    }
    return true;
}

std::string RunReport::text() const {
    std::string out = "scenario " + name + "\n";
    std::size_t ok = 0;
    for (const auto& a : asserts) {
        ok += a.pass;
        out += std::string("  ") + (a.pass ? "PASS" : "FAIL") + "  line " + std::to_string(a.line) + ": " + a.source;
        out += "\n        " + a.detail + "\n";
    }
    if (!error.empty()) out += "  ERROR " + error + "\n";
    out += "result " + name + " " + (passed() ? "PASS" : "FAIL") + " " + std::to_string(ok) + "/" +
           std::to_string(asserts.size()) + "\n";
    return out;
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options) {
    RunReport report;
    report.name = scenario.name;
    World world(scenario, options);
    for (const auto& step : scenario.steps) {
        try {
            world.advance_to(step.at);
            if (step.action == Action::Assert) {
                report.asserts.push_back(world.check(step));
            } else {
                world.execute(step);
            }
        } catch (const std::exception& e) {
            report.error = "line " + std::to_string(step.line) + ": " + e.what();
            break;
        }
    }
    report.files = world.artifacts();
    return report;
}

void write_artifacts(const RunReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Config, name, "cannot write " + name);
        out << body;
    };
    write("report.txt", report.text());
    for (const auto& [name, body] : report.files) write(name, body);
}

std::string suite_table(const std::vector<RunReport>& reports) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-24s %-6s %s\n", "scenario", "result", "asserts");
    out += buf;
    std::size_t failed = 0;
    for (const auto& r : reports) {
        std::size_t ok = 0;
        for (const auto& a : r.asserts) ok += a.pass;
        failed += !r.passed();
        std::snprintf(buf, sizeof buf, "%-24s %-6s %zu/%zu\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL", ok,
                      r.asserts.size());
        out += buf;
    }
    out += std::to_string(reports.size() - failed) + " of " + std::to_string(reports.size()) + " scenarios passed\n";
    return out;
}

}  // namespace gpslab::scenario
