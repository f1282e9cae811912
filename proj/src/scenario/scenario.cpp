#include "gpslab/scenario/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::scenario {

namespace {

struct ActionSpec {
    Action action;
    std::string_view name;
    std::set<std::string_view> required;
    std::set<std::string_view> optional;
};

const std::vector<ActionSpec>& action_specs() {
    static const std::vector<ActionSpec> specs{
        {Action::StartPlatform, "start_platform", {}, {}},
        {Action::StartAttacker, "start_attacker", {"name", "host"}, {"hq_port", "yy_port", "agps_port"}},
        {Action::StartTracker, "start_tracker", {}, {"serial"}},
        {Action::Sms, "sms", {"from", "to", "body"}, {"as"}},
        {Action::Spoof, "spoof", {"server", "serial", "lat", "lon"}, {"as"}},
        {Action::Relay, "relay", {"name", "listen", "upstream"}, {"transform", "dlat", "dlon"}},
        {Action::Wait, "wait", {}, {}},
        {Action::ApiCall, "api_call", {"device_id", "as"}, {"style"}},
        {Action::PortalCall, "portal_call", {"op", "as"},
         {"user", "pass", "session", "serial", "lat", "lon", "radius", "action", "new"}},
        {Action::Enum, "enum", {"prefix", "count", "from", "as"}, {"first", "width", "lookup"}},
        {Action::Agps, "agps", {"as"}, {"serial", "user", "pwd", "lat", "lon", "server"}},
        {Action::Assert, "assert", {}, {}},
    };
    return specs;
}

const std::set<std::string_view> kOps{"==", "!=", ">=", "<=", ">", "<", "~="};

[[noreturn]] void fail(int line, const std::string& msg) {
    throw Error(Errc::Config, "line " + std::to_string(line), "line " + std::to_string(line) + ": " + msg);
}

std::pair<std::string, std::string> split_kv(const std::string& tok, int line) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) fail(line, "expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

struct Labels {
    std::set<std::string> calls, sms, enums, agps, relays, attackers, sessions;
    std::set<std::string> serials;
};

void check_target(const std::string& target, const Labels& labels, int line) {
    if (target == "platform") return;
    const auto colon = target.find(':');
    if (colon == std::string::npos) fail(line, "unknown assert target '" + target + "'");
    const auto kind = target.substr(0, colon);
    const auto name = target.substr(colon + 1);
    const std::set<std::string>* pool = nullptr;
    if (kind == "attacker") pool = &labels.attackers;
    else if (kind == "tracker") pool = &labels.serials;
    else if (kind == "relay") pool = &labels.relays;
    else if (kind == "call") pool = &labels.calls;
    else if (kind == "enum") pool = &labels.enums;
    else if (kind == "sms") pool = &labels.sms;
    else if (kind == "agps") pool = &labels.agps;
    else fail(line, "unknown assert target '" + target + "'");
    if (!pool->count(name)) fail(line, "'" + target + "' is not defined before this step");
}

Probe parse_probe(const std::vector<std::string>& toks, std::size_t& i, const Labels& labels, int line,
                  bool stop_at_tol) {
    if (i + 1 >= toks.size()) fail(line, "assert needs <target> <metric>");
    Probe p;
    p.target = toks[i++];
    p.metric = toks[i++];
    check_target(p.target, labels, line);
    while (i < toks.size() && !kOps.count(toks[i]) && toks[i] != "+" && toks[i] != "-") {
        if (stop_at_tol && toks[i].starts_with("tol=")) break;
        auto [k, v] = split_kv(toks[i], line);
        p.args[k] = v;
        ++i;
    }
    return p;
}

Check parse_check(const std::vector<std::string>& toks, const Labels& labels, int line) {
    Check c;
    std::size_t i = 0;
    c.lhs = parse_probe(toks, i, labels, line, false);
    if (i >= toks.size() || !kOps.count(toks[i])) fail(line, "assert needs a comparison operator");
    c.op = toks[i++];
    if (i >= toks.size()) fail(line, "assert needs a right-hand side");
    if (toks[i] == "ref") {
        ++i;
        c.ref = parse_probe(toks, i, labels, line, true);
        if (i < toks.size() && (toks[i] == "+" || toks[i] == "-")) {
            const bool neg = toks[i] == "-";
            if (i + 1 >= toks.size()) fail(line, "offset needs a number");
            const auto v = text::to_double(toks[i + 1]);
            if (!v) fail(line, "bad offset '" + toks[i + 1] + "'");
            c.ref_offset = neg ? -*v : *v;
            i += 2;
        }
    } else {
        c.literal = toks[i++];
    }
    for (; i < toks.size(); ++i) {
        if (!toks[i].starts_with("tol=")) fail(line, "unexpected '" + toks[i] + "' after the right-hand side");
        const auto v = text::to_double(toks[i].substr(4));
        if (!v || *v < 0) fail(line, "bad tolerance '" + toks[i] + "'");
        c.tol = *v;
    }
    return c;
}

}  // namespace

std::string_view action_name(Action a) noexcept {
    for (const auto& s : action_specs()) {
        if (s.action == a) return s.name;
    }
    return "?";
}

Scenario parse_scenario(std::string_view text, std::string default_name) {
    Scenario sc;
    sc.name = std::move(default_name);
    Labels labels;
    std::int64_t last_at = 0;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::vector<std::pair<int, std::string>> pending_checks;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (parse_fleet_stanza(line, line_no, sc.fleet)) {
            for (const auto& d : sc.fleet.devices) labels.serials.insert(d.identity.serial);
            continue;
        }
        const auto toks_opt = text::tokenize(line);
        if (!toks_opt) fail(line_no, "unterminated quote");
        const auto& toks = *toks_opt;

        if (toks[0] == "name") {
            if (toks.size() != 2) fail(line_no, "name takes one word");
            sc.name = toks[1];
            continue;
        }
        if (toks[0] == "run") {
            if (toks.size() != 2) fail(line_no, "run takes one path");
            sc.suite.push_back(toks[1]);
            continue;
        }
        if (toks[0] != "at") fail(line_no, "unknown statement '" + toks[0] + "'");
        if (toks.size() < 3) fail(line_no, "expected: at <seconds> <action> ...");

        Step step;
        step.line = line_no;
        step.source = std::string(line);
        const auto at = text::to_int(toks[1]);
        if (!at || *at < 0) fail(line_no, "bad time '" + toks[1] + "'");
        if (*at < last_at) fail(line_no, "step times must not decrease");
        step.at = last_at = *at;

        const ActionSpec* spec = nullptr;
        for (const auto& s : action_specs()) {
            if (s.name == toks[2]) spec = &s;
        }
        if (!spec) fail(line_no, "unknown action '" + toks[2] + "'");
        step.action = spec->action;

        const std::vector<std::string> rest(toks.begin() + 3, toks.end());
        if (step.action == Action::Assert) {
            step.check = parse_check(rest, labels, line_no);
        } else {
            for (const auto& t : rest) {
                auto [k, v] = split_kv(t, line_no);
                if (!spec->required.count(k) && !spec->optional.count(k)) {
                    fail(line_no, std::string(spec->name) + " does not take '" + k + "'");
                }
                if (step.args.count(k)) fail(line_no, "duplicate key '" + k + "'");
                step.args[k] = v;
            }
            for (auto k : spec->required) {
                if (!step.args.count(std::string(k))) fail(line_no, std::string(spec->name) + " needs " + std::string(k) + "=");
            }
        }

        const auto label = step.args.count("as") ? step.args.at("as") : std::string();
        switch (step.action) {
            case Action::StartAttacker: labels.attackers.insert(step.args.at("name")); break;
            case Action::Relay: labels.relays.insert(step.args.at("name")); break;
            case Action::Sms: if (!label.empty()) labels.sms.insert(label); break;
            case Action::Spoof: if (!label.empty()) labels.calls.insert(label); break;
            case Action::ApiCall: labels.calls.insert(label); break;
            case Action::PortalCall:
                labels.calls.insert(label);
                if (step.args.count("session") && step.args.at("session") != "none" &&
                    !labels.sessions.count(step.args.at("session"))) {
                    fail(line_no, "session '" + step.args.at("session") + "' is not defined before this step");
                }
                if (step.args.at("op") == "login") labels.sessions.insert(label);
                break;
            case Action::Enum:
                labels.enums.insert(label);
                if (step.args.count("lookup")) check_target(step.args.at("lookup"), labels, line_no);
                break;
            case Action::Agps: labels.agps.insert(label); break;
            case Action::StartTracker:
                if (step.args.count("serial") && step.args.at("serial") != "all" &&
                    !labels.serials.count(step.args.at("serial"))) {
                    fail(line_no, "no device with serial " + step.args.at("serial"));
                }
                break;
            default: break;
        }
        sc.steps.push_back(std::move(step));
    }
    if (!sc.suite.empty() && !sc.steps.empty()) fail(line_no, "a suite file may only contain run lines");
    if (!sc.fleet.devices.empty()) validate(sc.fleet);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Config, path, "cannot open scenario " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    return parse_scenario(ss.str(), name);
}

}  // namespace gpslab::scenario
