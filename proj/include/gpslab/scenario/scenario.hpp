#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/core/fleet.hpp"

// Scripted end-to-end runs. A scenario file holds fleet stanzas (see
// parse_fleet_config) and timed steps:
//
//   name redirect_mitm
//   device serial=... protocol=HQ phone=+... master=+...
//   at 0 start_platform
//   at 30 sms from=+master to=+device body="*reg 10.66.0.1 8011" as=reg
//   at 90 assert platform records serial=... since=31 == 0
//
// A suite file instead lists other scenarios, one `run <path>` per line,
// paths relative to the suite file.
namespace gpslab::scenario {

enum class Action {
    StartPlatform,
    StartAttacker,
    StartTracker,
    Sms,
    Spoof,
    Relay,
    Wait,
    ApiCall,
    PortalCall,
    Enum,
    Agps,
    Assert,
};

std::string_view action_name(Action a) noexcept;

using Args = std::map<std::string, std::string>;

// One side of an assertion: `<target> <metric> [key=value ...]`.
struct Probe {
    std::string target;  // platform, attacker:N, tracker:S, relay:N, call:L, enum:L, sms:L, agps:L
    std::string metric;
    Args args;
};

struct Check {
    Probe lhs;
    std::string op;  // == != >= <= > < ~=
    std::optional<std::string> literal;
    std::optional<Probe> ref;
    double ref_offset = 0.0;
    double tol = 0.0;
};

struct Step {
    int line = 0;
    std::int64_t at = 0;  // seconds after scenario start
    Action action = Action::Wait;
    Args args;
    std::optional<Check> check;
    std::string source;  // the original line, for the report
};

struct Scenario {
    std::string name;
    FleetConfig fleet;
    std::vector<Step> steps;
    std::vector<std::string> suite;  // non-empty for suite files
};

// Throws Errc::Config with "line N: " prefixed messages.
Scenario parse_scenario(std::string_view text, std::string default_name = "scenario");
Scenario load_scenario(const std::string& path);

}  // namespace gpslab::scenario
