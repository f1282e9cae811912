#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpslab/scenario/scenario.hpp"

namespace gpslab::scenario {

struct RunOptions {
    bool deterministic = true;  // seeded session tokens
    std::uint64_t seed = 0;
};

struct AssertResult {
    int line = 0;
    std::string source;
    bool pass = false;
    std::string detail;  // "got X, want Y"
};

struct RunReport {
    std::string name;
    std::vector<AssertResult> asserts;
    std::string error;  // set when a step could not run
    // Output artifacts, keyed by file name (history.tsv, transcript.txt, ...).
    std::vector<std::pair<std::string, std::string>> files;

    bool passed() const;
    std::string text() const;
};

// Runs every step on one simulated network under a simulated clock that
// moves in one-second ticks; started trackers are stepped on every tick.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options);

// Writes report.txt plus the artifacts into `dir` (created if missing).
void write_artifacts(const RunReport& report, const std::string& dir);

// Summary table for a suite run.
std::string suite_table(const std::vector<RunReport>& reports);

}  // namespace gpslab::scenario
