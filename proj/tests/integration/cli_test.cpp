#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "samples.hpp"

namespace fs = std::filesystem;
namespace t = gpslab::testing;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(GPSLAB_BIN) + " " + args + " 2>&1";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("gpslab-cli-" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& content) { std::ofstream(p, std::ios::binary) << content; }

}  // namespace

TEST(Cli, ClassifyCapturedFrames) {
    const auto d = scratch("classify");
    const auto f = t::captured_forward();
    write_file(d / "yy.bin", std::string(f.begin(), f.end()));
    write_file(d / "hq.txt", std::string(t::kV1));
    write_file(d / "noise.bin", "\x01\x02\x03");
    EXPECT_EQ(run("classify --file " + (d / "yy.bin").string()).out, "YY\n");
    EXPECT_EQ(run("classify --file " + (d / "hq.txt").string()).out, "HQ\n");
    EXPECT_EQ(run("classify --file " + (d / "noise.bin").string()).out, "UNKNOWN\n");
    EXPECT_EQ(run("classify --file " + (d / "missing").string()).code, 2);
    fs::remove_all(d);
}

TEST(Cli, ScenarioExitCodes) {
    const auto d = scratch("scenario");
    const auto ok = run("--deterministic --seed 7 scenario run " + std::string(GPSLAB_SCENARIOS) + "/default_creds --out " +
                        (d / "ok").string());
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_TRUE(fs::exists(d / "ok" / "report.txt"));

    write_file(d / "failing", "platform hq_port=8011 yy_port=8841 agps_port=56447 http_port=8080\n"
                              "at 0 start_platform\nat 1 assert platform records == 5\n");
    EXPECT_EQ(run("scenario run " + (d / "failing").string()).code, 1);

    write_file(d / "broken", "at 0 start_platform\nat x wait\n");
    const auto broken = run("scenario run " + (d / "broken").string());
    EXPECT_EQ(broken.code, 2);
    EXPECT_NE(broken.out.find("line 2"), std::string::npos);
    fs::remove_all(d);
}

TEST(Cli, SuiteWritesSummary) {
    const auto d = scratch("suite");
    const auto r = run("scenario run " + std::string(GPSLAB_SCENARIOS) + "/all --out " + d.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(d / "summary.txt"));
    EXPECT_TRUE(fs::exists(d / "redirect_mitm" / "history.tsv"));
    fs::remove_all(d);
}

TEST(Cli, RefusesNonLoopbackBind) {
    const auto d = scratch("bind");
    write_file(d / "fleet", "platform bind=0.0.0.0 hq_port=18011 yy_port=18841 agps_port=18447 http_port=18080\n");
    const auto serve = run("serve --config " + (d / "fleet").string() + " --duration 1");
    EXPECT_EQ(serve.code, 2);
    EXPECT_NE(serve.out.find("--unsafe-bind"), std::string::npos);
    const auto relay = run("relay --listen 0.0.0.0:18012 --upstream 127.0.0.1:18011 --duration 1");
    EXPECT_EQ(relay.code, 2);
    EXPECT_NE(relay.out.find("--unsafe-bind"), std::string::npos);
    fs::remove_all(d);
}
