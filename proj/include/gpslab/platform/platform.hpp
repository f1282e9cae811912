#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "gpslab/core/fleet.hpp"
#include "gpslab/net/sim_network.hpp"
#include "gpslab/net/tcp.hpp"
#include "gpslab/platform/history.hpp"
#include "gpslab/platform/http_api.hpp"
#include "gpslab/platform/ingest.hpp"
#include "gpslab/platform/portal.hpp"

namespace httplib {
class Server;
}

namespace gpslab::platform {

// Bound addresses after start_tcp(); useful when ports were 0.
struct BoundPorts {
    Endpoint hq, yy, agps, http;
};

// One collection platform: the three device listeners, the HTTP front end
// and the history store. An attacker's collection server is the same thing
// with an empty fleet.
class Platform {
public:
    using HttpHook = std::function<std::optional<HttpResponse>(const HttpRequest&)>;

    Platform(std::string name, const FleetConfig& fleet, const Clock& clock, TokenSource tokens);
    ~Platform();
    Platform(const Platform&) = delete;
    Platform& operator=(const Platform&) = delete;

    const std::string& name() const { return name_; }
    HistoryStore& store() { return store_; }
    const HistoryStore& store() const { return store_; }
    EventLog& log() { return log_; }
    DeviceRegistry& registry() { return registry_; }
    Portal& portal() { return portal_; }
    const PlatformPorts& ports() const { return ports_; }

    net::SessionFactory hq_factory();
    net::SessionFactory yy_factory();
    net::SessionFactory agps_factory();

    // Registers the three device listeners on the simulated network.
    void listen_sim(net::SimNetwork& network);
    void unlisten_sim(net::SimNetwork& network);

    // Real loopback listeners plus the HTTP server. Throws Errc::Network.
    BoundPorts start_tcp();
    void stop();

    HttpResponse handle_http(const HttpRequest& req);
    // Tried before the built-in routes.
    void set_http_hook(HttpHook hook);

    void set_device_control(DeviceControl* control) { portal_.set_device_control(control); }

    // Appends every new record to `path` in the history line format.
    void persist_to(const std::string& path);

private:
    std::string name_;
    const Clock& clock_;
    PlatformPorts ports_;
    HistoryStore store_;
    EventLog log_;
    DeviceRegistry registry_;
    Portal portal_;
    HttpApi api_;

    std::mutex hook_mu_;
    HttpHook hook_;

    net::TcpServer hq_server_, yy_server_, agps_server_;
    std::unique_ptr<httplib::Server> http_;
    std::thread http_thread_;

    std::shared_ptr<std::ofstream> history_file_;
};

}  // namespace gpslab::platform
