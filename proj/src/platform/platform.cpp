#include "gpslab/platform/platform.hpp"

#include <cctype>

#include "httplib.h"

#include "gpslab/core/error.hpp"

namespace gpslab::platform {

namespace {

HttpRequest from_httplib(const httplib::Request& r) {
    HttpRequest req;
    req.method = r.method;
    req.path = r.path;
    req.body = r.body;
    for (const auto& [k, v] : r.params) req.params.emplace(k, v);
    for (const auto& [k, v] : r.headers) {
        std::string name = k;
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        req.headers.emplace(std::move(name), v);
    }
    return req;
}

}  // namespace

Platform::Platform(std::string name, const FleetConfig& fleet, const Clock& clock, TokenSource tokens)
    : name_(std::move(name)),
      clock_(clock),
      ports_(fleet.platform),
      log_(name_),
      registry_(fleet),
      portal_(fleet, store_, std::move(tokens)),
      api_(registry_, store_, portal_, log_, clock) {}

Platform::~Platform() { stop(); }

net::SessionFactory Platform::hq_factory() { return hq_session_factory({&store_, &log_, &clock_}); }
net::SessionFactory Platform::yy_factory() { return yy_session_factory({&store_, &log_, &clock_}); }
net::SessionFactory Platform::agps_factory() { return agps_session_factory({&store_, &log_, &clock_}); }

void Platform::listen_sim(net::SimNetwork& network) {
    network.listen({ports_.bind, ports_.hq_port}, hq_factory());
    network.listen({ports_.bind, ports_.yy_port}, yy_factory());
    network.listen({ports_.bind, ports_.agps_port}, agps_factory());
}

void Platform::unlisten_sim(net::SimNetwork& network) {
    network.unlisten({ports_.bind, ports_.hq_port});
    network.unlisten({ports_.bind, ports_.yy_port});
    network.unlisten({ports_.bind, ports_.agps_port});
}

BoundPorts Platform::start_tcp() {
    BoundPorts b;
    hq_server_.start({ports_.bind, ports_.hq_port}, hq_factory());
    yy_server_.start({ports_.bind, ports_.yy_port}, yy_factory());
    agps_server_.start({ports_.bind, ports_.agps_port}, agps_factory());
    b.hq = hq_server_.bound();
    b.yy = yy_server_.bound();
    b.agps = agps_server_.bound();

    http_ = std::make_unique<httplib::Server>();
    auto handler = [this](const httplib::Request& r, httplib::Response& res) {
        const auto out = handle_http(from_httplib(r));
        res.status = out.status;
        for (const auto& [k, v] : out.headers) res.set_header(k, v);
        res.set_content(out.body, out.content_type);
    };
    http_->Get(".*", handler);
    http_->Post(".*", handler);
    int port = ports_.http_port;
    if (port == 0) {
        port = http_->bind_to_any_port(ports_.bind);
        if (port < 0) throw Error(Errc::Network, ports_.bind, "cannot bind HTTP listener");
    } else if (!http_->bind_to_port(ports_.bind, port)) {
        stop();
        throw Error(Errc::Network, Endpoint{ports_.bind, ports_.http_port}.str(), "cannot bind HTTP listener");
    }
    http_thread_ = std::thread([srv = http_.get()] { srv->listen_after_bind(); });
    http_->wait_until_ready();
    b.http = {ports_.bind, static_cast<std::uint16_t>(port)};
    return b;
}

void Platform::stop() {
    if (http_) {
        http_->stop();
        if (http_thread_.joinable()) http_thread_.join();
        http_.reset();
    }
    hq_server_.stop();
    yy_server_.stop();
    agps_server_.stop();
}

HttpResponse Platform::handle_http(const HttpRequest& req) {
    HttpHook hook;
    {
        std::lock_guard lock(hook_mu_);
        hook = hook_;
    }
    if (hook) {
        if (auto r = hook(req)) return *r;
    }
    if (auto r = api_.handle(req)) return *r;
    return {404, "text/plain", "not found\n", {}};
}

void Platform::set_http_hook(HttpHook hook) {
    std::lock_guard lock(hook_mu_);
    hook_ = std::move(hook);
}

void Platform::persist_to(const std::string& path) {
    auto file = std::make_shared<std::ofstream>(path, std::ios::app | std::ios::binary);
    if (!*file) throw Error(Errc::Config, path, "cannot open history file");
    history_file_ = file;
    store_.set_sink([file](const TrackRecord& r) {
        *file << format_history_line(r) << '\n';
        file->flush();
    });
}

}  // namespace gpslab::platform
