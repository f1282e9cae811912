#include "gpslab/tracker/host.hpp"

#include <chrono>
#include <condition_variable>

#include "gpslab/core/error.hpp"

namespace gpslab::tracker {

namespace {

Endpoint default_server(const DeviceConfig& config, const PlatformPorts& platform) {
    return {platform.bind, config.protocol_family == ProtocolFamily::Hq ? platform.hq_port : platform.yy_port};
}

}  // namespace

TrackerHost::TrackerHost(const DeviceConfig& config, const PlatformPorts& platform, net::Network& network,
                         sms::SmsBus& bus, const Clock& clock)
    : tracker_(config, default_server(config, platform)),
      network_(network),
      bus_(bus),
      clock_(clock),
      agps_server_{platform.bind, platform.agps_port},
      phone_(config.identity.phone) {}

TrackerHost::~TrackerHost() {
    detach();
    std::lock_guard lock(mu_);
    for (auto& [_, c] : connections_) {
        if (c) c->close();
    }
}

void TrackerHost::attach() {
    std::lock_guard lock(mu_);
    if (attached_) return;
    bus_.subscribe(phone_, [this](const SmsMessage& msg) { handle_sms(msg); });
    attached_ = true;
}

void TrackerHost::detach() {
    std::lock_guard lock(mu_);
    if (!attached_) return;
    bus_.unsubscribe(phone_);
    attached_ = false;
}

void TrackerHost::step() {
    std::lock_guard lock(mu_);
    send_frames(tracker_.tick(clock_.now()));
}

void TrackerHost::handle_sms(const SmsMessage& msg) {
    std::optional<SmsMessage> reply;
    {
        std::lock_guard lock(mu_);
        ++stats_.sms_received;
        auto outcome = tracker_.on_sms(msg, clock_.now());
        sms_events_.push_back({clock_.now(), msg, std::string(outcome.command.name()), outcome.verdict,
                               outcome.reply.has_value(), outcome.command.is_backdoor()});
        send_frames(outcome.frames);
        reply = std::move(outcome.reply);
    }
    if (reply) {
        if (reply->body.size() > kMaxSmsBody) reply->body.resize(kMaxSmsBody);
        bus_.send(*reply);
    }
}

void TrackerHost::send_frames(const std::vector<OutboundFrame>& frames) {
    for (const auto& f : frames) {
        const bool ok = send_one(f);
        if (ok) {
            ++stats_.frames_sent;
        } else {
            ++stats_.frames_dropped;
        }
        if (observer_) observer_(tracker_.state().identity.serial, f, ok);
    }
}

bool TrackerHost::send_one(const OutboundFrame& frame) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto& conn = connections_[frame.to];
        if (!conn || !conn->is_open()) {
            conn = network_.connect(frame.to, nullptr);
            if (!conn) return false;
        }
        if (conn->write(frame.bytes)) return true;
        conn.reset();
    }
    return false;
}

void TrackerHost::add_geofence(const Geofence& fence) {
    std::lock_guard lock(mu_);
    tracker_.add_geofence(fence);
}

void TrackerHost::set_engine(bool on) {
    std::lock_guard lock(mu_);
    tracker_.set_engine(on);
}

std::optional<agps::Response> TrackerHost::run_agps_session() {
    std::optional<agps::Login> login;
    {
        std::lock_guard lock(mu_);
        login = tracker_.run_agps_session();
    }
    if (!login) return std::nullopt;

    struct Collector {
        std::mutex mu;
        std::condition_variable cv;
        Bytes buf;
        bool closed = false;
    };
    auto col = std::make_shared<Collector>();
    auto sink = std::make_shared<net::FunctionSink>(
        [col](std::span<const std::uint8_t> b) {
            std::lock_guard lock(col->mu);
            col->buf.insert(col->buf.end(), b.begin(), b.end());
            col->cv.notify_all();
        },
        [col] {
            std::lock_guard lock(col->mu);
            col->closed = true;
            col->cv.notify_all();
        });
    auto conn = network_.connect(agps_server_, sink);
    if (!conn) return std::nullopt;
    const auto line = agps::serialize_login(*login) + "\r\n";
    conn->write(to_bytes(line));

    std::optional<agps::Response> resp;
    {
        std::unique_lock lock(col->mu);
        const auto complete = [&] {
            try {
                const auto size = agps::peek_response_size(col->buf);
                return col->closed || (size && col->buf.size() >= *size);
            } catch (const Error&) {
                return true;
            }
        };
        col->cv.wait_for(lock, std::chrono::seconds(5), complete);
        try {
            const auto size = agps::peek_response_size(col->buf);
            if (size && col->buf.size() >= *size) {
                resp = agps::parse_response(std::span<const std::uint8_t>(col->buf.data(), *size));
            }
        } catch (const Error&) {
        }
    }
    conn->close();
    std::lock_guard lock(mu_);
    ++stats_.agps_sessions;
    return resp;
}

TrackerState TrackerHost::state() const {
    std::lock_guard lock(mu_);
    return tracker_.state();
}

HostStats TrackerHost::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

std::vector<SmsEvent> TrackerHost::sms_events() const {
    std::lock_guard lock(mu_);
    return sms_events_;
}

std::string TrackerHost::serial() const {
    std::lock_guard lock(mu_);
    return tracker_.state().identity.serial;
}

std::string TrackerHost::phone() const { return phone_; }

void TrackerHost::set_observer(FrameObserver observer) {
    std::lock_guard lock(mu_);
    observer_ = std::move(observer);
}

FleetHost::FleetHost(const FleetConfig& config, net::Network& network, sms::SmsBus& bus, const Clock& clock) {
    for (const auto& d : config.devices) {
        hosts_.push_back(std::make_unique<TrackerHost>(d, config.platform, network, bus, clock));
    }
}

void FleetHost::attach_all() {
    for (auto& h : hosts_) h->attach();
}

void FleetHost::step_all() {
    for (auto& h : hosts_) h->step();
}

TrackerHost* FleetHost::find(const std::string& serial) {
    for (auto& h : hosts_) {
        if (h->serial() == serial) return h.get();
    }
    return nullptr;
}

std::vector<TrackerHost*> FleetHost::hosts() {
    std::vector<TrackerHost*> out;
    for (auto& h : hosts_) out.push_back(h.get());
    return out;
}

void FleetHost::push_geofence(const std::string& serial, const Geofence& fence) {
    auto* h = find(serial);
    if (!h) throw Error(Errc::NotFound, serial, "no live device " + serial);
    h->add_geofence(fence);
}

void FleetHost::set_engine(const std::string& serial, bool on) {
    auto* h = find(serial);
    if (!h) throw Error(Errc::NotFound, serial, "no live device " + serial);
    h->set_engine(on);
}

}  // namespace gpslab::tracker
