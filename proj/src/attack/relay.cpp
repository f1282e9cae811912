#include "gpslab/attack/relay.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <map>

#include "gpslab/attack/classify.hpp"
#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/hq.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"
#include "gpslab/net/tcp.hpp"
#include "gpslab/platform/history.hpp"

namespace gpslab::attack {

namespace {

constexpr std::size_t kMaxHold = 4096;

bool is_ws(std::uint8_t c) { return c == '\r' || c == '\n' || c == ' ' || c == '\t'; }

std::span<const std::uint8_t> trimmed(const Bytes& b) {
    std::size_t s = 0, e = b.size();
    while (s < e && is_ws(b[s])) ++s;
    while (e > s && is_ws(b[e - 1])) --e;
    return std::span<const std::uint8_t>(b).subspan(s, e - s);
}

}  // namespace

std::string_view transform_name(Transform t) noexcept {
    switch (t) {
        case Transform::Identity: return "identity";
        case Transform::PositionOffset: return "position_offset";
        case Transform::RecordOnly: return "record_only";
    }
    return "?";
}

void validate(const RelaySpec& spec) {
    if (spec.listen == spec.upstream) throw Error(Errc::Config, spec.listen.str(), "relay would loop onto itself");
}

// --- Framer -------------------------------------------------------------

std::vector<Bytes> Framer::push(std::span<const std::uint8_t> bytes) {
    if (kind_ == Kind::Raw) return {Bytes(bytes.begin(), bytes.end())};
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    std::vector<Bytes> out;
    while (auto f = next()) out.push_back(std::move(*f));
    return out;
}

Bytes Framer::take_rest() {
    Bytes rest;
    rest.swap(buf_);
    return rest;
}

std::optional<Bytes> Framer::next() {
    auto take = [this](std::size_t n) {
        Bytes f(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n));
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n));
        return f;
    };
    if (kind_ == Kind::Undetermined) {
        const auto it = std::find_if_not(buf_.begin(), buf_.end(), is_ws);
        if (it == buf_.end()) return std::nullopt;
        switch (*it) {
            case '*': kind_ = Kind::Hq; break;
            case yy::kMagic: kind_ = Kind::Yy; break;
            case 'c': kind_ = Kind::AgpsLogin; break;
            case 'u': kind_ = Kind::AgpsResponse; break;
            default: kind_ = Kind::Raw; break;
        }
    }
    switch (kind_) {
        case Kind::Undetermined: return std::nullopt;
        case Kind::Raw:
            if (buf_.empty()) return std::nullopt;
            return take(buf_.size());
        case Kind::Hq: {
            const auto it = std::find(buf_.begin(), buf_.end(), std::uint8_t{'#'});
            if (it != buf_.end()) return take(static_cast<std::size_t>(it - buf_.begin()) + 1);
            if (buf_.size() > kMaxHold) return take(buf_.size());
            return std::nullopt;
        }
        case Kind::AgpsLogin: {
            const auto it = std::find(buf_.begin(), buf_.end(), std::uint8_t{'\n'});
            if (it != buf_.end()) return take(static_cast<std::size_t>(it - buf_.begin()) + 1);
            if (buf_.size() > kMaxHold) return take(buf_.size());
            return std::nullopt;
        }
        case Kind::Yy: {
            if (buf_.empty()) return std::nullopt;
            if (buf_[0] != yy::kMagic) {
                // Out of step: hand back everything up to the next magic byte.
                const auto it = std::find(buf_.begin() + 1, buf_.end(), yy::kMagic);
                return take(static_cast<std::size_t>(it - buf_.begin()));
            }
            const auto size = yy::peek_frame_size(buf_);
            if (!size || buf_.size() < *size) return std::nullopt;
            return take(*size);
        }
        case Kind::AgpsResponse: {
            std::optional<std::size_t> size;
            try {
                size = agps::peek_response_size(buf_);
            } catch (const Error&) {
                kind_ = Kind::Raw;
                return take(buf_.size());
            }
            if (!size || buf_.size() < *size) return std::nullopt;
            auto f = take(*size);
            kind_ = Kind::Undetermined;
            return f;
        }
    }
    return std::nullopt;
}

// --- offset transform -----------------------------------------------------

std::optional<Bytes> offset_v1(const Bytes& frame, double dlat, double dlon) {
    auto msg = hq::parse(frame);
    auto* v1 = std::get_if<hq::V1>(&msg.body);
    if (!v1) return std::nullopt;
    const auto pos = v1->position();
    const double lat = pos.lat_deg + dlat;
    double lon = pos.lon_deg + dlon;
    if (lat < -90.0 || lat > 90.0) throw Error(Errc::Range, "lat", "offset leaves the valid latitude range");
    if (lon < -180.0) lon += 360.0;
    if (lon > 180.0) lon -= 360.0;
    v1->lat = degrees_to_ddmm(lat, Axis::Latitude);
    v1->lon = degrees_to_ddmm(lon, Axis::Longitude);
    return to_bytes(hq::serialize(msg));
}

// --- Transcript -----------------------------------------------------------

void Transcript::add(SimTimestamp ts, Dir dir, const Bytes& sent, const std::optional<Bytes>& original,
                     std::string_view note) {
    // yy frames end in CR LF as part of the framing, so only trim text protocols
    auto proto = classify(sent);
    Bytes frame = sent;
    if (proto != Protocol::Yy) {
        const auto body = trimmed(sent);
        frame.assign(body.begin(), body.end());
        proto = classify(frame);
    }
    const std::string dir_name = dir == Dir::Up ? "up" : "down";
    std::string line;
    std::optional<platform::Source> source;
    if (proto == Protocol::Hq) source = platform::Source::Hq;
    if (proto == Protocol::Yy) source = platform::Source::Yy;
    if (proto == Protocol::AgpsLogin) source = platform::Source::Agps;
    if (source) {
        try {
            auto r = platform::record_from_frame(*source, ts, frame);
            r.raw = sent;
            r.meta["dir"] = dir_name;
            if (original) r.meta["orig"] = hex_upper(*original);
            if (!note.empty()) r.meta["note"] = std::string(note);
            line = platform::format_history_line(r);
        } catch (const Error& e) {
            note = e.what();
        }
    }
    if (line.empty()) {
        line = ts.iso8601() + "\t-\t" +
               std::string(proto == Protocol::AgpsResponse ? "AGPS_RESPONSE" : "RAW") + "\t" +
               hex_upper(sent) + "\tdir=" + dir_name;
        if (original) line += ";orig=" + hex_upper(*original);
        if (!note.empty()) line += ";note=" + text::percent_encode(note);
    }
    std::lock_guard lock(mu_);
    lines_.push_back(std::move(line));
}

std::vector<std::string> Transcript::lines() const {
    std::lock_guard lock(mu_);
    return lines_;
}

std::string Transcript::text() const {
    std::lock_guard lock(mu_);
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += '\n';
    }
    return out;
}

// --- stream relay -----------------------------------------------------------

namespace {

class Downstream final : public net::ByteSink {
public:
    using Log = std::function<void(const Bytes&)>;
    Downstream(std::shared_ptr<net::Connection> reply, std::function<void(std::span<const std::uint8_t>)> seen)
        : reply_(std::move(reply)), seen_(std::move(seen)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        seen_(bytes);
        reply_->write(bytes);
    }
    void on_close() override { reply_->close(); }

private:
    std::shared_ptr<net::Connection> reply_;
    std::function<void(std::span<const std::uint8_t>)> seen_;
};

class NullSink final : public net::ByteSink {
public:
    void on_data(std::span<const std::uint8_t>) override {}
};

}  // namespace

class Relay::Session final : public net::ByteSink {
public:
    Session(std::shared_ptr<Relay> relay, std::shared_ptr<net::Connection> upstream)
        : relay_(std::move(relay)), upstream_(std::move(upstream)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        std::lock_guard lock(mu_);
        relay_->count([&](RelayStats& s) { s.bytes_up += bytes.size(); });
        switch (relay_->spec_.transform) {
            case Transform::Identity:
                upstream_->write(bytes);
                break;
            case Transform::RecordOnly:
                upstream_->write(bytes);
                for (const auto& f : framer_.push(bytes)) log_up(f);
                break;
            case Transform::PositionOffset:
                offset(bytes);
                break;
        }
    }

    void on_close() override {
        std::shared_ptr<net::Connection> up;
        {
            std::lock_guard lock(mu_);
            if (closed_) return;
            closed_ = true;
            if (!pending_.empty()) {
                upstream_->write(pending_);
                if (std::any_of(pending_.begin(), pending_.end(), [](std::uint8_t c) { return !is_ws(c); })) {
                    log_up(pending_);
                }
                pending_.clear();
            }
            if (relay_->spec_.transform == Transform::RecordOnly) {
                auto rest = framer_.take_rest();
                if (!rest.empty()) log_up(rest);
            }
            up = upstream_;
        }
        up->close();
    }

private:
    enum class Mode { Undetermined, Hq, Pass };

    void log_up(const Bytes& f, const std::optional<Bytes>& orig = std::nullopt, std::string_view note = {}) {
        relay_->count([](RelayStats& s) { ++s.frames_up; });
        relay_->transcript_.add(relay_->clock_.now(), Transcript::Dir::Up, f, orig, note);
    }

    void pass(std::span<const std::uint8_t> bytes) {
        upstream_->write(bytes);
        for (const auto& f : framer_.push(bytes)) log_up(f);
    }

    void offset(std::span<const std::uint8_t> bytes) {
        if (mode_ == Mode::Pass) return pass(bytes);
        pending_.insert(pending_.end(), bytes.begin(), bytes.end());
        if (mode_ == Mode::Undetermined) {
            const auto it = std::find_if_not(pending_.begin(), pending_.end(), is_ws);
            if (it == pending_.end()) return;
            if (*it != '*') {
                // Only the text protocol is rewritten; anything else streams through.
                mode_ = Mode::Pass;
                Bytes held;
                held.swap(pending_);
                return pass(held);
            }
            mode_ = Mode::Hq;
        }
        while (true) {
            const auto hash = std::find(pending_.begin(), pending_.end(), std::uint8_t{'#'});
            if (hash == pending_.end()) break;
            const auto lead = std::find_if_not(pending_.begin(), hash, is_ws);
            Bytes prefix(pending_.begin(), lead);
            Bytes frame(lead, hash + 1);
            pending_.erase(pending_.begin(), hash + 1);

            std::optional<Bytes> changed;
            std::string note;
            try {
                changed = offset_v1(frame, relay_->spec_.dlat, relay_->spec_.dlon);
            } catch (const Error& e) {
                note = e.what();
            }
            Bytes out = prefix;
            const Bytes& sent = changed ? *changed : frame;
            out.insert(out.end(), sent.begin(), sent.end());
            upstream_->write(out);
            if (changed) relay_->count([](RelayStats& s) { ++s.frames_modified; });
            log_up(sent, changed ? std::optional<Bytes>(frame) : std::nullopt, note);
        }
        if (pending_.size() > kMaxHold) {
            upstream_->write(pending_);
            log_up(pending_, std::nullopt, "no terminator");
            pending_.clear();
        }
    }

    std::shared_ptr<Relay> relay_;
    std::shared_ptr<net::Connection> upstream_;
    std::mutex mu_;
    Framer framer_;
    Mode mode_ = Mode::Undetermined;
    Bytes pending_;
    bool closed_ = false;
};

Relay::Relay(RelaySpec spec, net::Network& upstream_network, const Clock& clock)
    : spec_(std::move(spec)), network_(upstream_network), clock_(clock) {
    validate(spec_);
}

std::shared_ptr<Relay> Relay::create(RelaySpec spec, net::Network& upstream_network, const Clock& clock) {
    if (spec.transport != Transport::Tcp) throw Error(Errc::Config, "transport", "stream relay needs TCP; use UdpRelay");
    return std::shared_ptr<Relay>(new Relay(std::move(spec), upstream_network, clock));
}

void Relay::count(const std::function<void(RelayStats&)>& f) {
    std::lock_guard lock(mu_);
    f(stats_);
}

RelayStats Relay::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

net::SessionFactory Relay::factory() {
    auto self = shared_from_this();
    return [self](std::shared_ptr<net::Connection> reply, const Endpoint&) -> std::shared_ptr<net::ByteSink> {
        self->count([](RelayStats& s) { ++s.connections; });
        auto framer = std::make_shared<Framer>();
        auto seen = [self, framer](std::span<const std::uint8_t> bytes) {
            self->count([&](RelayStats& s) { s.bytes_down += bytes.size(); });
            if (self->spec_.transform == Transform::Identity) return;
            for (const auto& f : framer->push(bytes)) {
                self->transcript_.add(self->clock_.now(), Transcript::Dir::Down, f);
            }
        };
        auto upstream = self->network_.connect(self->spec_.upstream, std::make_shared<Downstream>(reply, seen));
        if (!upstream) {
            self->count([](RelayStats& s) { ++s.refused; });
            reply->close();
            return std::make_shared<NullSink>();
        }
        return std::make_shared<Session>(self, std::move(upstream));
    };
}

// --- UDP relay ------------------------------------------------------------

namespace {

sockaddr_in to_sockaddr(const Endpoint& e) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(e.port);
    if (::inet_pton(AF_INET, e.host.c_str(), &a.sin_addr) != 1) {
        throw Error(Errc::Network, e.str(), "bad IPv4 address " + e.host);
    }
    return a;
}

}  // namespace

UdpRelay::UdpRelay(RelaySpec spec, const Clock& clock) : spec_(std::move(spec)), clock_(clock) {
    validate(spec_);
}

UdpRelay::~UdpRelay() { stop(); }

Endpoint UdpRelay::start() {
    Endpoint bound;
    listen_fd_ = net::open_udp_socket(spec_.listen, &bound);
    running_ = true;
    thread_ = std::thread([this] { loop(); });
    return bound;
}

void UdpRelay::stop() {
    running_ = false;
    if (thread_.joinable()) thread_.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
}

RelayStats UdpRelay::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

void UdpRelay::loop() {
    struct Peer {
        sockaddr_in client;
        int fd;
    };
    std::map<std::pair<std::uint32_t, std::uint16_t>, Peer> peers;
    const auto upstream = to_sockaddr(spec_.upstream);
    std::vector<std::uint8_t> buf(65536);

    while (running_) {
        std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}};
        std::vector<const Peer*> owners{nullptr};
        for (const auto& [k, p] : peers) {
            fds.push_back({p.fd, POLLIN, 0});
            owners.push_back(&p);
        }
        if (::poll(fds.data(), fds.size(), 50) <= 0) continue;

        if (fds[0].revents & POLLIN) {
            sockaddr_in from{};
            socklen_t len = sizeof from;
            const auto n = ::recvfrom(listen_fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
            if (n >= 0) {
                const auto key = std::make_pair(from.sin_addr.s_addr, from.sin_port);
                auto it = peers.find(key);
                if (it == peers.end()) {
                    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
                    if (fd < 0 || ::connect(fd, reinterpret_cast<const sockaddr*>(&upstream), sizeof upstream) < 0) {
                        if (fd >= 0) ::close(fd);
                        std::lock_guard lock(mu_);
                        ++stats_.refused;
                        continue;
                    }
                    it = peers.emplace(key, Peer{from, fd}).first;
                    std::lock_guard lock(mu_);
                    ++stats_.connections;
                }
                Bytes dgram(buf.begin(), buf.begin() + n);
                std::optional<Bytes> changed;
                std::string note;
                if (spec_.transform == Transform::PositionOffset && classify(trimmed(dgram)) == Protocol::Hq) {
                    try {
                        const auto body = trimmed(dgram);
                        changed = offset_v1(Bytes(body.begin(), body.end()), spec_.dlat, spec_.dlon);
                    } catch (const Error& e) {
                        note = e.what();
                    }
                }
                const Bytes& out = changed ? *changed : dgram;
                ::send(it->second.fd, out.data(), out.size(), 0);
                {
                    std::lock_guard lock(mu_);
                    stats_.bytes_up += dgram.size();
                    ++stats_.frames_up;
                    if (changed) ++stats_.frames_modified;
                }
                if (spec_.transform != Transform::Identity) {
                    transcript_.add(clock_.now(), Transcript::Dir::Up, out, changed ? std::optional<Bytes>(dgram) : std::nullopt, note);
                }
            }
        }
        for (std::size_t i = 1; i < fds.size(); ++i) {
            if (!(fds[i].revents & POLLIN)) continue;
            const auto n = ::recv(fds[i].fd, buf.data(), buf.size(), 0);
            if (n < 0) continue;
            const auto& client = owners[i]->client;
            ::sendto(listen_fd_, buf.data(), static_cast<std::size_t>(n), 0, reinterpret_cast<const sockaddr*>(&client),
                     sizeof client);
            {
                std::lock_guard lock(mu_);
                stats_.bytes_down += static_cast<std::uint64_t>(n);
            }
            if (spec_.transform != Transform::Identity) {
                transcript_.add(clock_.now(), Transcript::Dir::Down, Bytes(buf.begin(), buf.begin() + n));
            }
        }
    }
    for (auto& [k, p] : peers) ::close(p.fd);
}

}  // namespace gpslab::attack
