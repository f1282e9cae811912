#include "gpslab/platform/ingest.hpp"

#include <algorithm>

#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"

namespace gpslab::platform {

namespace {

bool is_line_noise(std::uint8_t c) { return c == '\r' || c == '\n' || c == ' ' || c == '\t'; }

class Session : public net::ByteSink {
public:
    Session(IngestContext ctx, const char* category, Endpoint remote)
        : ctx_(ctx), category_(category), remote_(std::move(remote)) {}

protected:
    void ingest(Source source, const Bytes& raw) {
        try {
            ctx_.store->append(record_from_frame(source, ctx_.clock->now(), raw));
        } catch (const Error& e) {
            reject(e.what(), raw);
        }
    }
    void reject(std::string_view why, const Bytes& raw) {
        ctx_.log->add(ctx_.clock->now(), "decode-error",
                      std::string(category_) + " from " + remote_.str() + ": " + std::string(why) +
                          " raw=" + hex_upper(raw));
    }

    IngestContext ctx_;
    const char* category_;
    Endpoint remote_;
    Bytes buf_;
};

class HqSession final : public Session {
public:
    HqSession(IngestContext ctx, Endpoint remote) : Session(ctx, "hq", std::move(remote)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
        while (true) {
            auto start = std::find_if_not(buf_.begin(), buf_.end(), is_line_noise);
            buf_.erase(buf_.begin(), start);
            const auto end = std::find(buf_.begin(), buf_.end(), std::uint8_t{'#'});
            if (end == buf_.end()) break;
            Bytes frame(buf_.begin(), end + 1);
            buf_.erase(buf_.begin(), end + 1);
            ingest(Source::Hq, frame);
        }
        if (buf_.size() > kMaxPendingBytes) {
            reject("no terminator within 4096 bytes", buf_);
            buf_.clear();
        }
    }

    void on_close() override {
        if (!buf_.empty()) reject("connection closed mid-frame", buf_);
        buf_.clear();
    }
};

class YySession final : public Session {
public:
    YySession(IngestContext ctx, Endpoint remote) : Session(ctx, "yy", std::move(remote)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
        while (!buf_.empty()) {
            if (!resync()) break;
            const auto size = yy::peek_frame_size(buf_);
            if (!size || buf_.size() < *size) break;
            Bytes frame(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*size));
            buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*size));
            ingest(Source::Yy, frame);
        }
    }

    void on_close() override {
        if (!buf_.empty()) reject("connection closed mid-frame", buf_);
        buf_.clear();
    }

private:
    // Drops bytes up to the next "yy". False when more input is needed.
    bool resync() {
        if (buf_[0] == yy::kMagic && (buf_.size() < 2 || buf_[1] == yy::kMagic)) return buf_.size() >= 2;
        std::size_t i = 1;
        while (i < buf_.size() && !(buf_[i] == yy::kMagic && (i + 1 == buf_.size() || buf_[i + 1] == yy::kMagic))) ++i;
        reject("bad magic, skipped", Bytes(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(i)));
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(i));
        return buf_.size() >= 2;
    }
};

class AgpsSession final : public Session {
public:
    AgpsSession(IngestContext ctx, std::shared_ptr<net::Connection> reply, Endpoint remote)
        : Session(ctx, "agps", std::move(remote)), reply_(std::move(reply)) {}

    void on_data(std::span<const std::uint8_t> bytes) override {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
        while (true) {
            const auto nl = std::find(buf_.begin(), buf_.end(), std::uint8_t{'\n'});
            if (nl == buf_.end()) break;
            Bytes line(buf_.begin(), nl);
            buf_.erase(buf_.begin(), nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            handle(line);
        }
        if (buf_.size() > kMaxPendingBytes) {
            reject("login line longer than 4096 bytes", buf_);
            buf_.clear();
        }
    }

    void on_close() override {
        // A client may half-close right after an unterminated login.
        if (!buf_.empty()) handle(buf_);
        buf_.clear();
    }

private:
    void handle(const Bytes& line) {
        TrackRecord rec;
        try {
            rec = record_from_frame(Source::Agps, ctx_.clock->now(), line);
        } catch (const Error& e) {
            reject(e.what(), line);
            return;
        }
        agps::Response resp;
        resp.blob = agps::assistance_blob(*rec.position);
        ctx_.store->append(std::move(rec));
        const auto wire = agps::serialize_response(resp);
        reply_->write(wire);
    }

    std::shared_ptr<net::Connection> reply_;
};

}  // namespace

net::SessionFactory hq_session_factory(IngestContext ctx) {
    return [ctx](std::shared_ptr<net::Connection>, const Endpoint& remote) -> std::shared_ptr<net::ByteSink> {
        return std::make_shared<HqSession>(ctx, remote);
    };
}

net::SessionFactory yy_session_factory(IngestContext ctx) {
    return [ctx](std::shared_ptr<net::Connection>, const Endpoint& remote) -> std::shared_ptr<net::ByteSink> {
        return std::make_shared<YySession>(ctx, remote);
    };
}

net::SessionFactory agps_session_factory(IngestContext ctx) {
    return [ctx](std::shared_ptr<net::Connection> reply, const Endpoint& remote) -> std::shared_ptr<net::ByteSink> {
        return std::make_shared<AgpsSession>(ctx, std::move(reply), remote);
    };
}

}  // namespace gpslab::platform
