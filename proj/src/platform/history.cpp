#include "gpslab/platform/history.hpp"

#include "gpslab/codec/agps.hpp"
#include "gpslab/codec/hq.hpp"
#include "gpslab/codec/yy.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::platform {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

void hq_record(TrackRecord& r, const Bytes& raw) {
    const auto msg = hq::parse(raw);
    r.serial = msg.serial;
    r.meta["variant"] = std::string(hq::variant_name(msg));
    r.meta["time"] = hq::timestamp(msg).iso8601();
    if (const auto* v = std::get_if<hq::V1>(&msg.body)) {
        r.kind = v->status_hex == hq::kStatusGeofenceAlert ? RecordKind::Alert : RecordKind::Position;
        r.position = v->position();
        r.meta["fix"] = std::string(1, v->fix);
        r.meta["lat"] = format_decimal(r.position->lat_deg, 7);
        r.meta["lon"] = format_decimal(r.position->lon_deg, 7);
        r.meta["speed"] = v->speed_raw;
        r.meta["course"] = v->course_raw;
        r.meta["status"] = v->status_hex;
    } else if (const auto* n = std::get_if<hq::Nbr>(&msg.body)) {
        r.kind = RecordKind::CellNbr;
        r.meta["fields"] = join(n->fields_raw);
        r.meta["status"] = n->status_hex;
    } else {
        const auto& l = std::get<hq::Link>(msg.body);
        r.kind = RecordKind::Link;
        r.meta["fields"] = join(l.fields_raw);
        r.meta["status"] = l.status_hex;
    }
}

void yy_record(TrackRecord& r, const Bytes& raw) {
    const auto frame = yy::parse(raw);
    r.meta["type"] = hex_upper(Bytes{frame.frame_type});
    r.meta["check"] = hex_upper(Bytes{frame.check});
    if (const auto* f = std::get_if<yy::SmsForward>(&frame.payload)) {
        r.kind = RecordKind::SmsForward;
        r.serial = f->serial;
        r.meta["iccid"] = f->iccid;
        r.meta["datetime"] = f->datetime.iso8601();
        r.meta["sender"] = f->sender;
        r.meta["text"] = f->text;
    } else {
        const auto& o = std::get<yy::Opaque>(frame.payload);
        const auto serial = yy::opaque_serial(o);
        if (!serial) throw Error(Errc::Parse, "serial", "yy frame without a leading serial");
        r.kind = RecordKind::Opaque;
        r.serial = *serial;
        r.meta["length"] = std::to_string(o.payload.size());
    }
}

void agps_record(TrackRecord& r, const Bytes& raw) {
    const auto login = agps::parse_login(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
    r.kind = RecordKind::AgpsLogin;
    // The login carries no device serial; the account name is the key.
    if (login.user.empty()) throw Error(Errc::Parse, "user", "empty AGPS user");
    r.serial = login.user;
    r.position = login.position;
    r.meta["cmd"] = login.cmd;
    r.meta["user"] = login.user;
    r.meta["pwd"] = login.pwd;
    r.meta["lat"] = format_decimal(login.position.lat_deg, 6);
    r.meta["lon"] = format_decimal(login.position.lon_deg, 6);
    r.meta["alt"] = format_decimal(login.position.alt_m, 1);
    r.meta["pacc"] = format_decimal(login.pacc, 2);
}

}  // namespace

Source source_of(RecordKind kind) noexcept {
    switch (kind) {
        case RecordKind::SmsForward:
        case RecordKind::Opaque: return Source::Yy;
        case RecordKind::AgpsLogin: return Source::Agps;
        default: return Source::Hq;
    }
}

TrackRecord record_from_frame(Source source, SimTimestamp ts, const Bytes& raw) {
    TrackRecord r;
    r.ts = ts;
    r.raw = raw;
    switch (source) {
        case Source::Hq: hq_record(r, raw); break;
        case Source::Yy: yy_record(r, raw); break;
        case Source::Agps: agps_record(r, raw); break;
    }
    return r;
}

std::string format_history_line(const TrackRecord& r) {
    std::string line = r.ts.iso8601();
    line += '\t';
    line += text::percent_encode(r.serial);
    line += '\t';
    line += record_kind_name(r.kind);
    line += '\t';
    line += hex_upper(r.raw);
    line += '\t';
    bool first = true;
    for (const auto& [k, v] : r.meta) {
        if (!first) line += ';';
        first = false;
        line += k;
        line += '=';
        line += text::percent_encode(v);
    }
    return line;
}

TrackRecord parse_history_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto cols = text::split(line, '\t');
    if (cols.size() != 5) throw Error(Errc::Parse, "line", "history line needs 5 tab-separated columns");
    const auto ts = SimTimestamp::parse_iso8601(cols[0]);
    const auto serial = text::percent_decode(cols[1]);
    if (!serial) throw Error(Errc::Parse, "serial", "bad percent-encoding");
    const auto kind = parse_record_kind(cols[2]);
    const auto raw = parse_hex(cols[3]);

    std::map<std::string, std::string> meta;
    if (!cols[4].empty()) {
        for (auto pair : text::split(cols[4], ';')) {
            const auto eq = pair.find('=');
            if (eq == std::string_view::npos) throw Error(Errc::Parse, std::string(pair), "expected key=value");
            const auto v = text::percent_decode(pair.substr(eq + 1));
            if (!v) throw Error(Errc::Parse, std::string(pair), "bad percent-encoding");
            meta.emplace(std::string(pair.substr(0, eq)), *v);
        }
    }
    auto r = record_from_frame(source_of(kind), ts, raw);
    if (r.serial != *serial || r.kind != kind || r.meta != meta) {
        throw Error(Errc::Parse, "line", "stored fields disagree with the raw frame");
    }
    return r;
}

void HistoryStore::append(TrackRecord record) {
    std::lock_guard lock(mu_);
    if (record.kind == RecordKind::SmsForward) {
        const auto it = record.meta.find("sender");
        if (it != record.meta.end()) phone_to_serial_[it->second] = record.serial;
    }
    by_serial_[record.serial].push_back(records_.size());
    records_.push_back(std::move(record));
    if (sink_) sink_(records_.back());
}

std::vector<TrackRecord> HistoryStore::all() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::vector<TrackRecord> HistoryStore::for_serial(std::string_view serial) const {
    std::lock_guard lock(mu_);
    std::vector<TrackRecord> out;
    const auto it = by_serial_.find(serial);
    if (it == by_serial_.end()) return out;
    for (auto i : it->second) out.push_back(records_[i]);
    return out;
}

bool HistoryStore::knows_serial(std::string_view serial) const {
    std::lock_guard lock(mu_);
    return by_serial_.find(serial) != by_serial_.end();
}

std::size_t HistoryStore::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::size_t HistoryStore::count(std::string_view serial, RecordKind kind) const {
    std::lock_guard lock(mu_);
    const auto it = by_serial_.find(serial);
    if (it == by_serial_.end()) return 0;
    std::size_t n = 0;
    for (auto i : it->second) n += records_[i].kind == kind;
    return n;
}

std::optional<TrackRecord> HistoryStore::latest_position(std::string_view serial) const {
    std::lock_guard lock(mu_);
    const auto it = by_serial_.find(serial);
    if (it == by_serial_.end()) return std::nullopt;
    const TrackRecord* best = nullptr;
    for (auto i : it->second) {
        const auto& r = records_[i];
        if (r.kind != RecordKind::Position) continue;
        if (!best || r.ts >= best->ts) best = &r;
    }
    if (!best) return std::nullopt;
    return *best;
}

std::optional<std::string> HistoryStore::serial_for_phone(std::string_view phone) const {
    std::lock_guard lock(mu_);
    const auto it = phone_to_serial_.find(phone);
    if (it == phone_to_serial_.end()) return std::nullopt;
    return it->second;
}

std::map<std::string, std::string> HistoryStore::phone_index() const {
    std::lock_guard lock(mu_);
    return {phone_to_serial_.begin(), phone_to_serial_.end()};
}

void HistoryStore::set_sink(Sink sink) {
    std::lock_guard lock(mu_);
    sink_ = std::move(sink);
}

std::string HistoryStore::dump() const {
    std::lock_guard lock(mu_);
    std::string out;
    for (const auto& r : records_) {
        out += format_history_line(r);
        out += '\n';
    }
    return out;
}

void EventLog::add(SimTimestamp ts, std::string_view category, std::string_view text) {
    std::lock_guard lock(mu_);
    lines_.push_back(ts.iso8601() + " " + name_ + " " + std::string(category) + " " + std::string(text));
    categories_.emplace_back(category);
}

std::vector<std::string> EventLog::lines() const {
    std::lock_guard lock(mu_);
    return lines_;
}

std::size_t EventLog::count(std::string_view category) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& c : categories_) n += c == category;
    return n;
}

}  // namespace gpslab::platform
