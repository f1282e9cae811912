#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpslab/core/model.hpp"

namespace gpslab::platform {

enum class Source { Hq, Yy, Agps };

Source source_of(RecordKind kind) noexcept;

// Derives the canonical record (serial, kind, position, meta) from raw wire
// bytes. The ingest path and the history-file reader both go through here,
// so a stored record always agrees with its raw bytes. Throws gpslab::Error.
TrackRecord record_from_frame(Source source, SimTimestamp ts, const Bytes& raw);

// One record per line:
//   ISO-8601 ts TAB serial TAB kind TAB RAW-HEX TAB k=v;k=v...
// serial and values are percent-encoded.
std::string format_history_line(const TrackRecord& r);

// Re-derives the record from the raw bytes and rejects the line when the
// stored fields disagree. Throws gpslab::Error.
TrackRecord parse_history_line(std::string_view line);

// Append-only, linearizable record store.
class HistoryStore {
public:
    using Sink = std::function<void(const TrackRecord&)>;

    void append(TrackRecord record);

    std::vector<TrackRecord> all() const;
    std::vector<TrackRecord> for_serial(std::string_view serial) const;
    bool knows_serial(std::string_view serial) const;
    std::size_t size() const;
    std::size_t count(std::string_view serial, RecordKind kind) const;

    // Highest receive timestamp; later appends win ties.
    std::optional<TrackRecord> latest_position(std::string_view serial) const;

    // Learned from the sender field of forwarded SMS.
    std::optional<std::string> serial_for_phone(std::string_view phone) const;
    std::map<std::string, std::string> phone_index() const;

    // Called under the store lock after each append, in append order.
    void set_sink(Sink sink);

    std::string dump() const;

private:
    mutable std::mutex mu_;
    std::vector<TrackRecord> records_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_serial_;
    std::map<std::string, std::string, std::less<>> phone_to_serial_;
    Sink sink_;
};

// Timestamped, append-only operational log (decode errors, logins, ...).
class EventLog {
public:
    explicit EventLog(std::string name = "platform") : name_(std::move(name)) {}

    void add(SimTimestamp ts, std::string_view category, std::string_view text);
    std::vector<std::string> lines() const;
    std::size_t count(std::string_view category) const;

private:
    std::string name_;
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
    std::vector<std::string> categories_;
};

}  // namespace gpslab::platform
