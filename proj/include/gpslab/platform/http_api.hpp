#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gpslab/platform/history.hpp"
#include "gpslab/platform/portal.hpp"

namespace gpslab::platform {

struct HttpRequest {
    std::string method = "GET";
    std::string path;
    std::map<std::string, std::string> params;  // query string and form body merged
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;

    std::optional<std::string> param(std::string_view name) const;
    std::optional<std::string> cookie(std::string_view name) const;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "text/plain";
    std::string body;
    std::map<std::string, std::string> headers;
};

inline constexpr std::string_view kApiPath = "/OpenAPIV2.asmx";

// The tracking document for a device: a JSON object with string values,
// {"state":"1"} when the id is unknown or has no position yet.
std::string tracking_json(const DeviceRegistry& registry, const HistoryStore& store, std::int64_t device_id);
std::string soap_tracking_envelope(std::string_view json);

// DeviceID from a SOAP GetTracking body; nullopt when absent or not an integer.
std::optional<std::int64_t> soap_device_id(std::string_view body);

// Query-string / form decoding ('+' is a space).
std::map<std::string, std::string> parse_form(std::string_view text);
std::string history_json(const std::vector<TrackRecord>& records);

// Transport-free router for the API, the portal and the admin pages.
class HttpApi {
public:
    HttpApi(DeviceRegistry& registry, HistoryStore& store, Portal& portal, EventLog& log, const Clock& clock)
        : registry_(registry), store_(store), portal_(portal), log_(log), clock_(clock) {}

    // nullopt when no route matches.
    std::optional<HttpResponse> handle(const HttpRequest& req);

private:
    HttpResponse api(const HttpRequest& req);
    HttpResponse get_tracking(std::optional<std::int64_t> device_id);
    HttpResponse login(const HttpRequest& req);
    HttpResponse history(const HttpRequest& req);
    HttpResponse geofence(const HttpRequest& req);
    HttpResponse engine(const HttpRequest& req);
    HttpResponse password(const HttpRequest& req);
    HttpResponse admin_devices();
    HttpResponse admin_history(const HttpRequest& req);

    DeviceRegistry& registry_;
    HistoryStore& store_;
    Portal& portal_;
    EventLog& log_;
    const Clock& clock_;
};

}  // namespace gpslab::platform
