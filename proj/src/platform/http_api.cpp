#include "gpslab/platform/http_api.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "gpslab/codec/hq.hpp"
#include "gpslab/core/error.hpp"
#include "gpslab/core/text.hpp"

namespace gpslab::platform {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kWsdl =
    R"(<?xml version="1.0" encoding="utf-8"?>
<wsdl:definitions xmlns:soap="http://schemas.xmlsoap.org/wsdl/soap/" xmlns:s="http://www.w3.org/2001/XMLSchema" xmlns:tns="http://tempuri.org/" xmlns:wsdl="http://schemas.xmlsoap.org/wsdl/" targetNamespace="http://tempuri.org/">
  <wsdl:types>
    <s:schema elementFormDefault="qualified" targetNamespace="http://tempuri.org/">
      <s:element name="GetTracking">
        <s:complexType>
          <s:sequence>
            <s:element minOccurs="1" maxOccurs="1" name="DeviceID" type="s:int" />
            <s:element minOccurs="0" maxOccurs="1" name="TimeZone" type="s:string" />
            <s:element minOccurs="0" maxOccurs="1" name="MapType" type="s:string" />
          </s:sequence>
        </s:complexType>
      </s:element>
      <s:element name="GetTrackingResponse">
        <s:complexType>
          <s:sequence>
            <s:element minOccurs="0" maxOccurs="1" name="GetTrackingResult" type="s:string" />
          </s:sequence>
        </s:complexType>
      </s:element>
    </s:schema>
  </wsdl:types>
  <wsdl:message name="GetTrackingSoapIn"><wsdl:part name="parameters" element="tns:GetTracking" /></wsdl:message>
  <wsdl:message name="GetTrackingSoapOut"><wsdl:part name="parameters" element="tns:GetTrackingResponse" /></wsdl:message>
  <wsdl:portType name="OpenAPIV2Soap">
    <wsdl:operation name="GetTracking">
      <wsdl:input message="tns:GetTrackingSoapIn" />
      <wsdl:output message="tns:GetTrackingSoapOut" />
    </wsdl:operation>
  </wsdl:portType>
  <wsdl:binding name="OpenAPIV2Soap" type="tns:OpenAPIV2Soap">
    <soap:binding transport="http://schemas.xmlsoap.org/soap/http" />
    <wsdl:operation name="GetTracking">
      <soap:operation soapAction="http://tempuri.org/GetTracking" style="document" />
      <wsdl:input><soap:body use="literal" /></wsdl:input>
      <wsdl:output><soap:body use="literal" /></wsdl:output>
    </wsdl:operation>
  </wsdl:binding>
  <wsdl:service name="OpenAPIV2">
    <wsdl:port name="OpenAPIV2Soap" binding="tns:OpenAPIV2Soap">
      <soap:address location="/OpenAPIV2.asmx" />
    </wsdl:port>
  </wsdl:service>
</wsdl:definitions>
)";

constexpr std::string_view kDebugPage = R"(<html><head><title>OpenAPIV2</title></head><body>
<h2>OpenAPIV2</h2>
<p>Click <a href="/OpenAPIV2.asmx?WSDL">here</a> for a complete list of operations.</p>
<h3>GetTracking</h3>
<p>To test the operation using the HTTP POST protocol, click the 'Invoke' button.</p>
<form action="/OpenAPIV2.asmx/GetTracking" method="POST">
<table>
<tr><td>Parameter</td><td>Value</td></tr>
<tr><td>DeviceID:</td><td><input type="text" name="DeviceID"></td></tr>
<tr><td>TimeZones:</td><td><input type="text" name="TimeZones"></td></tr>
<tr><td></td><td><input type="submit" value="Invoke"></td></tr>
</table>
</form>
</body></html>
)";

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

HttpResponse json_response(int status, const json& body) {
    return {status, "application/json", body.dump(), {}};
}

HttpResponse error_response(const Error& e) {
    int status = 400;
    switch (e.code()) {
        case Errc::AuthFailed: status = 401; break;
        case Errc::NotFound: status = 404; break;
        case Errc::Unsupported: status = 409; break;
        default: break;
    }
    return json_response(status, json{{"error", std::string(errc_name(e.code()))}, {"detail", e.what()}});
}

std::string require(const HttpRequest& req, std::string_view name) {
    auto v = req.param(name);
    if (!v || v->empty()) throw Error(Errc::MissingKey, std::string(name), "missing parameter");
    return *v;
}

double require_double(const HttpRequest& req, std::string_view name) {
    const auto s = require(req, name);
    const auto v = text::to_double(s);
    if (!v) throw Error(Errc::BadNumber, std::string(name), "not a number: " + s);
    return *v;
}

std::optional<std::string> session_of(const HttpRequest& req) {
    if (auto c = req.cookie("session")) return c;
    return req.param("session");
}

}  // namespace

std::optional<std::string> HttpRequest::param(std::string_view name) const {
    const auto it = params.find(std::string(name));
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> HttpRequest::cookie(std::string_view name) const {
    const auto it = headers.find("cookie");
    if (it == headers.end()) return std::nullopt;
    for (auto part : text::split(it->second, ';')) {
        part = text::trim(part);
        const auto eq = part.find('=');
        if (eq != std::string_view::npos && part.substr(0, eq) == name) return std::string(part.substr(eq + 1));
    }
    return std::nullopt;
}

std::map<std::string, std::string> parse_form(std::string_view text) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    for (auto pair : text::split(text, '&')) {
        if (pair.empty()) continue;
        std::string p(pair);
        for (auto& c : p) {
            if (c == '+') c = ' ';
        }
        const auto eq = p.find('=');
        const auto key = text::percent_decode(p.substr(0, eq));
        const auto val = eq == std::string::npos ? std::optional<std::string>("") : text::percent_decode(p.substr(eq + 1));
        if (key && val) out.emplace(*key, *val);
    }
    return out;
}

std::string tracking_json(const DeviceRegistry& registry, const HistoryStore& store, std::int64_t device_id) {
    const auto serial = registry.serial_for(device_id);
    const auto rec = serial ? store.latest_position(*serial) : std::nullopt;
    if (!rec) return ordered_json{{"state", "1"}}.dump();

    const auto msg = hq::parse(rec->raw);
    const auto& v1 = std::get<hq::V1>(msg.body);
    const auto lat = fixed(rec->position->lat_deg, 6);
    const auto lon = fixed(rec->position->lon_deg, 6);
    const double speed = v1.speed();
    ordered_json j;
    j["state"] = "0";
    j["deviceUtcDate"] = hq::timestamp(msg).api_format();
    j["latitude"] = lat;
    j["longitude"] = lon;
    j["olatitude"] = lat;
    j["olongitude"] = lon;
    j["speed"] = fixed(speed, 2);
    j["course"] = std::to_string(std::lround(v1.course()));
    j["isStop"] = speed == 0.0 ? "1" : "0";
    j["icon"] = "27_0";
    j["distance"] = "0";
    j["acc"] = "0";
    return j.dump();
}

std::string soap_tracking_envelope(std::string_view json_text) {
    std::string out =
        R"(<?xml version="1.0" encoding="utf-8"?><soap:Envelope xmlns:soap="http://schemas.xmlsoap.org/soap/envelope/" )"
        R"(xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xmlns:xsd="http://www.w3.org/2001/XMLSchema">)"
        R"(<soap:Body><GetTrackingResponse xmlns="http://tempuri.org/"><GetTrackingResult>)";
    for (char c : json_text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    out += "</GetTrackingResult></GetTrackingResponse></soap:Body></soap:Envelope>";
    return out;
}

std::optional<std::int64_t> soap_device_id(std::string_view body) {
    const auto open = body.find("<DeviceID");
    if (open == std::string_view::npos) return std::nullopt;
    const auto gt = body.find('>', open);
    if (gt == std::string_view::npos) return std::nullopt;
    const auto close = body.find("</", gt);
    if (close == std::string_view::npos) return std::nullopt;
    return text::to_int(text::trim(body.substr(gt + 1, close - gt - 1)));
}

std::string history_json(const std::vector<TrackRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json j{{"ts", r.ts.iso8601()},
               {"serial", r.serial},
               {"kind", std::string(record_kind_name(r.kind))},
               {"raw", hex_upper(r.raw)},
               {"meta", r.meta}};
        if (r.position) {
            j["latitude"] = fixed(r.position->lat_deg, 6);
            j["longitude"] = fixed(r.position->lon_deg, 6);
        }
        arr.push_back(std::move(j));
    }
    return arr.dump();
}

std::optional<HttpResponse> HttpApi::handle(const HttpRequest& req) {
    try {
        if (req.path == kApiPath || req.path.starts_with(std::string(kApiPath) + "/")) return api(req);
        if (req.path == "/login" && req.method == "POST") return login(req);
        if (req.path == "/history" && req.method == "GET") return history(req);
        if (req.path == "/geofence" && req.method == "POST") return geofence(req);
        if (req.path == "/engine" && req.method == "POST") return engine(req);
        if (req.path == "/password" && req.method == "POST") return password(req);
        if (req.path == "/admin/devices" && req.method == "GET") return admin_devices();
        if (req.path == "/admin/history" && req.method == "GET") return admin_history(req);
    } catch (const Error& e) {
        return error_response(e);
    }
    return std::nullopt;
}

HttpResponse HttpApi::api(const HttpRequest& req) {
    if (req.path == kApiPath) {
        if (req.method == "GET") {
            if (req.params.count("WSDL") || req.params.count("wsdl")) {
                return {200, "text/xml; charset=utf-8", std::string(kWsdl), {}};
            }
            return {200, "text/html; charset=utf-8", std::string(kDebugPage), {}};
        }
        if (req.method == "POST") return get_tracking(soap_device_id(req.body));
    }
    if (req.path == std::string(kApiPath) + "/GetTracking") {
        const auto id = req.param("DeviceID");
        return get_tracking(id ? text::to_int(text::trim(*id)) : std::nullopt);
    }
    return {404, "text/plain", "not found\n", {}};
}

HttpResponse HttpApi::get_tracking(std::optional<std::int64_t> device_id) {
    if (!device_id) {
        return {400, "text/xml; charset=utf-8",
                R"(<?xml version="1.0" encoding="utf-8"?><soap:Envelope xmlns:soap="http://schemas.xmlsoap.org/soap/envelope/">)"
                R"(<soap:Body><soap:Fault><faultcode>soap:Client</faultcode><faultstring>DeviceID is required</faultstring>)"
                R"(</soap:Fault></soap:Body></soap:Envelope>)",
                {}};
    }
    log_.add(clock_.now(), "api", "GetTracking DeviceID=" + std::to_string(*device_id));
    return {200, "text/xml; charset=utf-8", soap_tracking_envelope(tracking_json(registry_, store_, *device_id)), {}};
}

HttpResponse HttpApi::login(const HttpRequest& req) {
    const auto user = req.param("user").value_or("");
    const auto pass = req.param("pass").value_or("");
    try {
        const auto s = portal_.login(user, pass);
        log_.add(clock_.now(), "portal", "login ok user=" + user);
        auto resp = json_response(200, json{{"session", s.session_id}, {"serial", s.bound_serial}});
        resp.headers["Set-Cookie"] = "session=" + s.session_id + "; Path=/";
        return resp;
    } catch (const Error& e) {
        log_.add(clock_.now(), "portal", "login failed user=" + user);
        throw;
    }
}

HttpResponse HttpApi::history(const HttpRequest& req) {
    const auto session = session_of(req).value_or("");
    const auto serial = require(req, "serial");
    return {200, "application/json", history_json(portal_.history(session, serial)), {}};
}

HttpResponse HttpApi::geofence(const HttpRequest& req) {
    const auto serial = require(req, "serial");
    Geofence fence;
    fence.center = make_position(require_double(req, "lat"), require_double(req, "lon"));
    if (req.param("radius")) fence.radius_m = require_double(req, "radius");
    const auto action = req.param("action").value_or("alert");
    if (text::iequals(action, "alert")) {
        fence.action = FenceAction::Alert;
    } else if (text::iequals(action, "stop_engine")) {
        fence.action = FenceAction::StopEngine;
    } else {
        throw Error(Errc::Parse, "action", "expected alert or stop_engine");
    }
    const bool delivered = portal_.add_geofence(serial, fence);
    log_.add(clock_.now(), "portal", "geofence serial=" + serial + " action=" + std::string(fence_action_name(fence.action)));
    return json_response(200, json{{"ok", true}, {"delivered", delivered}});
}

HttpResponse HttpApi::engine(const HttpRequest& req) {
    const auto serial = require(req, "serial");
    const auto action = req.param("action").value_or("stop");
    bool on = false;
    if (text::iequals(action, "stop")) {
        on = false;
    } else if (text::iequals(action, "resume")) {
        on = true;
    } else {
        throw Error(Errc::Parse, "action", "expected stop or resume");
    }
    const bool delivered = portal_.set_engine(serial, on);
    log_.add(clock_.now(), "portal", "engine serial=" + serial + " action=" + action);
    return json_response(200, json{{"ok", true}, {"delivered", delivered}});
}

HttpResponse HttpApi::password(const HttpRequest& req) {
    portal_.change_password(session_of(req).value_or(""), require(req, "new"));
    return json_response(200, json{{"ok", true}});
}

HttpResponse HttpApi::admin_devices() {
    json arr = json::array();
    for (const auto& [id, serial] : registry_.entries()) arr.push_back(json{{"device_id", id}, {"serial", serial}});
    return json_response(200, arr);
}

HttpResponse HttpApi::admin_history(const HttpRequest& req) {
    std::string out;
    const auto serial = req.param("serial");
    for (const auto& r : serial ? store_.for_serial(*serial) : store_.all()) {
        out += format_history_line(r);
        out += '\n';
    }
    return {200, "text/plain", out, {}};
}

}  // namespace gpslab::platform
