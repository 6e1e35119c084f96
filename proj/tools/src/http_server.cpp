#include "http_server.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "effortlab/error.hpp"

namespace effortlab::http {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void SendError(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  ordered_json body;
  body["code"] = code;
  body["message"] = message;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendJson(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Runs a handler, translating exceptions into {code, message} bodies.
template <typename Fn>
httplib::Server::Handler Guard(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), ToString(e.code()), e.what());
    } catch (const json::exception& e) {
      SendError(res, 400, "bad_request", std::string("invalid JSON body: ") + e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, "internal", e.what());
    }
  };
}

json Body(const httplib::Request& req) {
  const json body = json::parse(req.body);
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return body;
}

std::string RequiredString(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + key + "'");
  }
  return body.at(key).get<std::string>();
}

ordered_json ReportJson(const eval::ScoreReport& r) {
  ordered_json j;
  for (const auto& [key, value] : r.keys) j[key] = value;
  j["n"] = r.n;
  j["mean_wrr"] = r.mean_wrr;
  j["ci95"] = r.ci95;
  return j;
}

}  // namespace

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kFormat: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kGone: return 410;
    case ErrorCode::kSequencing:
    case ErrorCode::kConflict:
    case ErrorCode::kSessionDone:
    case ErrorCode::kExhausted: return 409;
    default: return 500;
  }
}

std::unique_ptr<httplib::Server> MakeServer(service::ListeningTest& test, const HttpOptions& options) {
  auto server = std::make_unique<httplib::Server>();
  auto& s = *server;

  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}, {"Cache-Control", "no-store"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  s.Post("/sessions", Guard([&test](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    const auto device = eval::ParseAudioDevice(RequiredString(body, "device"));
    const service::SessionInfo info = test.CreateSession(RequiredString(body, "listener_id"), device);
    ordered_json out;
    out["session_id"] = info.session_id;
    out["listener_id"] = info.listener_id;
    out["device"] = eval::ToString(info.device);
    out["total"] = info.total;
    SendJson(res, out, 201);
  }));

  s.Get(R"(/sessions/([^/]+)/next)", Guard([&test](const httplib::Request& req, httplib::Response& res) {
    const service::NextTrial next = test.Next(req.matches[1]);
    ordered_json out;
    out["done"] = next.done;
    out["index"] = next.index;
    out["total"] = next.total;
    if (!next.done) {
      out["trial_id"] = next.trial_id;
      out["played"] = next.played;
      if (!next.audio_token.empty()) {
        out["audio_url"] = "/trials/" + next.trial_id + "/audio?token=" + next.audio_token;
      }
    }
    SendJson(res, out);
  }));

  s.Get(R"(/trials/([^/]+)/audio)", Guard([&test](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("token")) throw Error(ErrorCode::kNotFound, "audio requires a token");
    const auto bytes = test.ConsumeAudio(req.matches[1], req.get_param_value("token"));
    res.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
  }));

  s.Post(R"(/sessions/([^/]+)/responses)", Guard([&test](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    const std::string session = req.matches[1];
    test.Submit(session, RequiredString(body, "trial_id"), RequiredString(body, "transcript"));
    const service::SessionInfo info = test.Session(session);
    ordered_json out;
    out["ok"] = true;
    out["index"] = info.cursor;
    out["total"] = info.total;
    out["done"] = info.done();
    SendJson(res, out);
  }));

  s.Get("/results", Guard([&test](const httplib::Request& req, httplib::Response& res) {
    std::optional<eval::Grouping> grouping;
    if (req.has_param("group")) grouping = eval::ParseGrouping(req.get_param_value("group"));
    const service::ResultsView view = test.Results(grouping);
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
    if (format == "csv") {
      res.set_content(view.csv, "text/csv");
      return;
    }
    if (format != "json") throw Error(ErrorCode::kInvalidArgument, "format must be json or csv");
    ordered_json out;
    out["listeners"] = ordered_json::array();
    for (const auto& l : view.outcome.listeners) {
      ordered_json j;
      j["listener_id"] = l.listener_id;
      j["status"] = eval::ToString(l.qualification.status);
      j["reference_wrr"] = l.qualification.reference_wrr;
      j["test_wrr"] = l.qualification.test_wrr;
      j["n_reference"] = l.qualification.n_reference;
      j["n_test"] = l.qualification.n_test;
      if (l.device) j["device"] = eval::ToString(*l.device);
      out["listeners"].push_back(std::move(j));
    }
    out["reports"] = ordered_json::array();
    for (const auto& r : view.outcome.reports) out["reports"].push_back(ReportJson(r));
    out["device_reports"] = ordered_json::array();
    for (const auto& r : view.outcome.device_reports) out["device_reports"].push_back(ReportJson(r));
    out["warnings"] = view.outcome.warnings;
    out["csv"] = view.csv;
    SendJson(res, out);
  }));

  if (!options.static_dir.empty()) s.set_mount_point("/", options.static_dir.string());
  return server;
}

}  // namespace effortlab::http
