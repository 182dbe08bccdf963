#include "easyrl/service/api.hpp"

#include <cstdio>

#include "easyrl/plugin/plugin.hpp"

namespace easyrl::service {
namespace {

HttpResponse json(int status, const Json& body) {
  return {status, "application/json", body.dump(), {}};
}

HttpResponse error(const ApiError& e) {
  Json j = e;
  return json(e.httpStatus, j);
}

Json parseBody(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) fail(ErrorCode::Validation, "request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::Validation, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::Validation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorCode::Validation, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

ApiError toApiError(ErrorCode code, const std::string& message) {
  switch (code) {
    case ErrorCode::NotFound: return {404, "not_found", message, nullptr};
    case ErrorCode::Incompatible: return {422, "incompatible", message, nullptr};
    case ErrorCode::State: return {409, "state_error", message, nullptr};
    case ErrorCode::PluginSpawn:
    case ErrorCode::PluginTimeout:
    case ErrorCode::PluginParse:
    case ErrorCode::PluginVersion:
    case ErrorCode::PluginContract:
    case ErrorCode::PluginDeath:
      return {502, "plugin_error", message, Json{{"kind", toString(code)}}};
    case ErrorCode::Shape:
    case ErrorCode::Argument:
    case ErrorCode::Validation:
    case ErrorCode::Format:
    case ErrorCode::Corruption:
      return {400, "bad_request", message, nullptr};
    default:
      return {500, "internal", message, nullptr};
  }
}

void to_json(Json& j, const ApiError& e) {
  j = {{"code", e.code}, {"message", e.message}};
  if (!e.details.is_null()) j["details"] = e.details;
}

std::string ModelRegistry::add(std::vector<std::uint8_t> bytes) {
  store::decodeModel(bytes);
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "m%06llu", static_cast<unsigned long long>(next_++));
  models_[id] = std::move(bytes);
  return id;
}

std::vector<std::uint8_t> ModelRegistry::bytes(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(id);
  if (it == models_.end()) fail(ErrorCode::NotFound, "unknown model '" + id + "'");
  return it->second;
}

store::ModelArtifact ModelRegistry::artifact(const std::string& id) const {
  return store::decodeModel(bytes(id));
}

std::vector<std::string> ModelRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, b] : models_) out.push_back(id);
  return out;
}

std::vector<std::string> apiPath(const std::string& target) {
  std::string path = target.substr(0, target.find('?'));
  static const std::string prefix = "/api/v1";
  if (path.compare(0, prefix.size(), prefix) != 0) return {};
  path.erase(0, prefix.size());
  if (!path.empty() && path[0] != '/') return {};
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string::npos) slash = path.size();
    if (slash > start) parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

std::vector<std::uint8_t> extractUpload(const std::string& body, const std::string& contentType) {
  if (contentType.rfind("multipart/form-data", 0) != 0) {
    return {body.begin(), body.end()};
  }
  auto b = contentType.find("boundary=");
  if (b == std::string::npos) fail(ErrorCode::Validation, "multipart body without boundary");
  std::string boundary = contentType.substr(b + 9);
  if (auto semi = boundary.find(';'); semi != std::string::npos) boundary.resize(semi);
  if (boundary.size() >= 2 && boundary.front() == '"') boundary = boundary.substr(1, boundary.size() - 2);
  const std::string delim = "--" + boundary;

  auto first = body.find(delim);
  if (first == std::string::npos) fail(ErrorCode::Validation, "multipart boundary not found");
  auto headersEnd = body.find("\r\n\r\n", first);
  if (headersEnd == std::string::npos) fail(ErrorCode::Validation, "malformed multipart part");
  const auto dataStart = headersEnd + 4;
  auto next = body.find("\r\n" + delim, dataStart);
  if (next == std::string::npos) fail(ErrorCode::Validation, "unterminated multipart part");
  return {body.begin() + static_cast<std::ptrdiff_t>(dataStart),
          body.begin() + static_cast<std::ptrdiff_t>(next)};
}

engine::SessionConfig Api::sessionConfigFromJson(const Json& body) const {
  engine::SessionConfig c;
  c.envId = field<std::string>(body, "envId");
  c.mode = agents::modeFromString(body.value("mode", std::string("train")));
  if (body.contains("modelId") && !body["modelId"].is_null()) {
    c.model = models_.artifact(field<std::string>(body, "modelId"));
    c.agentId = body.value("agentId", std::string());
  } else {
    c.agentId = field<std::string>(body, "agentId");
    c.hyperparameters = engine_.catalog().agent(c.agentId).defaults;
  }
  if (body.contains("hyperparameters")) {
    if (!body["hyperparameters"].is_object()) {
      fail(ErrorCode::Validation, "hyperparameters must be an object");
    }
    agents::applyJson(c.hyperparameters, body["hyperparameters"]);
  }
  if (body.contains("timing")) c.timing = engine::timingFromString(field<std::string>(body, "timing"));
  if (body.contains("displaySpeed")) c.displaySpeed = field<double>(body, "displaySpeed");
  return c;
}

HttpResponse Api::handle(const std::string& method, const std::string& target,
                         const std::string& body, const std::string& contentType) {
  const auto path = apiPath(target);
  try {
    return route(method, path, body, contentType);
  } catch (const Error& e) {
    return error(toApiError(e.code(), e.what()));
  } catch (const Json::exception& e) {
    return error(toApiError(ErrorCode::Validation, e.what()));
  } catch (const std::exception& e) {
    return error(toApiError(ErrorCode::Internal, e.what()));
  }
}

HttpResponse Api::route(const std::string& method, const std::vector<std::string>& p,
                        const std::string& body, const std::string& contentType) {
  const auto n = p.size();
  auto is = [&](std::initializer_list<const char*> parts) {
    if (parts.size() != n) return false;
    std::size_t i = 0;
    for (const char* part : parts) {
      if (part[0] != '*' && p[i] != part) return false;
      ++i;
    }
    return true;
  };
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (get && is({"agents"})) {
    Json out = Json::array();
    for (const auto& d : engine_.catalog().agents()) out.push_back(d);
    return json(200, out);
  }
  if (get && is({"environments"})) {
    Json out = Json::array();
    for (const auto& d : engine_.catalog().environments()) out.push_back(d);
    return json(200, out);
  }
  if (post && is({"sessions"})) {
    return json(201, engine_.createSession(sessionConfigFromJson(parseBody(body))));
  }
  if (get && is({"sessions"})) {
    Json out = Json::array();
    for (const auto& r : engine_.list()) out.push_back(r);
    return json(200, out);
  }
  if (get && is({"sessions", "*"})) return json(200, engine_.get(p[1]));
  if (post && is({"sessions", "*", "control"})) {
    const Json j = parseBody(body);
    std::optional<double> value;
    if (j.contains("value") && !j["value"].is_null()) value = field<double>(j, "value");
    return json(200, engine_.control(p[1], field<std::string>(j, "command"), value));
  }
  if (get && is({"sessions", "*", "results"})) {
    auto m = engine_.metrics(p[1]);
    if (m.empty()) fail(ErrorCode::State, "session has no completed episodes yet");
    return {200, "text/csv", engine_.resultsCsv(p[1]), {}};
  }
  if (get && is({"sessions", "*", "metrics"})) {
    Json out = Json::array();
    for (const auto& m : engine_.metrics(p[1])) out.push_back(m);
    return json(200, out);
  }
  if (get && is({"sessions", "*", "summary"})) return json(200, engine_.evaluate(p[1]));
  if (post && is({"sessions", "*", "model"})) {
    const std::string id = models_.add(store::encodeModel(engine_.exportModel(p[1])));
    return json(201, {{"modelId", id}});
  }
  if (get && is({"sessions", "*", "model"})) {
    const auto bytes = store::encodeModel(engine_.exportModel(p[1]));
    HttpResponse r{200, "application/octet-stream", std::string(bytes.begin(), bytes.end()), {}};
    r.headers["Content-Disposition"] = "attachment; filename=\"" + p[1] + ".ezrl\"";
    return r;
  }
  if (post && is({"models"})) {
    return json(201, {{"modelId", models_.add(extractUpload(body, contentType))}});
  }
  if (get && is({"models"})) {
    Json out = Json::array();
    for (const auto& id : models_.ids()) {
      const auto a = models_.artifact(id);
      out.push_back({{"modelId", id},
                     {"agentId", a.agentId},
                     {"envId", a.envId},
                     {"episodesCompleted", a.episodesCompleted},
                     {"createdAt", a.createdAt}});
    }
    return json(200, out);
  }
  if (get && is({"models", "*"})) {
    const auto bytes = models_.bytes(p[1]);
    HttpResponse r{200, "application/octet-stream", std::string(bytes.begin(), bytes.end()), {}};
    r.headers["Content-Disposition"] = "attachment; filename=\"" + p[1] + ".ezrl\"";
    return r;
  }
  if (post && is({"plugins"})) {
    const Json j = parseBody(body);
    plugin::PluginSpec spec;
    spec.kind = plugin::pluginKindFromString(field<std::string>(j, "kind"));
    if (j.contains("command") && j["command"].is_string()) {
      spec.command = {"/bin/sh", "-c", j["command"].get<std::string>()};
    } else {
      spec.command = field<std::vector<std::string>>(j, "command");
    }
    if (spec.command.empty()) fail(ErrorCode::Validation, "plugin command is empty");
    if (j.contains("timeoutMs")) spec.timeout = std::chrono::milliseconds(field<long>(j, "timeoutMs"));
    const std::string id = engine_.catalog().registerPlugin(spec);
    Json descriptor = spec.kind == plugin::PluginKind::Environment
                          ? Json(engine_.catalog().environment(id))
                          : Json(engine_.catalog().agent(id));
    return json(201, {{"id", id}, {"kind", plugin::toString(spec.kind)}, {"descriptor", descriptor}});
  }
  if (n == 0) fail(ErrorCode::NotFound, "no such route");
  fail(ErrorCode::NotFound, "no route for " + method + " /api/v1/" + [&] {
    std::string s;
    for (const auto& part : p) s += (s.empty() ? "" : "/") + part;
    return s;
  }());
}

}  // namespace easyrl::service
