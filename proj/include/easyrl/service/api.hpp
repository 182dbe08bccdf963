#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "easyrl/common/error.hpp"
#include "easyrl/engine/engine.hpp"

namespace easyrl::service {

using Json = nlohmann::json;

struct ApiError {
  int httpStatus = 500;
  std::string code;  // not_found | incompatible | bad_request | state_error | plugin_error | internal
  std::string message;
  Json details;
};

ApiError toApiError(ErrorCode code, const std::string& message);
void to_json(Json& j, const ApiError& e);

struct HttpResponse {
  int status = 200;
  std::string contentType = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

// Uploaded and saved EZRL artifacts, kept in memory by id.
class ModelRegistry {
 public:
  // Validates the bytes as an EZRL artifact before storing them.
  std::string add(std::vector<std::uint8_t> bytes);
  std::vector<std::uint8_t> bytes(const std::string& id) const;
  store::ModelArtifact artifact(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::uint8_t>> models_;
  std::uint64_t next_ = 1;
};

// The REST routes, free of any socket handling. Every route is a thin
// mapping onto Engine calls.
class Api {
 public:
  explicit Api(engine::Engine& engine) : engine_(engine) {}

  HttpResponse handle(const std::string& method, const std::string& target,
                      const std::string& body, const std::string& contentType);

  // The SessionConfig a POST /sessions body describes.
  engine::SessionConfig sessionConfigFromJson(const Json& body) const;

  ModelRegistry& models() { return models_; }
  engine::Engine& engine() { return engine_; }

 private:
  HttpResponse route(const std::string& method, const std::vector<std::string>& path,
                     const std::string& body, const std::string& contentType);

  engine::Engine& engine_;
  ModelRegistry models_;
};

// First file part of a multipart/form-data body (or the whole body for any
// other content type).
std::vector<std::uint8_t> extractUpload(const std::string& body, const std::string& contentType);

// Splits "/api/v1/sessions/s000001" into {"sessions", "s000001"}; empty if the
// target is outside /api/v1. The query string is dropped.
std::vector<std::string> apiPath(const std::string& target);

}  // namespace easyrl::service
