#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "evoform/collaboration.hpp"
#include "evoform/config.hpp"
#include "evoform/error.hpp"
#include "evoform/mesh.hpp"

namespace httplib {
class Server;
}

namespace evoform {

// Uploaded and builtin meshes. Builtins are registered under their names.
class MeshStore {
 public:
  MeshStore();

  std::string add(Mesh mesh);
  Mesh get(const std::string& id) const;
  bool contains(const std::string& id) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Mesh> meshes_;
  std::uint64_t counter_ = 0;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Transport-independent request handling; the HTTP server forwards here.
class Api {
 public:
  Api(Hub& hub, MeshStore& meshes) : hub_(hub), meshes_(meshes) {}

  ApiResponse handle(const ApiRequest& req);

  Hub& hub() { return hub_; }

 private:
  ApiResponse route(const ApiRequest& req);

  Hub& hub_;
  MeshStore& meshes_;
};

// Maps an error code onto an HTTP status.
int http_status(ErrorCode code);

// HTTP front end. GET /rooms/{r}/events streams server-sent events when the
// client sends `Accept: text/event-stream`, and long-polls otherwise.
class Server {
 public:
  explicit Server(ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Replaces the hub with one rebuilt from a recorded log.
  void load_events(const std::vector<Event>& events);

  // Binds and serves on a background thread; returns the bound port. A
  // configured port of 0 binds any free port.
  int start();
  // Stops serving and writes the event log if one is configured.
  void stop();

  Hub& hub() { return *hub_; }
  const ServiceConfig& config() const { return config_; }

 private:
  void install_routes();

  ServiceConfig config_;
  std::unique_ptr<Hub> hub_;
  MeshStore meshes_;
  std::unique_ptr<Api> api_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
};

}  // namespace evoform
