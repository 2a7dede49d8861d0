#include "evoform/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "evoform/error.hpp"
#include "evoform/expression.hpp"
#include "evoform/format.hpp"

namespace evoform {

using nlohmann::json;

namespace {

constexpr long long kMaxWaitMs = 30000;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

ApiResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

ApiResponse text_response(std::string body) {
  return {200, "text/plain; charset=utf-8", std::move(body)};
}

ApiResponse error_response(int status, const std::string& code,
                           const std::string& message) {
  return json_response(status, json{{"code", code}, {"message", message}});
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("request body: ") + e.what());
  }
}

std::uint64_t parse_id(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kNotFound, std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

double query_double(const ApiRequest& req, const std::string& key,
                    double fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument,
              "query parameter " + key + " must be a number");
}

std::uint64_t query_uint(const ApiRequest& req, const std::string& key,
                         std::uint64_t fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return fallback;
  std::uint64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "query parameter " + key + " must be a non-negative integer");
  }
  return v;
}

std::string shader_for(const Session& s, const Individual& ind) {
  const ExpressionTree tree = build_tree(ind.genome, s.space);
  return emit_source(tree, effective_channels(ind.genome));
}

json individual_view(const Session& s, const Individual& ind) {
  json j = individual_to_json(ind);
  j["source"] = shader_for(s, ind);
  return j;
}

json session_view(const Session& s) {
  return json{{"id", s.id},
              {"owner", s.owner},
              {"room", s.room},
              {"space", space_to_json(s.space)},
              {"generation", s.population.generation},
              {"population_size", s.population.size()},
              {"depth", s.config.depth()},
              {"mesh", s.mesh_id},
              {"pending_picks", s.pending_picks},
              {"params", params_to_json(s.params)}};
}

json events_json(const std::vector<Event>& events) {
  json arr = json::array();
  for (const auto& e : events) arr.push_back(e.to_json());
  return arr;
}

std::string sse_frame(const Event& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind +
         "\ndata: " + e.to_json().dump() + "\n\n";
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kStaleDonor:
      return 409;
    case ErrorCode::kNotMember:
    case ErrorCode::kNotPermitted:
      return 403;
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kLength:
    case ErrorCode::kInvalidSpace:
    case ErrorCode::kInvalidMask:
    case ErrorCode::kInvalidPick:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedMesh:
      return 422;
  }
  return 500;
}

// ---------------------------------------------------------------------------
// MeshStore

MeshStore::MeshStore() {
  for (const char* name : {"sphere", "cube", "cylinder"}) {
    meshes_[name] = builtin_mesh(name);
  }
}

std::string MeshStore::add(Mesh mesh) {
  mesh.validate();
  std::lock_guard lock(mutex_);
  std::string id = "m" + std::to_string(++counter_);
  meshes_[id] = std::move(mesh);
  return id;
}

Mesh MeshStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = meshes_.find(id);
  if (it == meshes_.end()) throw Error(ErrorCode::kNotFound, "no mesh " + id);
  return it->second;
}

bool MeshStore::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return meshes_.count(id) > 0;
}

// ---------------------------------------------------------------------------
// Api

ApiResponse Api::handle(const ApiRequest& req) {
  try {
    return route(req);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), error_code_name(e.code()),
                          e.what());
  } catch (const json::exception& e) {
    return error_response(422, "invalid-argument", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ApiResponse Api::route(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  const std::size_t n = parts.size();

  if (n == 1 && parts[0] == "rooms" && post) {
    const json body = parse_body(req.body);
    std::vector<MemberSpec> members;
    for (const auto& m : body.at("members")) {
      members.push_back({m.value("name", std::string()),
                         space_from_json(m.at("space"))});
    }
    std::optional<GAParams> params;
    if (body.contains("params")) {
      params = params_from_json(body.at("params"), hub_.config().params);
    }
    std::optional<std::string> mesh;
    if (body.contains("mesh")) {
      mesh = body.at("mesh").get<std::string>();
      if (!meshes_.contains(*mesh)) {
        throw Error(ErrorCode::kNotFound, "no mesh " + *mesh);
      }
    }
    const RoomCreated made = hub_.create_room(members, params, mesh);
    json sessions = json::array();
    for (std::size_t i = 0; i < made.sessions.size(); ++i) {
      sessions.push_back({{"id", made.sessions[i]}, {"name", members[i].name}});
    }
    return json_response(201, json{{"room", made.room}, {"sessions", sessions}});
  }

  if (n >= 2 && parts[0] == "rooms") {
    const std::string& rid = parts[1];
    if (n == 2 && get) {
      const Room r = hub_.room(rid);
      return json_response(200, json{{"id", r.id},
                                     {"members", r.members},
                                     {"visibility_k", r.visibility_k}});
    }
    if (n == 3 && parts[2] == "events" && get) {
      const std::uint64_t since = query_uint(req, "since", 0);
      const auto wait = static_cast<long long>(
          std::min<std::uint64_t>(query_uint(req, "wait_ms", 0), kMaxWaitMs));
      const auto evs = wait > 0
                           ? hub_.wait_events(rid, since, std::chrono::milliseconds(wait))
                           : hub_.events(rid, since);
      const std::uint64_t last = evs.empty() ? since : evs.back().seq;
      return json_response(200, json{{"events", events_json(evs)},
                                     {"last_seq", last}});
    }
  }

  if (n >= 2 && parts[0] == "sessions") {
    const std::string& sid = parts[1];
    if (n == 2 && get) return json_response(200, session_view(hub_.session(sid)));
    if (n == 3 && parts[2] == "population" && get) {
      const Session s = hub_.session(sid);
      json inds = json::array();
      for (const auto& ind : s.population.individuals) {
        inds.push_back(individual_view(s, ind));
      }
      return json_response(200, json{{"session", s.id},
                                     {"generation", s.population.generation},
                                     {"individuals", inds}});
    }
    if (n == 3 && parts[2] == "picks" && post) {
      const json body = parse_body(req.body);
      std::vector<std::size_t> picks;
      for (const auto& v : body.at("indices")) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw Error(ErrorCode::kInvalidPick, "pick indices must be non-negative integers");
        }
        picks.push_back(v.get<std::size_t>());
      }
      hub_.set_picks(sid, std::move(picks));
      return {204, "application/json", ""};
    }
    if (n == 3 && parts[2] == "step" && post) {
      const Population pop = hub_.step(sid);
      json ids = json::array();
      for (const auto& ind : pop.individuals) ids.push_back(ind.id);
      return json_response(200, json{{"session", sid},
                                     {"generation", pop.generation},
                                     {"ids", ids}});
    }
    if (n == 3 && parts[2] == "peers" && get) {
      const Session viewer = hub_.session(sid);
      json peers = json::object();
      for (const auto& [peer, inds] : hub_.peer_sample(sid)) {
        const Session ps = hub_.session(peer);
        json arr = json::array();
        for (const auto& ind : inds) arr.push_back(individual_view(ps, ind));
        peers[peer] = arr;
      }
      return json_response(200, json{{"session", sid}, {"peers", peers}});
    }
    if (n == 3 && parts[2] == "inject" && post) {
      const json body = parse_body(req.body);
      const auto donor = body.at("donor_session").get<std::string>();
      const auto id = body.at("individual_id").get<std::uint64_t>();
      const InjectOutcome out = hub_.inject(sid, donor, id);
      return json_response(200, json{{"space", space_to_json(out.space)},
                                     {"replaced_id", out.replaced_id},
                                     {"new_id", out.new_id},
                                     {"expanded", out.expanded}});
    }
    if (n == 3 && parts[2] == "history" && get) {
      return json_response(200, json{{"events", events_json(hub_.history(sid))}});
    }
    if (n == 5 && parts[2] == "individuals" && get) {
      const Session s = hub_.session(sid);
      const std::uint64_t id = parse_id(parts[3], "individual id");
      const Individual& ind = s.population.individuals[s.population.index_of(id)];
      if (parts[4] == "shader") return text_response(shader_for(s, ind) + "\n");
      if (parts[4] == "mesh") {
        const TimeParam t(query_double(req, "t", 0.0));
        const Mesh mesh = meshes_.get(s.mesh_id);
        const ExpressionTree tree = build_tree(ind.genome, s.space);
        return text_response(
            export_obj(displace_mesh(mesh, tree, effective_channels(ind.genome), t)));
      }
    }
  }

  if (n == 1 && parts[0] == "meshes" && post) {
    const std::string id = meshes_.add(load_obj(req.body));
    return json_response(201, json{{"id", id}});
  }
  if (n == 2 && parts[0] == "meshes" && get) {
    return text_response(export_obj(meshes_.get(parts[1])));
  }

  return error_response(404, "not-found", req.method + " " + req.path);
}

// ---------------------------------------------------------------------------
// Server

Server::Server(ServiceConfig config)
    : config_(std::move(config)),
      hub_(std::make_unique<Hub>(config_.hub)),
      api_(std::make_unique<Api>(*hub_, meshes_)),
      http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Server::~Server() { stop(); }

void Server::load_events(const std::vector<Event>& events) {
  hub_ = Hub::replay(events, config_.hub);
  api_ = std::make_unique<Api>(*hub_, meshes_);
}

void Server::install_routes() {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest ar{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) ar.query[k] = v;

    const auto parts = split_path(req.path);
    const bool wants_stream =
        req.method == "GET" && parts.size() == 3 && parts[0] == "rooms" &&
        parts[2] == "events" &&
        (req.get_header_value("Accept").find("text/event-stream") !=
             std::string::npos ||
         req.has_param("stream"));
    if (wants_stream) {
      const std::string room = parts[1];
      try {
        hub_->room(room);
      } catch (const Error& e) {
        const ApiResponse err = api_->handle(ar);
        res.status = err.status;
        res.set_content(err.body, err.content_type);
        return;
      }
      std::uint64_t since = 0;
      if (auto it = ar.query.find("since"); it != ar.query.end()) {
        std::from_chars(it->second.data(), it->second.data() + it->second.size(),
                        since);
      }
      auto cursor = std::make_shared<std::uint64_t>(since);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, room, cursor](std::size_t, httplib::DataSink& sink) {
            if (stopping_) {
              sink.done();
              return true;
            }
            const auto evs =
                hub_->wait_events(room, *cursor, std::chrono::milliseconds(250));
            for (const auto& e : evs) {
              const std::string frame = sse_frame(e);
              if (!sink.write(frame.data(), frame.size())) return false;
              *cursor = e.seq;
            }
            if (evs.empty()) {
              static constexpr char kPing[] = ": keep-alive\n\n";
              if (!sink.is_writable() || !sink.write(kPing, sizeof(kPing) - 1)) {
                return false;
              }
            }
            return true;
          });
      return;
    }

    const ApiResponse out = api_->handle(ar);
    res.status = out.status;
    if (!out.body.empty() || out.status != 204) {
      res.set_content(out.body, out.content_type);
    }
  };
  http_->Get(".*", forward);
  http_->Post(".*", forward);
}

int Server::start() {
  int port = config_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(config_.host);
  } else if (!http_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port;
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  hub_->close_streams();
  http_->stop();
  if (thread_.joinable()) thread_.join();
  if (!config_.event_log.empty()) {
    std::ofstream out(config_.event_log, std::ios::binary);
    out << events_to_jsonl(hub_->all_events());
  }
}

}  // namespace evoform
