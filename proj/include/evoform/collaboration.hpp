#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "evoform/codec.hpp"
#include "evoform/evolution.hpp"

namespace evoform {

// Event kinds written to a room's log.
namespace event_kind {
inline constexpr const char* kRoomCreated = "room-created";
inline constexpr const char* kSpacesAssigned = "spaces-assigned";
inline constexpr const char* kSelection = "selection";
inline constexpr const char* kGeneration = "generation";
inline constexpr const char* kInjection = "injection";
inline constexpr const char* kSpaceExpanded = "space-expanded";
}  // namespace event_kind

struct Event {
  std::uint64_t seq = 0;
  std::string room;
  std::string session;  // empty for room-level events
  std::string kind;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
};

// One JSON object per line.
std::string events_to_jsonl(const std::vector<Event>& events);
std::vector<Event> events_from_jsonl(const std::string& text);

// Append-only, per-room. Sequence numbers start at 1 and increase by one.
class EventLog {
 public:
  explicit EventLog(std::string room) : room_(std::move(room)) {}

  const Event& append(std::string session, std::string kind,
                      nlohmann::json payload);

  std::vector<Event> since(std::uint64_t seq) const;
  // Blocks until an event newer than `seq` exists, the timeout expires, or
  // close() is called.
  std::vector<Event> wait_since(std::uint64_t seq,
                                std::chrono::milliseconds timeout) const;
  std::uint64_t last_seq() const;
  void close();

 private:
  std::string room_;
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<Event> events_;
  bool closed_ = false;
};

struct Room {
  std::string id;
  std::vector<std::string> members;
  int visibility_k = 3;

  bool has_member(const std::string& session) const;
};

// One user's interactive GA.
struct Session {
  std::string id;
  std::string owner;
  std::string room;
  SearchSpace space;
  Population population;
  std::string mesh_id;
  GAParams params;
  CodecConfig config;
  std::uint64_t seed = 0;
  std::vector<std::size_t> pending_picks;
};

// Peer id -> that peer's top individuals.
using PeerSample = std::map<std::string, std::vector<Individual>>;

// Top `k` individuals by fitness, ties broken by lower id.
std::vector<Individual> top_individuals(const Population& pop, int k);

// For every member of `room` other than `viewer`, the top visibility_k of
// its population in `populations`. Throws kNotMember if viewer is absent.
PeerSample peer_sample(const Room& room, const std::string& viewer,
                       const std::map<std::string, Population>& populations);

// Replaces the host's lowest-fitness individual (ties: higher id) with a copy
// of `donor`, pinned to the host maximum fitness, and widens the host space by
// the donor's masks. Returns the host's new state.
Session inject(const Session& host, const Individual& donor,
               const std::string& donor_session);

struct MemberSpec {
  std::string name;
  SearchSpace space;
};

struct HubConfig {
  std::uint64_t seed = 1;
  GAParams params;
  int depth = 3;
  int visibility_k = 3;
  std::string default_mesh = "sphere";
};

struct RoomCreated {
  std::string room;
  std::vector<std::string> sessions;
};

struct InjectOutcome {
  std::uint64_t replaced_id = 0;
  std::uint64_t new_id = 0;
  SearchSpace space;
  bool expanded = false;
};

// Rooms and sessions. Operations on one session are serialized; different
// sessions proceed independently. Every mutation is appended to the room's
// event log, which replay() turns back into an identical hub.
class Hub {
 public:
  explicit Hub(HubConfig config = {});
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  const HubConfig& config() const { return config_; }

  RoomCreated create_room(const std::vector<MemberSpec>& members,
                          std::optional<GAParams> params = std::nullopt,
                          std::optional<std::string> mesh = std::nullopt);
  // Reseeds each member's population inside its new space. `split` is
  // session id -> space.
  void assign_spaces(const std::string& room,
                     const std::map<std::string, SearchSpace>& split);

  Session session(const std::string& id) const;
  Room room(const std::string& id) const;
  std::vector<std::string> room_ids() const;

  // Stores picks for the next step and rates the population with them.
  void set_picks(const std::string& session, std::vector<std::size_t> picks);
  Population step(const std::string& session);
  PeerSample peer_sample(const std::string& viewer) const;
  InjectOutcome inject(const std::string& host, const std::string& donor_session,
                       std::uint64_t individual_id);

  std::vector<Event> events(const std::string& room,
                            std::uint64_t since = 0) const;
  std::vector<Event> wait_events(const std::string& room, std::uint64_t since,
                                 std::chrono::milliseconds timeout) const;
  std::vector<Event> history(const std::string& session) const;
  // Every room's log merged, in creation then sequence order.
  std::vector<Event> all_events() const;

  // Wakes blocked event waiters; used on shutdown.
  void close_streams();

  // Rebuilds a hub by re-executing a recorded event sequence.
  static std::unique_ptr<Hub> replay(const std::vector<Event>& events,
                                     HubConfig config = {});

 private:
  struct SessionSlot {
    mutable std::mutex mutex;
    Session state;
  };
  struct RoomSlot {
    Room room;
    std::unique_ptr<EventLog> log;
  };

  SessionSlot& slot(const std::string& id) const;
  RoomSlot& room_slot(const std::string& id) const;
  RoomCreated create_room_with(const std::vector<MemberSpec>& members,
                               const GAParams& params, int depth,
                               const std::string& mesh, int visibility_k,
                               const std::vector<std::uint64_t>* seeds);
  void apply_injection(const std::string& host, const std::string& donor_session,
                       const Individual& donor, InjectOutcome* outcome);

  HubConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<SessionSlot>> sessions_;
  std::map<std::string, std::unique_ptr<RoomSlot>> rooms_;
  std::vector<std::string> room_order_;
  std::uint64_t session_counter_ = 0;
  std::uint64_t room_counter_ = 0;
};

// JSON helpers shared with the service layer.
nlohmann::json params_to_json(const GAParams& params);
GAParams params_from_json(const nlohmann::json& j, GAParams base = {});
nlohmann::json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);
nlohmann::json individual_to_json(const Individual& ind);

}  // namespace evoform
