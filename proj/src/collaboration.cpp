#include "evoform/collaboration.hpp"

#include <algorithm>
#include <sstream>

#include "evoform/error.hpp"
#include "evoform/rng.hpp"

namespace evoform {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitSalt = 0x1217;
constexpr std::uint64_t kStepSalt = 0x57e9;

std::uint64_t step_seed(const Session& s) {
  return mix_seed(mix_seed(s.seed, kStepSalt), s.population.generation);
}

std::uint64_t init_seed(const Session& s, std::uint64_t round) {
  return mix_seed(mix_seed(s.seed, kInitSalt), round);
}

json ids_of(const Population& pop) {
  json ids = json::array();
  for (const auto& ind : pop.individuals) ids.push_back(ind.id);
  return ids;
}

}  // namespace

// ---------------------------------------------------------------------------
// Events

json Event::to_json() const {
  return json{{"seq", seq},
              {"room", room},
              {"session", session},
              {"kind", kind},
              {"payload", payload}};
}

Event Event::from_json(const json& j) {
  try {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.room = j.value("room", std::string());
    e.session = j.value("session", std::string());
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.value("payload", json::object());
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("event: ") + ex.what());
  }
}

std::string events_to_jsonl(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<Event> events_from_jsonl(const std::string& text) {
  std::vector<Event> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Event::from_json(json::parse(line)));
    } catch (const json::parse_error& ex) {
      throw Error(ErrorCode::kParse, std::string("event log: ") + ex.what());
    }
  }
  return out;
}

const Event& EventLog::append(std::string session, std::string kind,
                              json payload) {
  std::lock_guard lock(mutex_);
  Event e;
  e.seq = events_.size() + 1;
  e.room = room_;
  e.session = std::move(session);
  e.kind = std::move(kind);
  e.payload = std::move(payload);
  events_.push_back(std::move(e));
  cv_.notify_all();
  return events_.back();
}

std::vector<Event> EventLog::since(std::uint64_t seq) const {
  std::lock_guard lock(mutex_);
  if (seq >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

std::vector<Event> EventLog::wait_since(std::uint64_t seq,
                                        std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout,
               [&] { return closed_ || events_.size() > seq; });
  if (seq >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

void EventLog::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
  cv_.notify_all();
}

// ---------------------------------------------------------------------------
// Pure operations

bool Room::has_member(const std::string& session) const {
  return std::find(members.begin(), members.end(), session) != members.end();
}

std::vector<Individual> top_individuals(const Population& pop, int k) {
  std::vector<Individual> sorted = pop.individuals;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Individual& a, const Individual& b) {
                     if (a.fitness != b.fitness) return a.fitness > b.fitness;
                     return a.id < b.id;
                   });
  if (k >= 0 && sorted.size() > static_cast<std::size_t>(k)) {
    sorted.resize(static_cast<std::size_t>(k));
  }
  return sorted;
}

PeerSample peer_sample(const Room& room, const std::string& viewer,
                       const std::map<std::string, Population>& populations) {
  if (!room.has_member(viewer)) {
    throw Error(ErrorCode::kNotMember,
                viewer + " is not a member of room " + room.id);
  }
  PeerSample out;
  for (const auto& member : room.members) {
    if (member == viewer) continue;
    auto it = populations.find(member);
    if (it == populations.end()) {
      throw Error(ErrorCode::kNotFound, "no session " + member);
    }
    out[member] = top_individuals(it->second, room.visibility_k);
  }
  return out;
}

Session inject(const Session& host, const Individual& donor,
               const std::string& donor_session) {
  if (host.population.individuals.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "host population is empty");
  }
  if (!(donor.genome.config == host.config)) {
    throw Error(ErrorCode::kInvalidArgument,
                "donor genome layout differs from host");
  }
  Session out = host;
  auto& inds = out.population.individuals;

  std::size_t worst = 0;
  double max_fitness = inds[0].fitness;
  for (std::size_t i = 1; i < inds.size(); ++i) {
    max_fitness = std::max(max_fitness, inds[i].fitness);
    const bool lower = inds[i].fitness < inds[worst].fitness;
    const bool tie_higher_id =
        inds[i].fitness == inds[worst].fitness && inds[i].id > inds[worst].id;
    if (lower || tie_higher_id) worst = i;
  }

  Individual copy;
  copy.id = out.population.next_id++;
  copy.genome = donor.genome;
  copy.fitness = max_fitness;
  copy.provenance.injected = true;
  copy.provenance.origin_session = donor_session;
  copy.provenance.bias_remaining = host.params.bias_generations;
  inds[worst] = std::move(copy);

  out.space.channels |= effective_channels(donor.genome);
  out.space.variables |= effective_variables(donor.genome);
  return out;
}

// ---------------------------------------------------------------------------
// JSON helpers

json params_to_json(const GAParams& p) {
  return json{{"population_size", p.population_size},
              {"crossover_rate", p.crossover_rate},
              {"mutation_rate", p.mutation_rate},
              {"scaling_c", p.scaling_c},
              {"pick_fitness", p.pick_fitness},
              {"floor_fitness", p.floor_fitness},
              {"bias_generations", p.bias_generations}};
}

GAParams params_from_json(const json& j, GAParams base) {
  try {
    if (j.is_null()) return base;
    base.population_size = j.value("population_size", base.population_size);
    base.crossover_rate = j.value("crossover_rate", base.crossover_rate);
    base.mutation_rate = j.value("mutation_rate", base.mutation_rate);
    base.scaling_c = j.value("scaling_c", base.scaling_c);
    base.pick_fitness = j.value("pick_fitness", base.pick_fitness);
    base.floor_fitness = j.value("floor_fitness", base.floor_fitness);
    base.bias_generations = j.value("bias_generations", base.bias_generations);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("params: ") + ex.what());
  }
  base.validate();
  return base;
}

json space_to_json(const SearchSpace& space) {
  return json{{"channels", space.channels.to_string()},
              {"variables", space.variables.to_string()}};
}

SearchSpace space_from_json(const json& j) {
  const auto letters = [&](const char* key) {
    if (!j.contains(key)) {
      throw Error(ErrorCode::kInvalidSpace, std::string("space needs ") + key);
    }
    const json& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      std::string s;
      for (const auto& e : v) s += e.get<std::string>();
      return s;
    }
    throw Error(ErrorCode::kInvalidSpace, std::string(key) + " must be a string");
  };
  SearchSpace s{ChannelMask::parse(letters("channels")),
                VariableMask::parse(letters("variables"))};
  s.validate();
  return s;
}

json individual_to_json(const Individual& ind) {
  json prov{{"kind", ind.provenance.injected ? "injected" : "native"}};
  if (ind.provenance.injected) {
    prov["origin_session"] = ind.provenance.origin_session;
    prov["bias_remaining"] = ind.provenance.bias_remaining;
  }
  return json{{"id", ind.id},
              {"genome", genome_to_hex(ind.genome)},
              {"depth", ind.genome.config.depth()},
              {"channels", effective_channels(ind.genome).to_string()},
              {"variables", effective_variables(ind.genome).to_string()},
              {"fitness", ind.fitness},
              {"provenance", prov}};
}

// ---------------------------------------------------------------------------
// Hub

Hub::Hub(HubConfig config) : config_(std::move(config)) {
  config_.params.validate();
  CodecConfig check(config_.depth);
  (void)check;
}

Hub::~Hub() { close_streams(); }

Hub::SessionSlot& Hub::slot(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session " + id);
  return *it->second;
}

Hub::RoomSlot& Hub::room_slot(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = rooms_.find(id);
  if (it == rooms_.end()) throw Error(ErrorCode::kNotFound, "no room " + id);
  return *it->second;
}

RoomCreated Hub::create_room(const std::vector<MemberSpec>& members,
                             std::optional<GAParams> params,
                             std::optional<std::string> mesh) {
  return create_room_with(members, params.value_or(config_.params),
                          config_.depth, mesh.value_or(config_.default_mesh),
                          config_.visibility_k, nullptr);
}

RoomCreated Hub::create_room_with(const std::vector<MemberSpec>& members,
                                  const GAParams& params, int depth,
                                  const std::string& mesh, int visibility_k,
                                  const std::vector<std::uint64_t>* seeds) {
  if (members.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a room needs at least two members");
  }
  params.validate();
  for (const auto& m : members) m.space.validate();
  const CodecConfig codec(depth);

  std::unique_lock lock(registry_mutex_);
  auto room = std::make_unique<RoomSlot>();
  room->room.id = "r" + std::to_string(++room_counter_);
  room->room.visibility_k = visibility_k;
  room->log = std::make_unique<EventLog>(room->room.id);

  RoomCreated created{room->room.id, {}};
  json member_records = json::array();
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto s = std::make_unique<SessionSlot>();
    Session& st = s->state;
    st.id = "s" + std::to_string(++session_counter_);
    st.owner = members[i].name;
    st.room = room->room.id;
    st.space = members[i].space;
    st.mesh_id = mesh;
    st.params = params;
    st.config = codec;
    st.seed = seeds ? seeds->at(i) : mix_seed(config_.seed, session_counter_);
    st.population = initial_population(codec, params, st.space, init_seed(st, 0));

    room->room.members.push_back(st.id);
    created.sessions.push_back(st.id);
    member_records.push_back(json{{"session", st.id},
                                  {"name", st.owner},
                                  {"space", space_to_json(st.space)},
                                  {"seed", st.seed}});
    sessions_[st.id] = std::move(s);
  }
  room->log->append("", event_kind::kRoomCreated,
                    json{{"members", member_records},
                         {"params", params_to_json(params)},
                         {"depth", depth},
                         {"mesh", mesh},
                         {"visibility_k", visibility_k}});
  room_order_.push_back(room->room.id);
  rooms_[room->room.id] = std::move(room);
  return created;
}

void Hub::assign_spaces(const std::string& room_id,
                        const std::map<std::string, SearchSpace>& split) {
  RoomSlot& rs = room_slot(room_id);
  for (const auto& [sid, space] : split) {
    if (!rs.room.has_member(sid)) {
      throw Error(ErrorCode::kNotMember, sid + " is not in room " + room_id);
    }
    space.validate();
  }
  std::vector<std::unique_lock<std::mutex>> locks;
  for (const auto& sid : rs.room.members) locks.emplace_back(slot(sid).mutex);
  for (const auto& [sid, space] : split) {
    if (slot(sid).state.population.generation != 0) {
      throw Error(ErrorCode::kNotPermitted,
                  "spaces can only be assigned before the first step");
    }
  }
  json record = json::object();
  for (const auto& [sid, space] : split) {
    Session& st = slot(sid).state;
    st.space = space;
    st.pending_picks.clear();
    st.population = initial_population(st.config, st.params, space,
                                       init_seed(st, rs.log->last_seq()));
    record[sid] = space_to_json(space);
  }
  rs.log->append("", event_kind::kSpacesAssigned, json{{"split", record}});
}

Session Hub::session(const std::string& id) const {
  SessionSlot& s = slot(id);
  std::lock_guard lock(s.mutex);
  return s.state;
}

Room Hub::room(const std::string& id) const { return room_slot(id).room; }

std::vector<std::string> Hub::room_ids() const {
  std::shared_lock lock(registry_mutex_);
  return room_order_;
}

void Hub::set_picks(const std::string& session, std::vector<std::size_t> picks) {
  SessionSlot& s = slot(session);
  RoomSlot& rs = room_slot(s.state.room);
  std::lock_guard lock(s.mutex);
  s.state.population = assign_fitness(s.state.population, picks, s.state.params);
  s.state.pending_picks = picks;
  rs.log->append(session, event_kind::kSelection, json{{"indices", picks}});
}

Population Hub::step(const std::string& session) {
  SessionSlot& s = slot(session);
  RoomSlot& rs = room_slot(s.state.room);
  std::lock_guard lock(s.mutex);
  Session& st = s.state;
  const json picks = st.pending_picks;
  st.population = evoform::step(st.population, st.pending_picks, st.params,
                                step_seed(st));
  st.pending_picks.clear();
  rs.log->append(session, event_kind::kGeneration,
                 json{{"generation", st.population.generation},
                      {"picks", picks},
                      {"ids", ids_of(st.population)}});
  return st.population;
}

PeerSample Hub::peer_sample(const std::string& viewer) const {
  const std::string room_id = session(viewer).room;
  const Room r = room(room_id);
  std::map<std::string, Population> pops;
  for (const auto& member : r.members) {
    if (member == viewer) continue;
    SessionSlot& s = slot(member);
    std::lock_guard lock(s.mutex);
    pops[member] = s.state.population;
  }
  return evoform::peer_sample(r, viewer, pops);
}

InjectOutcome Hub::inject(const std::string& host,
                          const std::string& donor_session,
                          std::uint64_t individual_id) {
  const std::string host_room = session(host).room;
  const std::string donor_room = session(donor_session).room;
  if (host == donor_session || host_room != donor_room) {
    throw Error(ErrorCode::kNotPermitted,
                donor_session + " does not share a room with " + host);
  }
  const PeerSample visible = peer_sample(host);
  const auto& candidates = visible.at(donor_session);
  auto it = std::find_if(candidates.begin(), candidates.end(),
                         [&](const Individual& i) { return i.id == individual_id; });
  if (it == candidates.end()) {
    throw Error(ErrorCode::kStaleDonor,
                "individual " + std::to_string(individual_id) + " of " +
                    donor_session + " is no longer visible; re-fetch peers");
  }
  InjectOutcome outcome;
  apply_injection(host, donor_session, *it, &outcome);
  return outcome;
}

void Hub::apply_injection(const std::string& host,
                          const std::string& donor_session,
                          const Individual& donor, InjectOutcome* outcome) {
  SessionSlot& s = slot(host);
  RoomSlot& rs = room_slot(s.state.room);
  std::lock_guard lock(s.mutex);
  const Session before = s.state;
  s.state = evoform::inject(before, donor, donor_session);

  const auto& now = s.state.population.individuals;
  std::uint64_t replaced = 0;
  std::uint64_t new_id = 0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    if (now[i].id != before.population.individuals[i].id) {
      replaced = before.population.individuals[i].id;
      new_id = now[i].id;
    }
  }
  // One event per injection; its kind says whether the space grew.
  const bool expanded = !(s.state.space == before.space);
  rs.log->append(host, expanded ? event_kind::kSpaceExpanded : event_kind::kInjection,
                 json{{"donor_session", donor_session},
                      {"donor_individual", donor.id},
                      {"genome", genome_to_hex(donor.genome)},
                      {"replaced_id", replaced},
                      {"new_id", new_id},
                      {"previous", space_to_json(before.space)},
                      {"space", space_to_json(s.state.space)}});
  if (outcome) {
    outcome->replaced_id = replaced;
    outcome->new_id = new_id;
    outcome->space = s.state.space;
    outcome->expanded = expanded;
  }
}

std::vector<Event> Hub::events(const std::string& room,
                               std::uint64_t since) const {
  return room_slot(room).log->since(since);
}

std::vector<Event> Hub::wait_events(const std::string& room, std::uint64_t since,
                                    std::chrono::milliseconds timeout) const {
  return room_slot(room).log->wait_since(since, timeout);
}

std::vector<Event> Hub::history(const std::string& session_id) const {
  const std::string room_id = session(session_id).room;
  std::vector<Event> out;
  for (auto& e : events(room_id)) {
    if (e.session == session_id) out.push_back(std::move(e));
  }
  return out;
}

std::vector<Event> Hub::all_events() const {
  std::vector<Event> out;
  for (const auto& r : room_ids()) {
    auto evs = events(r);
    out.insert(out.end(), evs.begin(), evs.end());
  }
  return out;
}

void Hub::close_streams() {
  std::shared_lock lock(registry_mutex_);
  for (auto& [id, r] : rooms_) r->log->close();
}

std::unique_ptr<Hub> Hub::replay(const std::vector<Event>& events,
                                 HubConfig config) {
  auto hub = std::make_unique<Hub>(std::move(config));
  // Room logs are independent; order events by room creation then sequence.
  std::vector<Event> ordered = events;
  std::map<std::string, std::size_t> room_rank;
  for (const auto& e : ordered) {
    if (e.kind == event_kind::kRoomCreated) {
      room_rank.emplace(e.room, room_rank.size());
    }
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const Event& a, const Event& b) {
                     return a.seq != b.seq ? a.seq < b.seq
                                           : room_rank[a.room] < room_rank[b.room];
                   });

  try {
    for (const auto& e : ordered) {
      const json& p = e.payload;
      if (e.kind == event_kind::kRoomCreated) {
        std::vector<MemberSpec> members;
        std::vector<std::uint64_t> seeds;
        for (const auto& m : p.at("members")) {
          members.push_back({m.at("name").get<std::string>(),
                             space_from_json(m.at("space"))});
          seeds.push_back(m.at("seed").get<std::uint64_t>());
        }
        const RoomCreated made = hub->create_room_with(
            members, params_from_json(p.at("params")), p.at("depth").get<int>(),
            p.at("mesh").get<std::string>(), p.at("visibility_k").get<int>(),
            &seeds);
        if (made.room != e.room) {
          throw Error(ErrorCode::kParse, "replay diverged: room " + e.room +
                                             " recreated as " + made.room);
        }
      } else if (e.kind == event_kind::kSpacesAssigned) {
        std::map<std::string, SearchSpace> split;
        for (const auto& [sid, sp] : p.at("split").items()) {
          split[sid] = space_from_json(sp);
        }
        hub->assign_spaces(e.room, split);
      } else if (e.kind == event_kind::kSelection) {
        hub->set_picks(e.session, p.at("indices").get<std::vector<std::size_t>>());
      } else if (e.kind == event_kind::kGeneration) {
        hub->step(e.session);
      } else if (e.kind == event_kind::kInjection ||
                 e.kind == event_kind::kSpaceExpanded) {
        const CodecConfig codec = hub->session(e.session).config;
        Individual donor;
        donor.id = p.at("donor_individual").get<std::uint64_t>();
        donor.genome = genome_from_hex(p.at("genome").get<std::string>(), codec);
        hub->apply_injection(e.session, p.at("donor_session").get<std::string>(),
                             donor, nullptr);
      }
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("replay: ") + ex.what());
  }
  return hub;
}

}  // namespace evoform
