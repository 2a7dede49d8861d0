#include <doctest.h>

#include <thread>

#include "evoform/collaboration.hpp"
#include "evoform/error.hpp"

using namespace evoform;

namespace {

SearchSpace space(const char* ch, const char* vars) {
  return {ChannelMask::parse(ch), VariableMask::parse(vars)};
}

Session session_with(const std::vector<double>& fitness, const SearchSpace& s,
                     std::uint64_t seed = 1) {
  Session out;
  out.id = "host";
  out.space = s;
  GAParams p;
  p.population_size = static_cast<int>(fitness.size());
  out.params = p;
  out.population = initial_population(out.config, p, s, seed);
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    out.population.individuals[i].fitness = fitness[i];
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kParse;
}

std::vector<MemberSpec> xy_pair() {
  return {{"alice", space("x", "xt")}, {"bob", space("y", "yt")}};
}

}  // namespace

TEST_CASE("top-k by fitness, ties by lower id") {
  Session s = session_with({0.1, 0.9, 0.2, 0.5, 0.2}, space("x", "x"));
  const auto top = top_individuals(s.population, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].fitness == 0.9);
  CHECK(top[1].fitness == 0.5);
  CHECK(top[2].id == s.population.individuals[2].id);
  CHECK(top_individuals(s.population, 10).size() == 5);
}

TEST_CASE("peer sample of a lone viewer is empty") {
  Room r{"r1", {"s1"}, 3};
  std::map<std::string, Population> pops{{"s1", Population{}}};
  CHECK(peer_sample(r, "s1", pops).empty());
  CHECK(code_of([&] { peer_sample(r, "s9", pops); }) == ErrorCode::kNotMember);
}

TEST_CASE("inject replaces the worst and pins fitness to the maximum") {
  const Session host = session_with({0.9, 0.5, 0.2}, space("x", "xt"));
  Individual donor;
  donor.id = 77;
  donor.genome = random_genome(host.config, 500, space("y", "yt"));
  const Session after = inject(host, donor, "peer");

  REQUIRE(after.population.size() == 3);
  CHECK(after.population.individuals[0] == host.population.individuals[0]);
  CHECK(after.population.individuals[1] == host.population.individuals[1]);
  const Individual& added = after.population.individuals[2];
  CHECK(added.genome == donor.genome);
  CHECK(encode(added.genome) == encode(donor.genome));
  CHECK(added.fitness == 0.9);
  CHECK(added.provenance.injected);
  CHECK(added.provenance.origin_session == "peer");
  CHECK(added.provenance.bias_remaining == host.params.bias_generations);
  CHECK(after.space == space("xy", "xyt"));
  CHECK(host.space == space("x", "xt"));
}

TEST_CASE("ties for worst go to the higher id") {
  const Session host = session_with({0.1, 0.5, 0.1}, space("x", "x"));
  Individual donor;
  donor.genome = random_genome(host.config, 3, space("x", "x"));
  const Session after = inject(host, donor, "peer");
  CHECK(after.population.individuals[0] == host.population.individuals[0]);
  CHECK(after.population.individuals[2].provenance.injected);
}

TEST_CASE("two injections in one generation replace two slots") {
  const Session host = session_with({0.9, 0.5, 0.2, 0.3}, space("x", "x"));
  Individual d1, d2;
  d1.genome = random_genome(host.config, 10, space("z", "z"));
  d2.genome = random_genome(host.config, 11, space("y", "t"));
  const Session once = inject(host, d1, "p");
  const Session twice = inject(once, d2, "p");
  CHECK(twice.population.size() == 4);
  CHECK(twice.population.individuals[2].genome == d1.genome);
  CHECK(twice.population.individuals[3].genome == d2.genome);
  CHECK(twice.space == space("xyz", "xzt"));
}

TEST_CASE("hub rooms, picks and steps") {
  Hub hub(HubConfig{.seed = 5});
  const RoomCreated rc = hub.create_room(xy_pair());
  REQUIRE(rc.sessions.size() == 2);
  const Session a = hub.session(rc.sessions[0]);
  CHECK(a.space == space("x", "xt"));
  CHECK(a.population.size() == 9);
  for (const auto& ind : a.population.individuals) CHECK(ind.genome.header() == a.space);

  hub.set_picks(rc.sessions[0], {0, 2});
  const Population next = hub.step(rc.sessions[0]);
  CHECK(next.generation == 1);
  CHECK(next.individuals[0].genome == a.population.individuals[0].genome);

  // Empty picks are legal.
  CHECK(hub.step(rc.sessions[1]).generation == 1);

  CHECK(code_of([&] { hub.set_picks(rc.sessions[0], {9}); }) == ErrorCode::kInvalidPick);
  CHECK(code_of([&] { hub.session("nope"); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { hub.create_room({{"solo", space("x", "x")}}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { hub.create_room({{"a", space("", "x")}, {"b", space("x", "x")}}); }) ==
        ErrorCode::kInvalidSpace);
}

TEST_CASE("peer sample reflects the peer's current generation") {
  Hub hub;
  const RoomCreated rc = hub.create_room(xy_pair());
  const auto& [a, b] = std::pair(rc.sessions[0], rc.sessions[1]);
  auto before = hub.peer_sample(a);
  REQUIRE(before.count(b) == 1);
  CHECK(before.at(b).size() == 3);
  CHECK(before.count(a) == 0);
  hub.set_picks(b, {4, 5});
  auto rated = hub.peer_sample(a).at(b);
  CHECK(rated[0].id == hub.session(b).population.individuals[4].id);
  hub.step(b);
  for (const auto& ind : hub.peer_sample(a).at(b)) {
    CHECK_NOTHROW(hub.session(b).population.index_of(ind.id));
  }
}

TEST_CASE("hub injection: semantics, staleness and permissions") {
  Hub hub;
  const RoomCreated r1 = hub.create_room(xy_pair());
  const RoomCreated r2 = hub.create_room(xy_pair());
  const std::string host = r1.sessions[0], donor = r1.sessions[1];
  hub.set_picks(host, {0, 1, 2});
  const Session host_before = hub.session(host);
  const Session donor_before = hub.session(donor);
  const Individual pick = hub.peer_sample(host).at(donor).front();

  const InjectOutcome out = hub.inject(host, donor, pick.id);
  const Session host_after = hub.session(host);
  CHECK(host_after.population.size() == host_before.population.size());
  CHECK(out.expanded);
  CHECK(out.space == space("xy", "xyt"));
  CHECK(host_after.space == space("xy", "xyt"));
  const std::size_t at = host_after.population.index_of(out.new_id);
  CHECK(encode(host_after.population.individuals[at].genome) == encode(pick.genome));
  CHECK(host_after.population.individuals[at].fitness == 1.0);
  CHECK_THROWS(host_after.population.index_of(out.replaced_id));
  // The replaced individual was the worst unpicked one with the highest id.
  CHECK(out.replaced_id == host_before.population.individuals[8].id);
  CHECK(hub.session(donor).population == donor_before.population);
  CHECK(hub.session(donor).space == donor_before.space);

  // After the donor steps, the old id is no longer visible.
  hub.set_picks(donor, {});
  hub.step(donor);
  hub.step(donor);
  std::uint64_t gone = 0;
  for (const auto& ind : donor_before.population.individuals) {
    bool visible = false;
    for (const auto& v : hub.peer_sample(host).at(donor)) visible |= v.id == ind.id;
    if (!visible) gone = ind.id;
  }
  CHECK(code_of([&] { hub.inject(host, donor, gone); }) == ErrorCode::kStaleDonor);
  CHECK(code_of([&] { hub.inject(host, r2.sessions[1], 0); }) == ErrorCode::kNotPermitted);
  CHECK(code_of([&] { hub.inject(host, host, 0); }) == ErrorCode::kNotPermitted);
}

TEST_CASE("every mutation emits exactly one event with increasing seq") {
  Hub hub;
  const RoomCreated rc = hub.create_room(xy_pair());
  const auto a = rc.sessions[0], b = rc.sessions[1];
  hub.assign_spaces(rc.room, {{a, space("x", "xt")}, {b, space("y", "yt")}});
  hub.set_picks(a, {1});
  hub.step(a);
  hub.inject(a, b, hub.peer_sample(a).at(b)[0].id);
  hub.inject(a, b, hub.peer_sample(a).at(b)[1].id);
  const auto events = hub.events(rc.room);
  std::vector<std::string> kinds;
  for (const auto& e : events) kinds.push_back(e.kind);
  CHECK(kinds == std::vector<std::string>{"room-created", "spaces-assigned", "selection",
                                          "generation", "space-expanded", "injection"});
  for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
  CHECK(hub.events(rc.room, 4).size() == 2);
  CHECK(hub.history(a).size() == 4);

  const auto text = events_to_jsonl(events);
  const auto back = events_from_jsonl(text);
  REQUIRE(back.size() == events.size());
  CHECK(back[4].payload == events[4].payload);
  CHECK(events_to_jsonl(back) == text);
}

TEST_CASE("assign_spaces reseeds and is only allowed before stepping") {
  Hub hub;
  const RoomCreated rc = hub.create_room(xy_pair());
  hub.assign_spaces(rc.room, {{rc.sessions[0], space("z", "zt")}});
  for (const auto& ind : hub.session(rc.sessions[0]).population.individuals) {
    CHECK(ind.genome.header() == space("z", "zt"));
  }
  CHECK(code_of([&] { hub.assign_spaces(rc.room, {{"s99", space("x", "x")}}); }) ==
        ErrorCode::kNotMember);
  hub.step(rc.sessions[0]);
  CHECK(code_of([&] { hub.assign_spaces(rc.room, {{rc.sessions[0], space("x", "x")}}); }) ==
        ErrorCode::kNotPermitted);
}

TEST_CASE("replaying the log rebuilds identical sessions") {
  HubConfig cfg;
  cfg.seed = 31;
  Hub hub(cfg);
  const RoomCreated r1 = hub.create_room(xy_pair());
  const RoomCreated r2 = hub.create_room({{"c", space("z", "z")}, {"d", space("xz", "xzt")}, {"e", space("y", "y")}});
  for (int g = 0; g < 12; ++g) {
    hub.set_picks(r1.sessions[0], {static_cast<std::size_t>(g % 9)});
    hub.step(r1.sessions[0]);
    hub.step(r1.sessions[1]);
    hub.step(r2.sessions[g % 3]);
    if (g % 4 == 1) {
      const auto peer = hub.peer_sample(r1.sessions[0]).at(r1.sessions[1]);
      hub.inject(r1.sessions[0], r1.sessions[1], peer.back().id);
      const auto peer2 = hub.peer_sample(r2.sessions[2]).at(r2.sessions[1]);
      hub.inject(r2.sessions[2], r2.sessions[1], peer2.front().id);
    }
  }
  hub.set_picks(r1.sessions[1], {3, 4});

  const auto log = events_from_jsonl(events_to_jsonl(hub.all_events()));
  const auto rebuilt = Hub::replay(log, cfg);
  for (const auto& rc : {r1, r2}) {
    for (const auto& sid : rc.sessions) {
      const Session x = hub.session(sid), y = rebuilt->session(sid);
      CHECK(x.population == y.population);
      CHECK(x.space == y.space);
      CHECK(x.pending_picks == y.pending_picks);
    }
    CHECK(events_to_jsonl(hub.events(rc.room)) == events_to_jsonl(rebuilt->events(rc.room)));
  }
}

TEST_CASE("sessions in different rooms proceed concurrently") {
  Hub hub;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    for (const auto& s : hub.create_room(xy_pair()).sessions) ids.push_back(s);
  }
  std::vector<std::thread> threads;
  for (const auto& id : ids) {
    threads.emplace_back([&hub, id] {
      for (int g = 0; g < 20; ++g) {
        hub.set_picks(id, {0});
        hub.step(id);
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& id : ids) CHECK(hub.session(id).population.generation == 20);
}

TEST_CASE("event waiters wake on append and on close") {
  EventLog log("r1");
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    log.append("s1", "selection", nlohmann::json{{"indices", {1}}});
  });
  const auto got = log.wait_since(0, std::chrono::milliseconds(5000));
  writer.join();
  REQUIRE(got.size() == 1);
  CHECK(got[0].seq == 1);
  CHECK(log.wait_since(1, std::chrono::milliseconds(10)).empty());
  std::thread closer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    log.close();
  });
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(log.wait_since(1, std::chrono::milliseconds(10000)).empty());
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
  closer.join();
}
