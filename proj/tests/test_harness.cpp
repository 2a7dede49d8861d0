#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evoform/error.hpp"
#include "evoform/harness.hpp"
#include "evoform/tree_json.hpp"
#include "expr_oracle.hpp"

using namespace evoform;

namespace {

const std::string kRoot = EVOFORM_SOURCE_DIR;

Scenario small_scenario(Scenario::Mode mode) {
  Scenario sc = load_scenario(kRoot + "/fixtures/scenarios/xy_split.scenario");
  sc.mode = mode;
  sc.generations = 12;
  sc.seeds = {3, 4};
  if (mode == Scenario::Mode::kIndividual) sc.agents.resize(1);
  return sc;
}

}  // namespace

TEST_CASE("a candidate equal to the target has zero error") {
  const Genome g = random_genome(CodecConfig(3), 12, {ChannelMask::parse("xy"), VariableMask::parse("xyt")});
  const SimulatedEvaluator ev(build_tree(g, g.header()), effective_channels(g), builtin_mesh("sphere"), 1);
  const Individual ind{0, g, 0.1, {}};
  CHECK(deformation_error(ind, ev, g.header()) == 0.0);
  CHECK(ev.sample_vertices().size() == 64);
  CHECK(ev.sample_times().size() == 8);
}

TEST_CASE("error of the zero program against the wave tree matches the re-parse oracle") {
  const ExpressionTree wave = tree_from_json_text(
      R"({"binary":"+","left":{"binary":"-","left":{"const":2.2},"right":{"binary":"/","left":{"var":"x"},"right":{"const":11}}},"right":{"binary":"*","left":{"const":7},"right":{"var":"y","unary":"cos"}}})");
  const SimulatedEvaluator ev(wave, ChannelMask::parse("xyz"), builtin_mesh("sphere"), 77);

  const auto target = oracle::Snippet::parse(
      "p.xyz = p.xyz + (((2.2 - (p.x / 11)) + (7 * cos(p.y))));");
  double sum = 0.0;
  int n = 0;
  for (const auto& v : ev.sample_vertices()) {
    for (int k = 0; k < 8; ++k) {
      const double t = 2 * M_PI * k / 8;
      // The zero program leaves vertices in place, so each distance is the
      // length of the target displacement: |e| on each of three channels.
      const double e = target.value(v.x, v.y, v.z, t);
      sum += 3 * e * e;
      ++n;
    }
  }
  const double expected = std::sqrt(sum / n);
  const double got = ev.error(ExpressionTree::constant(0.0), ChannelMask::parse("xyz"));
  CHECK(std::fabs(got - expected) < 1e-9);
}

TEST_CASE("the sample is fixed by the seed") {
  const Mesh m = builtin_mesh("sphere");
  const ExpressionTree t = ExpressionTree::variable(Axis::kX);
  const SimulatedEvaluator a(t, ChannelMask::parse("x"), m, 5), b(t, ChannelMask::parse("x"), m, 5),
      c(t, ChannelMask::parse("x"), m, 6);
  CHECK(a.sample_vertices() == b.sample_vertices());
  CHECK_FALSE(a.sample_vertices() == c.sample_vertices());
  const Mesh cube = builtin_mesh("cube");
  CHECK(SimulatedEvaluator(t, ChannelMask::parse("x"), cube, 5).sample_vertices().size() == 8);
}

TEST_CASE("picks are the lowest-error individuals") {
  const Scenario sc = small_scenario(Scenario::Mode::kIndividual);
  const SimulatedEvaluator ev(sc.target, sc.target_channels, sc.mesh, 1, 3);
  const SearchSpace s = sc.agents[0].space;
  const Population pop = initial_population(CodecConfig(3), sc.params, s, 9);
  const auto picks = ev.picks(pop, s);
  REQUIRE(picks.size() == 3);
  double worst_picked = 0.0;
  for (auto p : picks) worst_picked = std::max(worst_picked, ev.error(pop.individuals[p], s));
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (std::find(picks.begin(), picks.end(), i) == picks.end()) {
      CHECK(ev.error(pop.individuals[i], s) >= worst_picked);
    }
  }
}

TEST_CASE("zero generations report only the initial population") {
  Scenario sc = small_scenario(Scenario::Mode::kCollaborative);
  sc.generations = 0;
  const ScenarioRun run = run_scenario(sc);
  CHECK(run.rows.size() == sc.seeds.size() * sc.agents.size());
  for (const auto& r : run.rows) CHECK(r.generation == 0);
}

TEST_CASE("reruns produce byte-identical CSV") {
  const Scenario sc = small_scenario(Scenario::Mode::kCollaborative);
  const ScenarioRun a = run_scenario(sc), b = run_scenario(sc);
  CHECK(metrics_to_csv(a.rows) == metrics_to_csv(b.rows));
  CHECK(a.final_populations == b.final_populations);
  const std::string csv = metrics_to_csv(a.rows);
  CHECK(csv.rfind("seed,agent,generation,best_error\n", 0) == 0);
  // G+1 rows per agent and seed, plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(1 + sc.seeds.size() * sc.agents.size() * (sc.generations + 1)));
}

TEST_CASE("individual mode stays inside the assigned space") {
  const Scenario sc = small_scenario(Scenario::Mode::kIndividual);
  const ScenarioRun run = run_scenario(sc);
  for (const auto& pop : run.final_populations) {
    for (const auto& ind : pop.individuals) CHECK_FALSE(ind.provenance.injected);
  }
  for (const auto& per_seed : run.referenced_vars) {
    CHECK(per_seed[0].subset_of(VariableMask::parse("xt")));
  }
  for (const auto& per_seed : run.space_history) {
    for (const auto& s : per_seed[0]) CHECK(s == sc.agents[0].space);
  }
}

TEST_CASE("collaborative mode widens the space after the first injection") {
  const Scenario sc = small_scenario(Scenario::Mode::kCollaborative);
  const ScenarioRun run = run_scenario(sc);
  for (const auto& per_seed : run.space_history) {
    const auto& a = per_seed[0];
    for (int g = 0; g < static_cast<int>(a.size()); ++g) {
      if (g < sc.inject_every) {
        CHECK(a[g] == sc.agents[0].space);
      } else {
        CHECK(a[g].variables.contains(Axis::kY));
        CHECK(a[g].channels.contains(Axis::kY));
      }
    }
  }
}

TEST_CASE("scenario parsing") {
  CHECK(parse_seed_list("1-3") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(parse_seed_list("3, 5,8") == std::vector<std::uint64_t>{3, 5, 8});
  CHECK_THROWS_AS(parse_seed_list("5-2"), Error);
  CHECK_THROWS_AS(parse_seed_list(""), Error);

  const Scenario sc = load_scenario(kRoot + "/fixtures/scenarios/xy_split.scenario");
  CHECK(sc.mode == Scenario::Mode::kCollaborative);
  CHECK(sc.generations == 60);
  CHECK(sc.inject_every == 5);
  CHECK(sc.seeds.size() == 20);
  REQUIRE(sc.agents.size() == 2);
  CHECK(sc.agents[0].name == "A");
  CHECK(sc.agents[1].space.variables == VariableMask::parse("yt"));
  CHECK(sc.target_channels == ChannelMask::parse("xy"));

  CHECK_THROWS_AS(parse_scenario("mode = collaborative\ntarget_genome = " + std::string(35, '0') +
                                     "\n[A]\nchannels = x\nvariables = x\n",
                                 ""),
                  Error);
  CHECK_THROWS_AS(parse_scenario("mode = sideways\n", ""), Error);
  CHECK_THROWS_AS(parse_scenario("mode = individual\npopulation = 9\ntarget_genome = " +
                                     std::string(35, '0') + "\n[A]\nchannels = x\nvariables = x\n",
                                 ""),
                  Error);
  CHECK_THROWS_AS(parse_scenario("mode = individual\ntarget_genome = " + std::string(35, '0') +
                                     "\n[A]\nchannels = x\nvariables = x\ncolour = red\n",
                                 ""),
                  Error);
  CHECK_NOTHROW(parse_scenario("mode = individual\ntarget_genome = " + std::string(35, '0') +
                                   "\n[A]\nchannels = x\nvariables = x\n",
                               ""));
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}
