#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evoform/codec.hpp"
#include "evoform/evolution.hpp"
#include "evoform/expression.hpp"
#include "evoform/mesh.hpp"

namespace evoform {

// Stands in for a human evaluator: prefers individuals whose displacement of
// a fixed vertex/time sample is closest to a target program.
class SimulatedEvaluator {
 public:
  static constexpr int kSampleVertices = 64;
  static constexpr int kSampleTimes = 8;

  SimulatedEvaluator(ExpressionTree target, ChannelMask target_channels,
                     const Mesh& mesh, std::uint64_t seed,
                     int picks_per_generation = 3);

  // RMS over the sample of the distance between candidate-displaced and
  // target-displaced vertices.
  double error(const ExpressionTree& tree, ChannelMask channels) const;
  double error(const Individual& candidate, const SearchSpace& space) const;

  // Indices of the picks_per_generation lowest-error individuals, ties by
  // lower index, in ascending index order.
  std::vector<std::size_t> picks(const Population& pop,
                                 const SearchSpace& space) const;

  const std::vector<Vertex>& sample_vertices() const { return vertices_; }
  const std::vector<TimeParam>& sample_times() const { return times_; }
  int picks_per_generation() const { return picks_per_generation_; }

 private:
  ExpressionTree target_;
  ChannelMask target_channels_;
  std::vector<Vertex> vertices_;
  std::vector<TimeParam> times_;
  std::vector<Vertex> expected_;  // vertex-major, time-minor
  int picks_per_generation_;
};

double deformation_error(const Individual& candidate,
                         const SimulatedEvaluator& evaluator,
                         const SearchSpace& space);

struct AgentSpec {
  std::string name;
  SearchSpace space;
};

struct Scenario {
  enum class Mode { kIndividual, kCollaborative };

  Mode mode = Mode::kCollaborative;
  std::vector<AgentSpec> agents;
  int generations = 60;
  int inject_every = 5;
  std::vector<std::uint64_t> seeds{1};
  GAParams params;
  int depth = 3;
  int visibility_k = 3;
  int picks_per_generation = 3;
  ExpressionTree target;
  ChannelMask target_channels{1};
  Mesh mesh;

  // Throws kInvalidArgument for inconsistent settings.
  void validate() const;
};

// Parses a scenario file. Top-level keys configure the run; every [section]
// is one agent with `channels` and `variables`. Relative paths resolve
// against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

// "1-20" or "3,5,8".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct MetricRow {
  std::uint64_t seed = 0;
  std::string agent;
  int generation = 0;
  double best_error = 0.0;
};

struct ScenarioRun {
  std::vector<MetricRow> rows;
  // Final population of every agent, per seed, in seed-major order.
  std::vector<Population> final_populations;
  std::vector<SearchSpace> final_spaces;
  // Spaces per seed, agent and generation, for monotonicity checks.
  std::vector<std::vector<std::vector<SearchSpace>>> space_history;
  // Whether any tree built during the run referenced each variable, per
  // seed and agent.
  std::vector<std::vector<VariableMask>> referenced_vars;
};

ScenarioRun run_scenario(const Scenario& scenario);

// Header `seed,agent,generation,best_error`.
std::string metrics_to_csv(const std::vector<MetricRow>& rows);

// Final-generation best errors of `agent`, one per seed.
std::vector<double> final_errors(const std::vector<MetricRow>& rows,
                                 const std::string& agent);
double median(std::vector<double> values);

}  // namespace evoform
