#include "evoform/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "evoform/collaboration.hpp"
#include "evoform/config.hpp"
#include "evoform/error.hpp"
#include "evoform/format.hpp"
#include "evoform/rng.hpp"
#include "evoform/tree_json.hpp"

namespace evoform {

namespace {

constexpr std::uint64_t kSampleSalt = 0x5a3b1e;

double squared_distance(const Vertex& a, const Vertex& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// SimulatedEvaluator

SimulatedEvaluator::SimulatedEvaluator(ExpressionTree target,
                                       ChannelMask target_channels,
                                       const Mesh& mesh, std::uint64_t seed,
                                       int picks_per_generation)
    : target_(std::move(target)),
      target_channels_(target_channels),
      picks_per_generation_(picks_per_generation) {
  if (target_channels_.empty()) {
    throw Error(ErrorCode::kInvalidMask, "target channel mask is empty");
  }
  if (mesh.vertices.empty()) {
    throw Error(ErrorCode::kMalformedMesh, "evaluation mesh has no vertices");
  }
  // Partial Fisher-Yates over vertex indices.
  std::vector<std::size_t> idx(mesh.vertices.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take =
      std::min<std::size_t>(kSampleVertices, mesh.vertices.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < take; ++i) vertices_.push_back(mesh.vertices[idx[i]]);
  for (int k = 0; k < kSampleTimes; ++k) {
    times_.emplace_back(TimeParam::kPeriod * k / kSampleTimes);
  }
  for (const auto& v : vertices_) {
    for (const auto t : times_) {
      expected_.push_back(displace(target_, target_channels_, v, t));
    }
  }
}

double SimulatedEvaluator::error(const ExpressionTree& tree,
                                 ChannelMask channels) const {
  double sum = 0.0;
  std::size_t k = 0;
  for (const auto& v : vertices_) {
    for (const auto t : times_) {
      sum += squared_distance(displace(tree, channels, v, t), expected_[k++]);
    }
  }
  return std::sqrt(sum / static_cast<double>(expected_.size()));
}

double SimulatedEvaluator::error(const Individual& candidate,
                                 const SearchSpace& space) const {
  return error(build_tree(candidate.genome, space),
               effective_channels(candidate.genome));
}

std::vector<std::size_t> SimulatedEvaluator::picks(const Population& pop,
                                                   const SearchSpace& space) const {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    scored.emplace_back(error(pop.individuals[i], space), i);
  }
  std::sort(scored.begin(), scored.end());
  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(0, picks_per_generation_)),
                            scored.size());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

double deformation_error(const Individual& candidate,
                         const SimulatedEvaluator& evaluator,
                         const SearchSpace& space) {
  return evaluator.error(candidate, space);
}

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate() const {
  const auto fail = [](const std::string& m) {
    throw Error(ErrorCode::kInvalidArgument, "scenario: " + m);
  };
  if (agents.empty()) fail("needs at least one agent");
  if (mode == Mode::kCollaborative && agents.size() < 2) {
    fail("collaborative mode needs at least two agents");
  }
  if (generations < 0) fail("generations must be >= 0");
  if (mode == Mode::kCollaborative && inject_every < 1) {
    fail("inject_every must be >= 1");
  }
  if (seeds.empty()) fail("needs at least one seed");
  if (visibility_k < 1) fail("visibility_k must be >= 1");
  if (picks_per_generation < 0 || picks_per_generation > params.population_size) {
    fail("picks_per_generation must be in [0, population_size]");
  }
  if (target_channels.empty()) fail("target_channels is empty");
  for (const auto& a : agents) a.space.validate();
  params.validate();
  CodecConfig check(depth);
  (void)check;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part.erase(std::remove_if(part.begin(), part.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               part.end());
    if (part.empty()) continue;
    const auto dash = part.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(static_cast<std::uint64_t>(parse_int("seeds", part)));
      continue;
    }
    const auto lo = parse_int("seeds", part.substr(0, dash));
    const auto hi = parse_int("seeds", part.substr(dash + 1));
    if (hi < lo) throw Error(ErrorCode::kParse, "seeds: empty range " + part);
    for (auto s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  if (out.empty()) throw Error(ErrorCode::kParse, "seeds: no seeds given");
  return out;
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  const KeyValueFile kv = KeyValueFile::parse(text);
  const auto& top = kv.section("");
  static const std::set<std::string> known = {
      "mode",          "generations",     "inject_every",   "seeds",
      "depth",         "visibility_k",    "picks_per_generation", "mesh",
      "target_tree",   "target_genome",   "target_channels", "population_size",
      "crossover_rate", "mutation_rate",  "scaling_c",      "pick_fitness",
      "floor_fitness", "bias_generations"};
  for (const auto& [key, value] : top) {
    if (!known.count(key)) throw Error(ErrorCode::kParse, "unknown scenario key '" + key + "'");
  }
  for (const auto& name : kv.sections()) {
    for (const auto& [key, value] : kv.section(name)) {
      if (key != "channels" && key != "variables") {
        throw Error(ErrorCode::kParse, "unknown key '" + key + "' in agent " + name);
      }
    }
  }
  Scenario sc;

  const std::string mode = kv.get_or("", "mode", "collaborative");
  if (mode == "individual") {
    sc.mode = Scenario::Mode::kIndividual;
  } else if (mode == "collaborative") {
    sc.mode = Scenario::Mode::kCollaborative;
  } else {
    throw Error(ErrorCode::kParse, "mode must be individual or collaborative");
  }
  if (auto v = kv.get("", "generations")) sc.generations = static_cast<int>(parse_int("generations", *v));
  if (auto v = kv.get("", "inject_every")) sc.inject_every = static_cast<int>(parse_int("inject_every", *v));
  if (auto v = kv.get("", "seeds")) sc.seeds = parse_seed_list(*v);
  if (auto v = kv.get("", "depth")) sc.depth = static_cast<int>(parse_int("depth", *v));
  if (auto v = kv.get("", "visibility_k")) sc.visibility_k = static_cast<int>(parse_int("visibility_k", *v));
  if (auto v = kv.get("", "picks_per_generation")) {
    sc.picks_per_generation = static_cast<int>(parse_int("picks_per_generation", *v));
  }
  sc.params = apply_params(top, sc.params);

  const std::string mesh = kv.get_or("", "mesh", "sphere");
  if (mesh == "sphere" || mesh == "cube" || mesh == "cylinder") {
    sc.mesh = builtin_mesh(mesh);
  } else {
    sc.mesh = load_obj_file(resolve(base_dir, mesh));
  }

  sc.target_channels = ChannelMask::parse(kv.get_or("", "target_channels", "xyz"));
  if (auto path = kv.get("", "target_tree")) {
    sc.target = tree_from_json_text(read_file(resolve(base_dir, *path)));
  } else if (auto hex = kv.get("", "target_genome")) {
    const CodecConfig codec(sc.depth);
    const Genome g = genome_from_hex(*hex, codec);
    sc.target = build_tree(g, g.header());
    if (!kv.has("", "target_channels")) sc.target_channels = effective_channels(g);
  } else {
    throw Error(ErrorCode::kParse, "scenario needs target_tree or target_genome");
  }

  for (const auto& name : kv.sections()) {
    const auto channels = kv.get(name, "channels");
    const auto variables = kv.get(name, "variables");
    if (!channels || !variables) {
      throw Error(ErrorCode::kInvalidSpace,
                  "agent " + name + " needs channels and variables");
    }
    sc.agents.push_back({name, {ChannelMask::parse(*channels),
                                VariableMask::parse(*variables)}});
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_file(path), dir);
}

// ---------------------------------------------------------------------------
// run_scenario

ScenarioRun run_scenario(const Scenario& sc) {
  sc.validate();
  const CodecConfig codec(sc.depth);
  ScenarioRun run;

  for (const std::uint64_t seed : sc.seeds) {
    const SimulatedEvaluator evaluator(sc.target, sc.target_channels, sc.mesh,
                                       mix_seed(seed, kSampleSalt),
                                       sc.picks_per_generation);
    std::vector<Session> agents;
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      Session s;
      s.id = sc.agents[i].name;
      s.owner = sc.agents[i].name;
      s.space = sc.agents[i].space;
      s.params = sc.params;
      s.config = codec;
      s.seed = mix_seed(seed, i + 1);
      s.population = initial_population(codec, sc.params, s.space, s.seed);
      agents.push_back(std::move(s));
    }
    std::vector<std::vector<SearchSpace>> spaces(agents.size());
    std::vector<VariableMask> referenced(agents.size());

    const auto record = [&](int generation) {
      for (std::size_t i = 0; i < agents.size(); ++i) {
        double best = INFINITY;
        for (const auto& ind : agents[i].population.individuals) {
          const ExpressionTree tree = build_tree(ind.genome, agents[i].space);
          referenced[i] |= tree.referenced_vars();
          best = std::min(best, evaluator.error(tree, effective_channels(ind.genome)));
        }
        run.rows.push_back({seed, agents[i].id, generation, best});
        spaces[i].push_back(agents[i].space);
      }
    };

    record(0);
    for (int g = 1; g <= sc.generations; ++g) {
      for (auto& a : agents) {
        const auto picks = evaluator.picks(a.population, a.space);
        a.population = step(a.population, picks, a.params,
                            mix_seed(a.seed, static_cast<std::uint64_t>(g)));
      }
      if (sc.mode == Scenario::Mode::kCollaborative && g % sc.inject_every == 0) {
        const std::vector<Session> snapshot = agents;
        for (std::size_t h = 0; h < agents.size(); ++h) {
          for (std::size_t p = 0; p < snapshot.size(); ++p) {
            if (p == h) continue;
            const auto visible =
                top_individuals(snapshot[p].population, sc.visibility_k);
            const Individual* donor = nullptr;
            double donor_error = INFINITY;
            for (const auto& cand : visible) {
              const double e = evaluator.error(cand, snapshot[p].space);
              if (e < donor_error) {
                donor_error = e;
                donor = &cand;
              }
            }
            if (donor) agents[h] = inject(agents[h], *donor, snapshot[p].id);
          }
        }
      }
      record(g);
    }

    for (std::size_t i = 0; i < agents.size(); ++i) {
      run.final_populations.push_back(agents[i].population);
      run.final_spaces.push_back(agents[i].space);
    }
    run.space_history.push_back(std::move(spaces));
    run.referenced_vars.push_back(std::move(referenced));
  }
  return run;
}

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = "seed,agent,generation,best_error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + ',' + r.agent + ',' +
           std::to_string(r.generation) + ',' + format_fixed(r.best_error, 9) +
           '\n';
  }
  return out;
}

std::vector<double> final_errors(const std::vector<MetricRow>& rows,
                                 const std::string& agent) {
  std::map<std::uint64_t, std::pair<int, double>> last;
  for (const auto& r : rows) {
    if (r.agent != agent) continue;
    auto it = last.find(r.seed);
    if (it == last.end() || r.generation >= it->second.first) {
      last[r.seed] = {r.generation, r.best_error};
    }
  }
  std::vector<double> out;
  for (const auto& [seed, v] : last) out.push_back(v.second);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return NAN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace evoform
