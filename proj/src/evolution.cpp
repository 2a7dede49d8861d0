#include "evoform/evolution.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "evoform/error.hpp"
#include "evoform/rng.hpp"

namespace evoform {

namespace {

void check_picks(std::span<const std::size_t> picks, std::size_t n) {
  if (picks.size() > n) {
    throw Error(ErrorCode::kInvalidPick, "more picks than individuals");
  }
  std::set<std::size_t> seen;
  for (auto p : picks) {
    if (p >= n) {
      throw Error(ErrorCode::kInvalidPick,
                  "pick index " + std::to_string(p) + " out of range");
    }
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::kInvalidPick,
                  "duplicate pick index " + std::to_string(p));
    }
  }
}

std::size_t roulette(std::span<const double> weights, double total, Rng& rng) {
  const double r = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

void GAParams::validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (population_size < 1) fail("population_size must be >= 1");
  if (crossover_rate < 0.0 || crossover_rate > 1.0) {
    fail("crossover_rate must be in [0, 1]");
  }
  if (mutation_rate > 1.0) fail("mutation_rate must be <= 1");
  if (!(scaling_c > 1.0)) fail("scaling_c must be > 1");
  if (!(floor_fitness > 0.0)) fail("floor_fitness must be > 0");
  if (!(pick_fitness > floor_fitness)) {
    fail("pick_fitness must exceed floor_fitness");
  }
  if (bias_generations < 0) fail("bias_generations must be >= 0");
}

SearchSpace Population::mask_union() const {
  SearchSpace u;
  for (const auto& ind : individuals) {
    u.channels |= effective_channels(ind.genome);
    u.variables |= effective_variables(ind.genome);
  }
  return u;
}

std::size_t Population::index_of(std::uint64_t id) const {
  for (std::size_t i = 0; i < individuals.size(); ++i) {
    if (individuals[i].id == id) return i;
  }
  throw Error(ErrorCode::kNotFound, "no individual " + std::to_string(id));
}

Population initial_population(const CodecConfig& config, const GAParams& params,
                              const SearchSpace& space, std::uint64_t seed) {
  params.validate();
  space.validate();
  Population pop;
  for (int i = 0; i < params.population_size; ++i) {
    Individual ind;
    ind.id = pop.next_id++;
    ind.genome = random_genome(config, mix_seed(seed, static_cast<std::uint64_t>(i)),
                               space);
    ind.fitness = params.floor_fitness;
    pop.individuals.push_back(std::move(ind));
  }
  return pop;
}

Population assign_fitness(const Population& pop,
                          std::span<const std::size_t> picks,
                          const GAParams& params) {
  check_picks(picks, pop.size());
  Population out = pop;
  for (auto& ind : out.individuals) ind.fitness = params.floor_fitness;
  for (auto p : picks) out.individuals[p].fitness = params.pick_fitness;

  double max_fitness = 0.0;
  for (const auto& ind : out.individuals) {
    max_fitness = std::max(max_fitness, ind.fitness);
  }
  for (auto& ind : out.individuals) {
    if (ind.provenance.injected && ind.provenance.bias_remaining > 0) {
      ind.fitness = std::max(ind.fitness, max_fitness);
    }
  }
  return out;
}

std::vector<double> scale_fitness(std::span<const double> raw, double c) {
  std::vector<double> out(raw.begin(), raw.end());
  if (raw.empty()) return out;
  const auto [min_it, max_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (lo == hi) return out;

  const double mean =
      std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(raw.size());
  double a = (c - 1.0) * mean / (hi - mean);
  double b = mean * (1.0 - a);
  if (a * lo + b < 0.0) {
    a = mean / (mean - lo);
    b = -a * lo;
  }
  for (auto& f : out) f = std::max(0.0, a * f + b);
  return out;
}

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b,
                                    std::size_t point) {
  if (!(a.config == b.config)) {
    throw Error(ErrorCode::kInvalidArgument, "parents use different layouts");
  }
  const std::size_t body = a.config.body_bits();
  if (point == 0 || point >= body) {
    throw Error(ErrorCode::kInvalidArgument,
                "crossover point must be in (0, " + std::to_string(body) + ")");
  }
  BitString ba = encode(a);
  BitString bb = encode(b);
  for (std::size_t i = CodecConfig::kHeaderBits + point; i < ba.size(); ++i) {
    const bool t = ba[i];
    ba.set(i, bb[i]);
    bb.set(i, t);
  }
  Genome ca = decode(ba, a.config);
  Genome cb = decode(bb, a.config);
  const ChannelMask channels = a.channel_mask | b.channel_mask;
  const VariableMask variables = a.variable_mask | b.variable_mask;
  ca.channel_mask = cb.channel_mask = channels;
  ca.variable_mask = cb.variable_mask = variables;
  return {std::move(ca), std::move(cb)};
}

Genome mutate(const Genome& g, double rate, std::uint64_t seed) {
  Rng rng(seed);
  BitString bits = encode(g);
  for (std::size_t i = CodecConfig::kHeaderBits; i < bits.size(); ++i) {
    if (rng.uniform() < rate) bits.flip(i);
  }
  return decode(bits, g.config);
}

Population step(const Population& pop, std::span<const std::size_t> picks,
                const GAParams& params, std::uint64_t seed) {
  params.validate();
  if (pop.individuals.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "population is empty");
  }
  const Population rated = assign_fitness(pop, picks, params);
  const std::size_t n = rated.size();
  const CodecConfig& config = rated.config();
  Rng rng(seed);

  Population next;
  next.generation = rated.generation + 1;
  next.next_id = rated.next_id;

  std::vector<std::size_t> carried(picks.begin(), picks.end());
  std::sort(carried.begin(), carried.end());
  for (std::size_t i = 0; i < n && carried.size() < n; ++i) {
    const auto& prov = rated.individuals[i].provenance;
    if (prov.injected && prov.bias_remaining > 0 &&
        std::find(carried.begin(), carried.end(), i) == carried.end()) {
      carried.push_back(i);
    }
  }
  for (auto i : carried) {
    Individual copy = rated.individuals[i];
    if (copy.provenance.bias_remaining > 0) --copy.provenance.bias_remaining;
    next.individuals.push_back(std::move(copy));
  }

  std::vector<double> raw;
  raw.reserve(n);
  for (const auto& ind : rated.individuals) raw.push_back(ind.fitness);
  const std::vector<double> weights = scale_fitness(raw, params.scaling_c);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  const double mutation_rate = params.resolved_mutation_rate(config);
  const std::size_t body = config.body_bits();
  while (next.individuals.size() < n) {
    const Genome& pa = rated.individuals[roulette(weights, total, rng)].genome;
    const Genome& pb = rated.individuals[roulette(weights, total, rng)].genome;
    std::pair<Genome, Genome> children;
    if (body > 1 && rng.uniform() < params.crossover_rate) {
      children = crossover(pa, pb, 1 + rng.below(body - 1));
    } else {
      children = {pa, pb};
      const ChannelMask channels = pa.channel_mask | pb.channel_mask;
      const VariableMask variables = pa.variable_mask | pb.variable_mask;
      for (Genome* c : {&children.first, &children.second}) {
        c->channel_mask = channels;
        c->variable_mask = variables;
      }
    }
    for (Genome* child : {&children.first, &children.second}) {
      if (next.individuals.size() >= n) break;
      Individual ind;
      ind.id = next.next_id++;
      ind.genome = mutate(*child, mutation_rate, rng.next());
      ind.fitness = params.floor_fitness;
      next.individuals.push_back(std::move(ind));
    }
  }
  return next;
}

}  // namespace evoform
