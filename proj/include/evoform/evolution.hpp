#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evoform/codec.hpp"

namespace evoform {

struct GAParams {
  int population_size = 9;
  double crossover_rate = 0.9;
  // Negative means 1 / total_bits of the genome layout.
  double mutation_rate = -1.0;
  double scaling_c = 2.0;
  double pick_fitness = 1.0;
  double floor_fitness = 0.1;
  int bias_generations = 2;

  double resolved_mutation_rate(const CodecConfig& config) const {
    return mutation_rate < 0.0
               ? 1.0 / static_cast<double>(config.total_bits())
               : mutation_rate;
  }

  // Throws kInvalidArgument when a field is out of range.
  void validate() const;

  friend bool operator==(const GAParams&, const GAParams&) = default;
};

struct Provenance {
  bool injected = false;
  std::string origin_session;  // injected only
  int bias_remaining = 0;      // generations of fitness pinning left

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Individual {
  std::uint64_t id = 0;
  Genome genome;
  double fitness = 0.0;
  Provenance provenance;

  friend bool operator==(const Individual&, const Individual&) = default;
};

struct Population {
  std::vector<Individual> individuals;
  std::uint64_t generation = 0;
  std::uint64_t next_id = 0;  // ids are never reused within a session

  std::size_t size() const { return individuals.size(); }
  const CodecConfig& config() const { return individuals.front().genome.config; }
  // Union of the (normalized) headers of every member.
  SearchSpace mask_union() const;
  // Index of the individual with this id; throws kNotFound.
  std::size_t index_of(std::uint64_t id) const;

  friend bool operator==(const Population&, const Population&) = default;
};

Population initial_population(const CodecConfig& config, const GAParams& params,
                              const SearchSpace& space, std::uint64_t seed);

// Picked individuals get pick_fitness, the rest floor_fitness; injected
// individuals still under bias are raised to the population maximum.
Population assign_fitness(const Population& pop,
                          std::span<const std::size_t> picks,
                          const GAParams& params);

// Linear scaling f' = a*f + b that keeps the mean and maps the maximum to
// c*mean, falling back to min -> 0 when that would go negative.
std::vector<double> scale_fitness(std::span<const double> raw, double c);

// One-point crossover over the body (bits after the header). Both children
// receive the OR of the parent headers.
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b,
                                    std::size_t point);

// Per-bit mutation of the body; the header is left alone.
Genome mutate(const Genome& g, double rate, std::uint64_t seed);

// Advances one generation. Picks and injected individuals under bias are
// carried over unchanged; the other slots are bred by roulette selection on
// scaled fitness.
Population step(const Population& pop, std::span<const std::size_t> picks,
                const GAParams& params, std::uint64_t seed);

}  // namespace evoform
