#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evoform/collaboration.hpp"

namespace evoform {

// key=value text with optional [section] headers. Keys outside any section
// live in section "".
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  // Named sections in file order.
  std::vector<std::string> sections() const;
  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  const std::map<std::string, std::string>& section(const std::string& name) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, std::string>> data_;
};

double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);

// Applies GA parameter keys (population_size, crossover_rate, ...) found in
// `kv` over `params`. Unknown keys are left for the caller.
GAParams apply_params(const std::map<std::string, std::string>& kv,
                      GAParams params);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  HubConfig hub;
  std::string event_log;  // JSONL written on shutdown when non-empty
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
EnvLookup process_env();

// File values first, then EVOFORM_<KEY> environment overrides.
ServiceConfig load_service_config(const std::optional<std::string>& path,
                                  const EnvLookup& env = process_env());

}  // namespace evoform
