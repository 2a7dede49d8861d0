#include "evoform/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "evoform/error.hpp"

namespace evoform {

namespace {

const std::map<std::string, std::string> kEmptySection;

const char* const kServiceKeys[] = {
    "host",          "port",           "seed",           "depth",
    "visibility_k",  "default_mesh",   "event_log",      "population_size",
    "crossover_rate", "mutation_rate", "scaling_c",      "pick_fitness",
    "floor_fitness", "bias_generations"};

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  KeyValueFile out;
  out.data_[""];
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      out.data_[""][key] = node.data();
      continue;
    }
    if (std::find(out.order_.begin(), out.order_.end(), key) == out.order_.end()) {
      out.order_.push_back(key);
    }
    for (const auto& [sub, leaf] : node) out.data_[key][sub] = leaf.data();
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> KeyValueFile::sections() const { return order_; }

bool KeyValueFile::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::optional<std::string> KeyValueFile::get(const std::string& section,
                                             const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string KeyValueFile::get_or(const std::string& section,
                                 const std::string& key,
                                 const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

const std::map<std::string, std::string>& KeyValueFile::section(
    const std::string& name) const {
  auto s = data_.find(name);
  return s == data_.end() ? kEmptySection : s->second;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, key + ": expected a number, got '" + value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::kParse,
                key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

GAParams apply_params(const std::map<std::string, std::string>& kv,
                      GAParams p) {
  for (const auto& [key, value] : kv) {
    if (key == "population_size") {
      p.population_size = static_cast<int>(parse_int(key, value));
    } else if (key == "crossover_rate") {
      p.crossover_rate = parse_double(key, value);
    } else if (key == "mutation_rate") {
      p.mutation_rate = parse_double(key, value);
    } else if (key == "scaling_c") {
      p.scaling_c = parse_double(key, value);
    } else if (key == "pick_fitness") {
      p.pick_fitness = parse_double(key, value);
    } else if (key == "floor_fitness") {
      p.floor_fitness = parse_double(key, value);
    } else if (key == "bias_generations") {
      p.bias_generations = static_cast<int>(parse_int(key, value));
    }
  }
  p.validate();
  return p;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

ServiceConfig load_service_config(const std::optional<std::string>& path,
                                  const EnvLookup& env) {
  std::map<std::string, std::string> kv;
  if (path) kv = KeyValueFile::load(*path).section("");
  for (const char* key : kServiceKeys) {
    std::string name = "EVOFORM_";
    for (const char* c = key; *c; ++c) {
      name += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    }
    if (auto v = env(name)) kv[key] = *v;
  }

  ServiceConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "host") {
      cfg.host = value;
    } else if (key == "port") {
      cfg.port = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      cfg.hub.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "depth") {
      cfg.hub.depth = static_cast<int>(parse_int(key, value));
    } else if (key == "visibility_k") {
      cfg.hub.visibility_k = static_cast<int>(parse_int(key, value));
    } else if (key == "default_mesh") {
      cfg.hub.default_mesh = value;
    } else if (key == "event_log") {
      cfg.event_log = value;
    }
  }
  cfg.hub.params = apply_params(kv, cfg.hub.params);
  CodecConfig check(cfg.hub.depth);
  (void)check;
  if (cfg.port < 0 || cfg.port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "port must be in 0..65535");
  }
  if (cfg.hub.visibility_k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "visibility_k must be >= 1");
  }
  return cfg;
}

}  // namespace evoform
