// evoform: decode, evaluate and apply vertex programs; run simulated
// scenarios; serve collaborative sessions over HTTP.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "evoform/codec.hpp"
#include "evoform/collaboration.hpp"
#include "evoform/config.hpp"
#include "evoform/error.hpp"
#include "evoform/expression.hpp"
#include "evoform/harness.hpp"
#include "evoform/mesh.hpp"
#include "evoform/service.hpp"
#include "evoform/tree_json.hpp"

namespace {

using namespace evoform;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write " + path);
  out << text;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Vertex parse_vertex(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> c;
  while (std::getline(ss, part, ',')) c.push_back(parse_double("vertex", part));
  if (c.size() != 3) {
    throw Error(ErrorCode::kParse, "vertex must be x,y,z");
  }
  return {c[0], c[1], c[2]};
}

// A program given either as a genome (hex) or as a JSON tree file.
struct Program {
  ExpressionTree tree;
  ChannelMask channels;
};

Program load_program(const std::string& hex, const std::string& tree_path,
                     const std::string& channels, int depth) {
  if (!tree_path.empty()) {
    return {tree_from_json_text(read_file(tree_path)),
            ChannelMask::parse(channels.empty() ? "xyz" : channels)};
  }
  if (hex.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give a genome hex or --tree");
  }
  const Genome g = genome_from_hex(hex, CodecConfig(depth));
  Program p{build_tree(g, g.header()), effective_channels(g)};
  if (!channels.empty()) p.channels = ChannelMask::parse(channels);
  return p;
}

int cmd_decode(const std::string& hex, int depth) {
  const Genome g = genome_from_hex(hex, CodecConfig(depth));
  const ExpressionTree tree = build_tree(g, g.header());
  std::cout << "depth: " << depth << '\n'
            << "channels: " << effective_channels(g).to_string() << '\n'
            << "variables: " << effective_variables(g).to_string() << '\n'
            << "tree: " << tree_to_json(tree).dump() << '\n'
            << emit_source(tree, effective_channels(g)) << '\n';
  return 0;
}

int cmd_eval(const Program& p, const std::string& vertex, double time) {
  const Vertex v = parse_vertex(vertex);
  const TimeParam t(time);
  const double e = evaluate(p.tree, v, t);
  const Vertex d = displace(p.tree, p.channels, v, t);
  std::cout << "value: " << number(e) << '\n'
            << "displaced: " << number(d.x) << ',' << number(d.y) << ','
            << number(d.z) << '\n';
  return 0;
}

int cmd_displace(const std::string& obj, const Program& p, double time,
                 const std::string& out) {
  const Mesh mesh = load_obj_file(obj);
  const std::string text = export_obj(displace_mesh(mesh, p.tree, p.channels, TimeParam(time)));
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out) {
  const Scenario sc = load_scenario(scenario_path);
  const ScenarioRun run = run_scenario(sc);
  const std::string csv = metrics_to_csv(run.rows);
  if (out.empty() || out == "-") {
    std::cout << csv;
  } else {
    write_file(out, csv);
  }
  for (const auto& agent : sc.agents) {
    std::cerr << agent.name << ": median final best_error "
              << number(median(final_errors(run.rows, agent.name))) << '\n';
  }
  return 0;
}

int cmd_mesh(const std::string& name, const std::string& out) {
  const std::string text = export_obj(builtin_mesh(name));
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

int cmd_serve(const std::string& config_path, const std::string& replay_path) {
  ServiceConfig cfg = load_service_config(
      config_path.empty() ? std::nullopt : std::optional<std::string>(config_path));
  Server server(cfg);
  if (!replay_path.empty()) server.load_events(events_from_jsonl(read_file(replay_path)));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = server.start();
  std::cerr << "evoform listening on " << cfg.host << ':' << port << std::endl;
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evoform - collaborative evolution of vertex displacement programs"};
  app.require_subcommand(1);

  std::string hex, tree_path, channels, vertex = "0,0,0", obj, out, scenario,
                                        config_path, replay_path;
  int depth = 3;
  double time = 0.0;

  auto* decode = app.add_subcommand("decode", "Print the tree and shader snippet of a genome");
  decode->add_option("hex", hex, "Genome as hex")->required();
  decode->add_option("--depth", depth, "Tree depth")->check(CLI::Range(1, CodecConfig::kMaxDepth));

  auto* eval = app.add_subcommand("eval", "Evaluate a program at one vertex");
  eval->add_option("hex", hex, "Genome as hex");
  eval->add_option("--tree", tree_path, "JSON tree file instead of a genome");
  eval->add_option("--channels", channels, "Channel override, e.g. xyz");
  eval->add_option("--vertex", vertex, "x,y,z")->required();
  eval->add_option("--time", time, "Time in radians");
  eval->add_option("--depth", depth, "Tree depth")->check(CLI::Range(1, CodecConfig::kMaxDepth));

  auto* disp = app.add_subcommand("displace", "Displace every vertex of an OBJ mesh");
  disp->add_option("obj", obj, "Input OBJ")->required();
  disp->add_option("hex", hex, "Genome as hex");
  disp->add_option("--tree", tree_path, "JSON tree file instead of a genome");
  disp->add_option("--channels", channels, "Channel override, e.g. xyz");
  disp->add_option("--time", time, "Time in radians");
  disp->add_option("--out", out, "Output OBJ (default stdout)");
  disp->add_option("--depth", depth, "Tree depth")->check(CLI::Range(1, CodecConfig::kMaxDepth));

  auto* sim = app.add_subcommand("simulate", "Run a simulated-evaluator scenario");
  sim->add_option("scenario", scenario, "Scenario file")->required();
  sim->add_option("--out", out, "Metrics CSV (default stdout)");

  std::string mesh_name;
  auto* mesh = app.add_subcommand("mesh", "Export a bundled procedural mesh as OBJ");
  mesh->add_option("name", mesh_name, "sphere, cube or cylinder")->required();
  mesh->add_option("--out", out, "Output OBJ (default stdout)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_path, "key=value config file");
  serve->add_option("--replay", replay_path, "Event log (JSONL) to rebuild state from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*decode) return cmd_decode(hex, depth);
    if (*eval) return cmd_eval(load_program(hex, tree_path, channels, depth), vertex, time);
    if (*disp) {
      return cmd_displace(obj, load_program(hex, tree_path, channels, depth), time, out);
    }
    if (*sim) return cmd_simulate(scenario, out);
    if (*mesh) return cmd_mesh(mesh_name, out);
    if (*serve) return cmd_serve(config_path, replay_path);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument && hex.empty() && tree_path.empty() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
