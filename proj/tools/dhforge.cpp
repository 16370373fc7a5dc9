// dhforge: district heating network model generator.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "dhforge/errors.hpp"
#include "dhforge/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dhforge;

namespace {

struct Flags {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<fs::path> graph;
  bool snapshots = false;
  bool no_cluster = false;
  bool cluster_before_sizing = false;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("dhforge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DHFORGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour a real "off".
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

RunConfig config_from(const Flags& f, bool required) {
  RunConfig cfg;
  if (f.config) {
    cfg = load_config(*f.config);
  } else if (required) {
    throw InputError("--config is required");
  }
  if (f.seed) cfg.seed = f.seed;
  if (f.out) cfg.output_dir = *f.out;
  if (f.cluster_before_sizing) cfg.cluster_before_sizing = true;
  return cfg;
}

// Picks the newest model of a previous stage in the output directory.
fs::path input_graph(const Flags& f, const RunConfig& cfg, std::initializer_list<const char*> candidates) {
  if (f.graph) return *f.graph;
  for (const char* name : candidates) {
    const fs::path p = cfg.output_dir / name;
    if (fs::exists(p)) return p;
  }
  throw InputError("no input graph: pass --graph or run the previous stage into " + cfg.output_dir.string());
}

fs::path out_dir_for_graph(const Flags& f, const RunConfig& cfg, const fs::path& graph) {
  if (f.out || f.config) return cfg.output_dir;
  return graph.has_parent_path() ? graph.parent_path() : fs::path(".");
}

int cmd_extract(const Flags& f) {
  const RunConfig cfg = config_from(f, true);
  const auto lines = extract_from_config(cfg);
  if (lines.empty()) spdlog::warn("extraction found no network polylines");
  write_text(cfg.output_dir / "network_extracted.geojson", export_polylines_geojson(lines));
  std::cout << "extracted " << lines.size() << " polylines\n";
  return 0;
}

int cmd_build(const Flags& f) {
  const RunConfig cfg = config_from(f, true);
  const ModelDocument doc = build_model(cfg, f.snapshots ? snapshot_writer(cfg.output_dir) : SnapshotSink{});
  write_text(cfg.output_dir / "model.json", export_graph_json(doc));
  std::cout << "built model: " << doc.graph.node_count() << " nodes, " << doc.graph.edge_count() << " edges\n";
  return 0;
}

int cmd_size(const Flags& f) {
  const RunConfig cfg = config_from(f, true);
  ModelDocument doc = read_model(input_graph(f, cfg, {"model.json"}));
  const SizingSummary s = size_model(doc, cfg);
  write_text(cfg.output_dir / "model_sized.json", export_graph_json(doc));
  std::cout << "sized " << s.sized_edges << " edges, " << s.flagged.size() << " flagged\n";
  return 0;
}

int cmd_cluster(const Flags& f) {
  const RunConfig cfg = config_from(f, true);
  ModelDocument doc = read_model(input_graph(f, cfg, {"model_sized.json", "model.json"}));
  if (!cfg.seed) throw InputError("a seed is required (config 'seed' or --seed)");
  const AggregationSummary s =
      cluster_model(doc, cfg, f.snapshots ? snapshot_writer(cfg.output_dir) : SnapshotSink{});
  write_text(cfg.output_dir / "model_clustered.json", export_graph_json(doc));
  std::cout << "clustered into " << s.consumers << " consumer nodes\n";
  return 0;
}

int cmd_render(const Flags& f) {
  const RunConfig cfg = config_from(f, false);
  const fs::path graph = input_graph(f, cfg, {"model_clustered.json", "model_sized.json", "model.json"});
  const ModelDocument doc = read_model(graph);
  write_text(out_dir_for_graph(f, cfg, graph) / "model.svg", render_svg(doc.graph, cfg.svg));
  return 0;
}

int cmd_report(const Flags& f) {
  const RunConfig cfg = config_from(f, false);
  const fs::path graph = input_graph(f, cfg, {"model_clustered.json", "model_sized.json", "model.json"});
  const ModelDocument doc = read_model(graph);
  const std::string text = summarize(doc);
  write_text(out_dir_for_graph(f, cfg, graph) / "report.txt", text);
  std::cout << text;
  return 0;
}

int cmd_pipeline(const Flags& f) {
  const RunConfig cfg = config_from(f, true);
  const PipelineResult r = run_pipeline(cfg, PipelineOptions{f.snapshots, f.no_cluster});
  for (const auto& p : r.written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Generate district heating network models from geodata"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "YAML run configuration");
    sub->add_option("--seed", flags.seed, "Random seed (overrides the config)");
    sub->add_option("--out", flags.out, "Output directory (overrides the config)");
    sub->add_flag("--snapshots", flags.snapshots, "Write one model per workflow step");
    sub->add_flag("--no-cluster", flags.no_cluster, "Skip clustering");
    sub->add_flag("--cluster-before-sizing", flags.cluster_before_sizing, "Cluster before sizing pipes");
    sub->add_option("--graph", flags.graph, "Input graph JSON");
  };

  using Handler = int (*)(const Flags&);
  const std::pair<const char*, std::pair<const char*, Handler>> commands[] = {
      {"extract", {"Vectorize the network from a raster map", cmd_extract}},
      {"build", {"Assemble the network with buildings and plants", cmd_build}},
      {"size", {"Route nominal flows and select pipe diameters", cmd_size}},
      {"cluster", {"Aggregate buildings into consumer nodes", cmd_cluster}},
      {"render", {"Draw the model as SVG", cmd_render}},
      {"report", {"Summarize the model", cmd_report}},
      {"pipeline", {"Run every stage and write all artifacts", cmd_pipeline}},
  };
  Handler chosen = nullptr;
  for (const auto& [name, info] : commands) {
    CLI::App* sub = app.add_subcommand(name, info.first);
    add_common(sub);
    sub->callback([&chosen, h = info.second] { chosen = h; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return chosen(flags);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
