#include "dhforge/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>

#include "dhforge/errors.hpp"

namespace dhforge {

namespace {

// Times a stage and prefixes any error with the stage name.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  const auto start = std::chrono::steady_clock::now();
  struct Done {
    const char* name;
    std::chrono::steady_clock::time_point start;
    ~Done() {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      spdlog::info("stage {} took {:.1f} ms", name, ms);
    }
  } done{name, start};
  try {
    return fn();
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string("[") + name + "] " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string("[") + name + "] " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("[") + name + "] " + e.what());
  }
}

std::string digest_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

const fs::path& require(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw InputError(std::string("config: inputs.") + what + " is required");
  return *p;
}

std::vector<GeoPolyline> extract_with(const RunConfig& cfg, Projection& proj) {
  const fs::path& raster_path = require(cfg.inputs.raster, "raster");
  const fs::path& cp_path = require(cfg.inputs.control_points, "control_points");
  const auto cps = load_control_points(read_text_file(cp_path));
  if (cps.empty()) throw InputError("control points: no rows");
  std::vector<GeoPoint> geo;
  for (const auto& cp : cps) geo.push_back(cp.geo);
  proj = Projection::centered_on(geo);
  const RasterMap raster = read_png(raster_path);
  try {
    return extract_network(raster, cps, cfg.raster, proj);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("raster extraction: ") + e.what());
  }
}

Projection projection_for(const std::vector<GeoPolyline>& lines) {
  std::vector<GeoPoint> all;
  for (const auto& l : lines) all.insert(all.end(), l.begin(), l.end());
  if (all.empty()) throw InputError("network source contains no line geometry");
  return Projection::centered_on(all);
}

void add_isolated_buildings(NetworkGraph& g, const std::vector<BuildingRecord>& buildings) {
  for (const auto& b : buildings) {
    Node n{building_node_id(b.id), NodeKind::Building, polygon_centroid_area(b.footprint).centroid, {}};
    n.attrs.usage_type = std::string(to_string(b.usage));
    n.attrs.floor_area = b.floor_area;
    n.attrs.annual_demand = b.annual_demand;
    n.attrs.block_id = b.block_id;
    n.attrs.construction_year = b.construction_year;
    g.add_node(std::move(n));
  }
}

}  // namespace

std::vector<GeoPolyline> extract_from_config(const RunConfig& cfg) {
  Projection proj;
  return extract_with(cfg, proj);
}

ProfileBank make_profile_bank(const RunConfig& cfg) {
  const fs::path& weather_path = require(cfg.inputs.weather, "weather");
  return ProfileBank(load_weather(read_text_file(weather_path)), cfg.slp, cfg.calendar_year);
}

ModelDocument build_model(const RunConfig& cfg, const SnapshotSink& snapshot) {
  if (!cfg.seed) throw InputError("a seed is required (config 'seed' or --seed)");
  if (cfg.network_source_count() != 1)
    throw InputError("config: exactly one network source (network_kml, network_geojson, raster, graph_json) is required");
  const fs::path& buildings_path = require(cfg.inputs.buildings, "buildings");

  ModelDocument doc;
  doc.provenance.seed = *cfg.seed;
  doc.provenance.config_hash = cfg.hash();
  AssemblyConfig acfg = cfg.assembly;
  acfg.seed = *cfg.seed;

  stage("network", [&] {
    if (cfg.inputs.graph_json) {
      ModelDocument base = read_model(*cfg.inputs.graph_json);
      doc.projection = base.projection;
      doc.graph = std::move(base.graph);
      doc.provenance.input_digests["graph_json"] = digest_file(*cfg.inputs.graph_json);
    } else {
      std::vector<GeoPolyline> lines;
      if (cfg.inputs.network_kml) {
        lines = parse_kml(read_text_file(*cfg.inputs.network_kml));
        doc.provenance.input_digests["network_kml"] = digest_file(*cfg.inputs.network_kml);
        doc.projection = projection_for(lines);
      } else if (cfg.inputs.network_geojson) {
        lines = parse_geojson_lines(read_text_file(*cfg.inputs.network_geojson));
        doc.provenance.input_digests["network_geojson"] = digest_file(*cfg.inputs.network_geojson);
        doc.projection = projection_for(lines);
      } else {
        lines = extract_with(cfg, doc.projection);
        doc.provenance.input_digests["raster"] = digest_file(*cfg.inputs.raster);
        doc.provenance.input_digests["control_points"] = digest_file(*cfg.inputs.control_points);
        if (lines.empty()) throw InputError("raster extraction found no network pixels");
      }
      doc.graph = polylines_to_graph(project_all(lines, doc.projection), cfg.snap_tolerance);
    }
    if (doc.graph.edge_count() == 0) throw InputError("network source yields no pipes");
    const auto parts = connected_components(doc.graph);
    if (parts.size() > 1)
      doc.events.warnings.push_back("network has " + std::to_string(parts.size()) + " disconnected components");
  });

  std::vector<BuildingRecord> connected;
  stage("buildings", [&] {
    auto buildings = load_buildings(read_text_file(buildings_path), doc.projection);
    doc.provenance.input_digests["buildings"] = digest_file(buildings_path);
    auto kept = filter_by_buffer(doc.graph, buildings, acfg.buffer_threshold);
    spdlog::info("buffer filter kept {} of {} buildings", kept.size(), buildings.size());
    if (snapshot) {
      ModelDocument snap = doc;
      add_isolated_buildings(snap.graph, kept);
      snap.events.stages.push_back("buffer");
      snapshot("01_buffer", snap);
    }
    std::vector<BlockRecord> blocks;
    if (cfg.inputs.blocks) {
      blocks = load_blocks(read_text_file(*cfg.inputs.blocks), doc.projection);
      doc.provenance.input_digests["blocks"] = digest_file(*cfg.inputs.blocks);
    }
    connected = sample_connections(kept, blocks, acfg);
    spdlog::info("connection sampling selected {} of {} buildings", connected.size(), kept.size());
    for (auto& b : connected) b.annual_demand = complete_annual_demand(b, cfg.specific_demand);
    std::vector<CensusCell> cells;
    if (cfg.inputs.census) {
      cells = load_census(read_text_file(*cfg.inputs.census), cfg.year_classes);
      doc.provenance.input_digests["census"] = digest_file(*cfg.inputs.census);
    }
    connected = assign_construction_years(std::move(connected), cells, acfg.neighbor_k);
    std::sort(connected.begin(), connected.end(), [](auto& a, auto& b) { return a.id < b.id; });
    for (const auto& b : connected) attach_building(doc.graph, b, acfg);
  });

  stage("plants", [&] {
    std::vector<PlantRecord> plants;
    if (cfg.inputs.plants) {
      plants = load_plants(read_text_file(*cfg.inputs.plants));
      doc.provenance.input_digests["plants"] = digest_file(*cfg.inputs.plants);
    }
    PlantAttachment pa = attach_plants(doc.graph, plants, doc.projection, acfg);
    doc.events.skipped_plants = pa.skipped;
    for (auto& w : pa.warnings) {
      spdlog::warn("{}", w);
      doc.events.warnings.push_back(std::move(w));
    }
    for (const auto& s : pa.skipped) spdlog::warn("plant {} skipped ({:.1f} m from the network)", s.id, s.distance);
  });

  stage("demand", [&] {
    const ProfileBank bank = make_profile_bank(cfg);
    doc.provenance.input_digests["weather"] = digest_file(*cfg.inputs.weather);
    for (const auto& [id, node] : doc.graph.nodes()) {
      if (node.kind != NodeKind::Building) continue;
      NodeAttrs& a = doc.graph.node_attrs(id);
      a.nominal_load = bank.peak(a.demand_mix);
    }
  });
  doc.events.stages.push_back("build");
  if (snapshot) snapshot("02_attach", doc);

  stage("simplify", [&] {
    const std::size_t removed = contract_degree2(doc.graph);
    spdlog::info("degree-2 contraction removed {} junctions", removed);
  });
  doc.events.stages.push_back("simplify");
  if (snapshot) snapshot("03_simplify", doc);
  return doc;
}

static SizingSummary size_model_impl(ModelDocument& doc, const RunConfig& cfg) {
  SizingConfig scfg = cfg.sizing;
  if (cfg.inputs.catalog) {
    scfg.catalog = load_catalog(read_text_file(*cfg.inputs.catalog));
    doc.provenance.input_digests["catalog"] = digest_file(*cfg.inputs.catalog);
  }
  SizingSummary summary = size_network(doc.graph, scfg, cfg.fluid);
  doc.events.stages.push_back("size");
  if (!summary.flagged.empty()) {
    const std::string w = std::to_string(summary.flagged.size()) + " edge(s) exceed the largest catalog diameter";
    spdlog::warn("{}", w);
    doc.events.warnings.push_back(w);
  }
  std::size_t plants = 0;
  for (const auto& [id, n] : doc.graph.nodes()) plants += n.kind == NodeKind::Plant;
  if (plants > 1 && connected_components(doc.graph).size() < plants)
    doc.events.warnings.push_back("flows routed to the nearest plant along shortest paths (meshed network approximation)");
  return summary;
}

SizingSummary size_model(ModelDocument& doc, const RunConfig& cfg) {
  return stage("size", [&] { return size_model_impl(doc, cfg); });
}

static AggregationSummary cluster_model_impl(ModelDocument& doc, const RunConfig& cfg, const SnapshotSink& snapshot) {
  ClusterConfig ccfg = cfg.cluster;
  ccfg.seed = cfg.seed.value_or(doc.provenance.seed);
  std::size_t buildings = 0;
  for (const auto& [id, n] : doc.graph.nodes()) buildings += n.kind == NodeKind::Building;
  if (ccfg.k > buildings)
    throw InputError("cluster count " + std::to_string(ccfg.k) + " exceeds the " + std::to_string(buildings) +
                     " building nodes");
  const ProfileBank bank = make_profile_bank(cfg);
  const ClusterAssignment assignment = cluster_buildings(doc.graph, ccfg);
  const bool sized = std::any_of(doc.graph.edges().begin(), doc.graph.edges().end(),
                                 [](const auto& kv) { return kv.second.attrs.inner_diameter.has_value(); });
  AggregationSummary summary = aggregate_clusters(doc.graph, assignment, bank, cfg.assembly.min_service_length);
  if (sized) {
    // Consumers joined after sizing: size their service pipes individually.
    SizingConfig scfg = cfg.sizing;
    if (cfg.inputs.catalog) scfg.catalog = load_catalog(read_text_file(*cfg.inputs.catalog));
    for (const auto& [id, node] : doc.graph.nodes()) {
      if (node.kind != NodeKind::Consumer) continue;
      const double flow = nominal_mass_flow(node.attrs.nominal_load.value_or(0.0), scfg, cfg.fluid);
      const DiameterChoice choice = select_diameter(flow, scfg, cfg.fluid);
      for (EdgeId e : doc.graph.incident(id)) {
        EdgeAttrs& a = doc.graph.edge_attrs(e);
        a.dn = choice.entry.dn;
        a.inner_diameter = choice.entry.inner_diameter;
        a.nominal_flow = flow;
        a.flagged = choice.flagged;
      }
    }
  }
  contract_degree2(doc.graph);
  doc.events.stages.push_back("cluster");
  spdlog::info("aggregated {} buildings into {} consumer nodes", summary.removed_buildings, summary.consumers);
  if (snapshot) snapshot("04_cluster", doc);
  return summary;
}

AggregationSummary cluster_model(ModelDocument& doc, const RunConfig& cfg, const SnapshotSink& snapshot) {
  return stage("cluster", [&] { return cluster_model_impl(doc, cfg, snapshot); });
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

ModelDocument read_model(const fs::path& path) { return import_graph_json(read_text_file(path)); }

SnapshotSink snapshot_writer(const fs::path& dir) {
  return [dir](std::string_view step, const ModelDocument& doc) {
    write_text(dir / "snapshots" / (std::string(step) + ".json"), export_graph_json(doc));
  };
}

PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& options) {
  PipelineResult result;
  const SnapshotSink sink = options.snapshots ? snapshot_writer(cfg.output_dir) : SnapshotSink{};
  result.doc = build_model(cfg, sink);
  const bool cluster = cfg.cluster_enabled && !options.no_cluster;
  if (cluster && cfg.cluster_before_sizing) cluster_model(result.doc, cfg, sink);
  size_model(result.doc, cfg);
  if (cluster && !cfg.cluster_before_sizing) cluster_model(result.doc, cfg, sink);

  stage("export", [&] {
  const fs::path& out = cfg.output_dir;
  const std::pair<const char*, std::string> files[] = {
      {"model.json", export_graph_json(result.doc)},
      {"model.geojson", export_geojson(result.doc)},
      {"model.svg", render_svg(result.doc.graph, cfg.svg)},
      {"report.txt", summarize(result.doc)},
  };
  for (const auto& [name, text] : files) {
    write_text(out / name, text);
    result.written.push_back(out / name);
  }
  });
  return result;
}

}  // namespace dhforge
