#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dhforge/artifactio.hpp"
#include "dhforge/assemble.hpp"
#include "dhforge/demand.hpp"
#include "dhforge/hydro.hpp"
#include "dhforge/ingest.hpp"
#include "dhforge/rasterex.hpp"
#include "dhforge/simplify.hpp"

namespace dhforge {

namespace fs = std::filesystem;

struct InputPaths {
  std::optional<fs::path> network_kml;
  std::optional<fs::path> network_geojson;
  std::optional<fs::path> raster;
  std::optional<fs::path> control_points;
  std::optional<fs::path> graph_json;
  std::optional<fs::path> buildings;
  std::optional<fs::path> blocks;
  std::optional<fs::path> plants;
  std::optional<fs::path> census;
  std::optional<fs::path> weather;
  std::optional<fs::path> catalog;
};

struct RunConfig {
  InputPaths inputs;
  fs::path output_dir = "out";
  std::optional<std::uint64_t> seed;

  double snap_tolerance = 1.0;  // m
  ExtractionOptions raster;
  AssemblyConfig assembly;
  YearClassTable year_classes = default_year_classes();
  int calendar_year = 2023;
  SpecificDemandTable specific_demand = default_specific_demand();
  SlpTable slp = default_slp_params();
  SizingConfig sizing;
  FluidProps fluid;
  bool cluster_enabled = false;
  ClusterConfig cluster;
  bool cluster_before_sizing = false;
  SvgStyle svg;

  /// Number of configured network sources (kml, geojson, raster, graph json).
  int network_source_count() const;
  /// Canonical JSON of every setting that shapes the model (paths and the
  /// output directory excluded).
  std::string canonical_json() const;
  std::string hash() const;
};

/// Parses the YAML config; relative input paths resolve against the
/// config file's directory. Throws InputError.
RunConfig load_config(const fs::path& path);
RunConfig parse_config(std::string_view yaml_text, const fs::path& base_dir);

}  // namespace dhforge
