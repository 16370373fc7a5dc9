#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dhforge/demand.hpp"
#include "dhforge/geo.hpp"
#include "dhforge/hydro.hpp"
#include "dhforge/netgraph.hpp"

namespace dhforge {

enum class UsageType { Residential, Office, Commercial, Industrial, Other };

std::string_view to_string(UsageType usage);
std::optional<UsageType> usage_from_string(std::string_view s);

struct BuildingRecord {
  std::string id;
  Polygon footprint;
  UsageType usage = UsageType::Residential;
  std::optional<double> floor_area;     // m²
  std::optional<double> annual_demand;  // kWh/a
  std::optional<std::string> block_id;
  std::optional<int> construction_year;
};

struct BlockRecord {
  std::string block_id;
  Polygon polygon;
  std::optional<double> connection_proportion;
};

struct CensusCell {
  long grid_x = 0;
  long grid_y = 0;
  int construction_year = 0;
};

struct PlantRecord {
  std::string id;
  GeoPoint pos;
  std::string name;
  std::optional<double> capacity;  // kW
  std::optional<std::string> plant_type;
};

/// Construction-year class label -> representative year.
using YearClassTable = std::map<std::string, int>;
YearClassTable default_year_classes();

std::string read_text_file(const std::filesystem::path& path);

/// Every LineString below any Placemark, MultiGeometry included, as lon/lat.
/// Errors name the placemark index.
std::vector<GeoPolyline> parse_kml(std::string_view text);

/// LineString and MultiLineString features of a GeoJSON FeatureCollection.
std::vector<GeoPolyline> parse_geojson_lines(std::string_view text);

/// Vertices become Junction nodes; a vertex within snap_tol of an existing
/// node merges into it. Duplicate segments are merged.
NetworkGraph polylines_to_graph(const std::vector<Polyline>& polylines, double snap_tol = 1.0);

std::vector<Polyline> project_all(const std::vector<GeoPolyline>& lines, const Projection& proj);

std::vector<BuildingRecord> load_buildings(std::string_view geojson, const Projection& proj);
std::vector<BlockRecord> load_blocks(std::string_view geojson, const Projection& proj);
std::vector<PlantRecord> load_plants(std::string_view geojson);
std::vector<CensusCell> load_census(std::string_view csv, const YearClassTable& classes = default_year_classes());
std::vector<PipeCatalogEntry> load_catalog(std::string_view csv);
WeatherSeries load_weather(std::string_view csv);

/// Inverse of load_buildings (Polygon features, WGS84).
std::string write_buildings_geojson(const std::vector<BuildingRecord>& buildings, const Projection& proj);

}  // namespace dhforge
