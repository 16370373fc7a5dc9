#include "dhforge/ingest.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dhforge/errors.hpp"

namespace dhforge {

using nlohmann::json;
namespace pt = boost::property_tree;

namespace {

std::string_view local_name(std::string_view tag) {
  auto pos = tag.find(':');
  return pos == std::string_view::npos ? tag : tag.substr(pos + 1);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> to_long(std::string_view s) {
  s = trim(s);
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

GeoPolyline parse_coordinates(std::string_view text, std::size_t placemark) {
  GeoPolyline line;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    std::vector<std::string_view> parts;
    std::string_view rest = token;
    for (;;) {
      auto comma = rest.find(',');
      parts.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (parts.size() < 2 || parts.size() > 3)
      throw InputError("kml placemark " + std::to_string(placemark) + ": bad coordinate tuple '" +
                       token + "'");
    std::optional<double> values[3];
    for (std::size_t i = 0; i < parts.size(); ++i) {
      values[i] = to_double(parts[i]);
      if (!values[i])
        throw InputError("kml placemark " + std::to_string(placemark) +
                         ": non-numeric coordinate '" + token + "'");
    }
    GeoPoint p{*values[0], *values[1]};
    if (!is_valid(p))
      throw InputError("kml placemark " + std::to_string(placemark) +
                       ": coordinate out of range '" + token + "'");
    line.push_back(p);
  }
  return line;
}

void collect_linestrings(const pt::ptree& tree, std::vector<const pt::ptree*>& out) {
  for (const auto& [tag, child] : tree) {
    if (local_name(tag) == "LineString")
      out.push_back(&child);
    else if (tag != "<xmlattr>")
      collect_linestrings(child, out);
  }
}

void collect_placemarks(const pt::ptree& tree, std::vector<const pt::ptree*>& out) {
  for (const auto& [tag, child] : tree) {
    if (local_name(tag) == "Placemark")
      out.push_back(&child);
    else if (tag != "<xmlattr>")
      collect_placemarks(child, out);
  }
}

std::string linestring_coordinates(const pt::ptree& ls) {
  for (const auto& [tag, child] : ls)
    if (local_name(tag) == "coordinates") return child.data();
  return {};
}

// Removes consecutive duplicates (KML sources repeat vertices).
GeoPolyline dedupe(GeoPolyline line) {
  line.erase(std::unique(line.begin(), line.end()), line.end());
  return line;
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

const json& features_of(const json& doc, std::string_view what) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw InputError(std::string(what) + ": expected a GeoJSON FeatureCollection");
  return doc["features"];
}

std::string locus(std::string_view what, std::size_t index) {
  return std::string(what) + " feature " + std::to_string(index);
}

GeoPoint geo_position(const json& pos, const std::string& where) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw InputError(where + ": bad position");
  GeoPoint p{pos[0].get<double>(), pos[1].get<double>()};
  if (!is_valid(p)) throw InputError(where + ": position outside WGS84 range");
  return p;
}

Polygon polygon_from_rings(const json& rings, const Projection& proj, const std::string& where) {
  if (!rings.is_array() || rings.empty()) throw InputError(where + ": polygon without rings");
  Polygon poly;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    if (!rings[r].is_array()) throw InputError(where + ": ring is not an array");
    std::vector<PlanePoint> ring;
    for (const auto& pos : rings[r]) ring.push_back(proj.project(geo_position(pos, where)));
    try {
      ring = normalize_ring(std::move(ring));
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
    if (r == 0)
      poly.exterior = std::move(ring);
    else
      poly.holes.push_back(std::move(ring));
  }
  return poly;
}

Polygon footprint_of(const json& geometry, const Projection& proj, const std::string& where,
                     bool allow_multi) {
  if (!geometry.is_object()) throw InputError(where + ": missing geometry");
  const std::string type = geometry.value("type", "");
  if (type == "Polygon") return polygon_from_rings(geometry["coordinates"], proj, where);
  if (type == "MultiPolygon" && allow_multi) {
    const json& parts = geometry["coordinates"];
    if (!parts.is_array() || parts.empty()) throw InputError(where + ": empty MultiPolygon");
    std::optional<Polygon> best;
    double best_area = -1.0;
    for (const auto& part : parts) {
      Polygon poly = polygon_from_rings(part, proj, where);
      double area = 0.0;
      try {
        area = polygon_centroid_area(poly).area;
      } catch (const std::invalid_argument&) {
      }
      if (area > best_area) {
        best_area = area;
        best = std::move(poly);
      }
    }
    return *best;
  }
  throw InputError(where + ": unsupported geometry type '" + type + "'");
}

const json& properties_of(const json& feature, const std::string& where) {
  if (!feature.is_object() || !feature.contains("properties") || !feature["properties"].is_object())
    throw InputError(where + ": missing properties");
  return feature["properties"];
}

std::string required_string(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key) || !props[key].is_string() || props[key].get<std::string>().empty())
    throw InputError(where + ": missing string property '" + key + "'");
  return props[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key) || props[key].is_null()) return std::nullopt;
  if (!props[key].is_string()) throw InputError(where + ": property '" + key + "' must be a string");
  return props[key].get<std::string>();
}

std::optional<double> optional_number(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key) || props[key].is_null()) return std::nullopt;
  if (!props[key].is_number()) throw InputError(where + ": property '" + key + "' must be a number");
  return props[key].get<double>();
}

std::optional<int> optional_year(const json& props, const char* key, const std::string& where) {
  if (!props.contains(key) || props[key].is_null()) return std::nullopt;
  if (!props[key].is_number_integer()) throw InputError(where + ": property '" + key + "' must be an integer");
  const auto year = props[key].get<long long>();
  if (year < 1500 || year > 2100) throw InputError(where + ": construction year out of range");
  return static_cast<int>(year);
}

struct CsvTable {
  std::vector<std::vector<std::string>> rows;  // data rows only
};

CsvTable parse_csv(std::string_view text, std::string_view expected_header, std::string_view what) {
  CsvTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  const auto columns = std::count(expected_header.begin(), expected_header.end(), ',') + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::string_view rest = line;
    for (;;) {
      auto comma = rest.find(',');
      cells.emplace_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!header_seen) {
      std::string joined;
      for (std::size_t i = 0; i < cells.size(); ++i) joined += (i ? "," : "") + cells[i];
      if (!joined.empty() && joined.compare(0, 3, "\xEF\xBB\xBF") == 0) joined.erase(0, 3);
      if (joined != expected_header)
        throw InputError(std::string(what) + ": expected header '" + std::string(expected_header) +
                         "', got '" + joined + "'");
      header_seen = true;
      continue;
    }
    if (static_cast<long>(cells.size()) != columns)
      throw InputError(std::string(what) + " line " + std::to_string(lineno) + ": expected " +
                       std::to_string(columns) + " columns");
    cells.push_back(std::to_string(lineno));
    table.rows.push_back(std::move(cells));
  }
  if (!header_seen) throw InputError(std::string(what) + ": empty file");
  return table;
}

std::string row_locus(std::string_view what, const std::vector<std::string>& row) {
  return std::string(what) + " line " + row.back();
}

}  // namespace

std::string_view to_string(UsageType usage) {
  switch (usage) {
    case UsageType::Residential: return "residential";
    case UsageType::Office: return "office";
    case UsageType::Commercial: return "commercial";
    case UsageType::Industrial: return "industrial";
    case UsageType::Other: return "other";
  }
  return "other";
}

std::optional<UsageType> usage_from_string(std::string_view s) {
  for (auto u : {UsageType::Residential, UsageType::Office, UsageType::Commercial,
                 UsageType::Industrial, UsageType::Other})
    if (to_string(u) == s) return u;
  return std::nullopt;
}

YearClassTable default_year_classes() {
  // German census construction-year classes; open-ended classes get a
  // representative year, closed ones their rounded midpoint.
  return {{"before 1919", 1900}, {"1919-1948", 1934}, {"1949-1978", 1964}, {"1979-1986", 1983},
          {"1987-1990", 1989},   {"1991-1995", 1993}, {"1996-2000", 1998}, {"2001-2004", 2003},
          {"2005-2008", 2007},   {"2009 and later", 2010}};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<GeoPolyline> parse_kml(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw InputError(std::string("kml: malformed XML: ") + e.what());
  }
  std::vector<const pt::ptree*> placemarks;
  collect_placemarks(tree, placemarks);
  std::vector<GeoPolyline> lines;
  for (std::size_t i = 0; i < placemarks.size(); ++i) {
    std::vector<const pt::ptree*> strings;
    collect_linestrings(*placemarks[i], strings);
    for (const pt::ptree* ls : strings) {
      GeoPolyline line = dedupe(parse_coordinates(linestring_coordinates(*ls), i));
      if (line.size() < 2)
        throw InputError("kml placemark " + std::to_string(i) + ": LineString with fewer than 2 points");
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

std::vector<GeoPolyline> parse_geojson_lines(std::string_view text) {
  const json doc = parse_json(text, "network geojson");
  const json& features = features_of(doc, "network geojson");
  std::vector<GeoPolyline> lines;
  auto read_line = [&](const json& coords, const std::string& where) {
    if (!coords.is_array()) throw InputError(where + ": bad LineString coordinates");
    GeoPolyline line;
    for (const auto& pos : coords) line.push_back(geo_position(pos, where));
    line = dedupe(std::move(line));
    if (line.size() < 2) throw InputError(where + ": LineString with fewer than 2 points");
    lines.push_back(std::move(line));
  };
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = locus("network geojson", i);
    const json& geom = features[i].value("geometry", json());
    const std::string type = geom.is_object() ? geom.value("type", "") : "";
    if (type == "LineString") {
      read_line(geom["coordinates"], where);
    } else if (type == "MultiLineString") {
      for (const auto& part : geom["coordinates"]) read_line(part, where);
    }
  }
  return lines;
}

std::vector<Polyline> project_all(const std::vector<GeoPolyline>& lines, const Projection& proj) {
  std::vector<Polyline> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    Polyline pl;
    for (const auto& p : line) pl.push_back(proj.project(p));
    out.push_back(std::move(pl));
  }
  return out;
}

NetworkGraph polylines_to_graph(const std::vector<Polyline>& polylines, double snap_tol) {
  if (snap_tol < 0.0) throw std::invalid_argument("snap tolerance must be non-negative");
  NetworkGraph g;
  const double cell = std::max(snap_tol, 1.0);
  std::unordered_map<long long, std::vector<std::string>> grid;
  auto cell_key = [](long long cx, long long cy) { return cx * 73856093LL ^ cy * 19349663LL; };
  auto cell_of = [&](double v) { return static_cast<long long>(std::floor(v / cell)); };

  auto node_for = [&](const PlanePoint& p) -> std::string {
    const long long cx = cell_of(p.x), cy = cell_of(p.y);
    const std::string* best = nullptr;
    double best_d = 0.0;
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (const auto& id : it->second) {
          const double d = distance(g.node(id).pos, p);
          if (d > snap_tol) continue;
          if (!best || d < best_d || (d == best_d && id < *best)) {
            best = &id;
            best_d = d;
          }
        }
      }
    if (best) return *best;
    std::string id = g.make_junction_id();
    g.add_node(Node{id, NodeKind::Junction, p, {}});
    grid[cell_key(cx, cy)].push_back(id);
    return id;
  };

  for (const auto& line : polylines) {
    std::string prev;
    for (const auto& p : line) {
      std::string cur = node_for(p);
      if (!prev.empty() && prev != cur && !g.edge_between(prev, cur)) {
        const double len = distance(g.node(prev).pos, g.node(cur).pos);
        if (len > 0.0) g.add_edge(prev, cur, len);
      }
      prev = std::move(cur);
    }
  }
  return g;
}

std::vector<BuildingRecord> load_buildings(std::string_view geojson, const Projection& proj) {
  const json doc = parse_json(geojson, "buildings");
  const json& features = features_of(doc, "buildings");
  std::vector<BuildingRecord> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = locus("buildings", i);
    const json& props = properties_of(features[i], where);
    BuildingRecord b;
    b.id = required_string(props, "id", where);
    if (!ids.insert(b.id).second) throw InputError(where + ": duplicate building id '" + b.id + "'");
    const std::string usage = required_string(props, "usage_type", where);
    auto u = usage_from_string(usage);
    if (!u) throw InputError(where + ": unknown usage_type '" + usage + "'");
    b.usage = *u;
    b.floor_area = optional_number(props, "floor_area_m2", where);
    if (b.floor_area && !(*b.floor_area > 0.0)) throw InputError(where + ": floor_area_m2 must be > 0");
    b.annual_demand = optional_number(props, "annual_demand_kwh", where);
    if (b.annual_demand && *b.annual_demand < 0.0)
      throw InputError(where + ": annual_demand_kwh must be >= 0");
    b.block_id = optional_string(props, "block_id", where);
    b.construction_year = optional_year(props, "construction_year", where);
    b.footprint = footprint_of(features[i].value("geometry", json()), proj, where, true);
    try {
      polygon_centroid_area(b.footprint);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<BlockRecord> load_blocks(std::string_view geojson, const Projection& proj) {
  const json doc = parse_json(geojson, "blocks");
  const json& features = features_of(doc, "blocks");
  std::vector<BlockRecord> out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = locus("blocks", i);
    const json& props = properties_of(features[i], where);
    BlockRecord b;
    b.block_id = required_string(props, "block_id", where);
    b.connection_proportion = optional_number(props, "connection_proportion", where);
    if (b.connection_proportion && (*b.connection_proportion < 0.0 || *b.connection_proportion > 1.0))
      throw InputError(where + ": connection_proportion must lie in [0, 1]");
    b.polygon = footprint_of(features[i].value("geometry", json()), proj, where, false);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<PlantRecord> load_plants(std::string_view geojson) {
  const json doc = parse_json(geojson, "plants");
  const json& features = features_of(doc, "plants");
  std::vector<PlantRecord> out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = locus("plants", i);
    const json& props = properties_of(features[i], where);
    PlantRecord p;
    p.id = required_string(props, "id", where);
    p.name = required_string(props, "name", where);
    p.capacity = optional_number(props, "capacity_kw", where);
    if (p.capacity && !(*p.capacity > 0.0)) throw InputError(where + ": capacity_kw must be > 0");
    p.plant_type = optional_string(props, "plant_type", where);
    const json& geom = features[i].value("geometry", json());
    if (!geom.is_object() || geom.value("type", "") != "Point")
      throw InputError(where + ": plant geometry must be a Point");
    p.pos = geo_position(geom["coordinates"], where);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CensusCell> load_census(std::string_view csv, const YearClassTable& classes) {
  const CsvTable table = parse_csv(csv, "grid_x,grid_y,construction_year", "census");
  std::vector<CensusCell> out;
  std::set<std::pair<long, long>> seen;
  for (const auto& row : table.rows) {
    const std::string where = row_locus("census", row);
    auto gx = to_long(row[0]);
    auto gy = to_long(row[1]);
    if (!gx || !gy) throw InputError(where + ": grid indices must be integers");
    std::optional<long> year = to_long(row[2]);
    if (!year) {
      auto it = classes.find(row[2]);
      if (it == classes.end()) throw InputError(where + ": unknown construction-year class '" + row[2] + "'");
      year = it->second;
    }
    if (*year < 1500 || *year > 2100) throw InputError(where + ": construction year out of range");
    if (!seen.insert({*gx, *gy}).second) throw InputError(where + ": duplicate grid cell");
    out.push_back({*gx, *gy, static_cast<int>(*year)});
  }
  return out;
}

std::vector<PipeCatalogEntry> load_catalog(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "dn,inner_diameter_m,roughness_mm", "catalog");
  std::vector<PipeCatalogEntry> out;
  for (const auto& row : table.rows) {
    const std::string where = row_locus("catalog", row);
    auto d = to_double(row[1]);
    auto r = to_double(row[2]);
    if (row[0].empty()) throw InputError(where + ": missing dn label");
    if (!d || !(*d > 0.0)) throw InputError(where + ": inner_diameter_m must be a positive number");
    if (!r || *r < 0.0) throw InputError(where + ": roughness_mm must be a non-negative number");
    if (!out.empty() && !(*d > out.back().inner_diameter))
      throw InputError(where + ": inner diameters must be strictly increasing");
    out.push_back({row[0], *d, *r});
  }
  if (out.empty()) throw InputError("catalog: no entries");
  return out;
}

WeatherSeries load_weather(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "hour,ambient_temp_c", "weather");
  if (table.rows.size() != kHoursPerYear)
    throw InputError("weather: expected " + std::to_string(kHoursPerYear) + " rows, got " +
                     std::to_string(table.rows.size()));
  std::vector<double> temps;
  temps.reserve(kHoursPerYear);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = row_locus("weather", row);
    auto hour = to_long(row[0]);
    if (!hour || *hour != static_cast<long>(i)) throw InputError(where + ": hour must be " + std::to_string(i));
    auto t = to_double(row[1]);
    if (!t || *t < -50.0 || *t > 60.0) throw InputError(where + ": temperature must lie in [-50, 60]");
    temps.push_back(*t);
  }
  return WeatherSeries(std::move(temps));
}

std::string write_buildings_geojson(const std::vector<BuildingRecord>& buildings, const Projection& proj) {
  json features = json::array();
  auto ring_json = [&](const std::vector<PlanePoint>& ring) {
    json r = json::array();
    for (const auto& p : ring) {
      GeoPoint g = proj.unproject(p);
      r.push_back({g.lon, g.lat});
    }
    GeoPoint first = proj.unproject(ring.front());
    r.push_back({first.lon, first.lat});
    return r;
  };
  for (const auto& b : buildings) {
    json rings = json::array();
    rings.push_back(ring_json(b.footprint.exterior));
    for (const auto& hole : b.footprint.holes) rings.push_back(ring_json(hole));
    json props = {{"id", b.id}, {"usage_type", std::string(to_string(b.usage))}};
    if (b.floor_area) props["floor_area_m2"] = *b.floor_area;
    if (b.annual_demand) props["annual_demand_kwh"] = *b.annual_demand;
    if (b.block_id) props["block_id"] = *b.block_id;
    if (b.construction_year) props["construction_year"] = *b.construction_year;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
                        {"properties", props}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) + "\n";
}

}  // namespace dhforge
