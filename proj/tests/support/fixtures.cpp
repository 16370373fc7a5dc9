#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dhforge/pipeline.hpp"

namespace fixtures {

using dhforge::PlanePoint;
using dhforge::Polygon;
using dhforge::Projection;
using dhforge::UsageType;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string kml(const std::vector<std::vector<PlanePoint>>& lines, const Projection& proj) {
  std::ostringstream s;
  s.precision(12);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<kml xmlns=\"http://www.opengis.net/kml/2.2\"><Document>\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    s << "<Placemark><name>line " << i << "</name><LineString><coordinates>";
    for (const auto& p : lines[i]) {
      const auto g = proj.unproject(p);
      s << g.lon << "," << g.lat << ",0 ";
    }
    s << "</coordinates></LineString></Placemark>\n";
  }
  s << "</Document></kml>\n";
  return s.str();
}

std::string ring_json(const std::vector<PlanePoint>& ring, const Projection& proj) {
  std::ostringstream s;
  s.precision(12);
  s << "[[";
  for (std::size_t i = 0; i <= ring.size(); ++i) {
    const auto g = proj.unproject(ring[i % ring.size()]);
    s << (i ? "," : "") << "[" << g.lon << "," << g.lat << "]";
  }
  s << "]]";
  return s.str();
}

std::vector<PlanePoint> line(PlanePoint a, PlanePoint b, double step) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int n = static_cast<int>(std::round(len / step));
  std::vector<PlanePoint> out;
  for (int i = 0; i <= n; ++i) out.push_back({a.x + (b.x - a.x) * i / n, a.y + (b.y - a.y) * i / n});
  return out;
}

}  // namespace

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dhforge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Polygon square(PlanePoint c, double half) {
  return Polygon{{{c.x - half, c.y - half}, {c.x + half, c.y - half}, {c.x + half, c.y + half}, {c.x - half, c.y + half}},
                 {}};
}

std::string weather_csv(double mean, double seasonal, double daily) {
  std::ostringstream s;
  s.precision(6);
  s << "hour,ambient_temp_c\n";
  for (int h = 0; h < 8760; ++h) {
    const double day = h / 24.0;
    const double t = mean - seasonal * std::cos(2 * std::numbers::pi * (day - 15.0) / 365.0) +
                     daily * std::sin(2 * std::numbers::pi * ((h % 24) - 9) / 24.0);
    s << h << "," << std::fixed << t << "\n";
  }
  return s.str();
}

std::string catalog_csv() {
  std::ostringstream s;
  s << "dn,inner_diameter_m,roughness_mm\n";
  for (const auto& e : dhforge::default_catalog())
    s << e.dn << "," << e.inner_diameter << "," << e.roughness_mm << "\n";
  return s.str();
}

ToyCity write_toy_city(const fs::path& dir, std::uint64_t seed, std::size_t k, const std::string& extra_yaml) {
  fs::create_directories(dir);
  ToyCity city;
  city.dir = dir;
  const Projection proj(kOrigin);

  // Network bounding box is x in [-300, 300], y in [-200, 200], so the
  // pipeline projection is centred on kOrigin as well.
  const std::vector<std::vector<PlanePoint>> lines = {
      line({-300, 0}, {300, 0}, 100),
      line({-100, 0}, {-100, 200}, 50),
      line({100, 0}, {100, -200}, 50),
      line({300, 0}, {300, 150}, 50),
  };
  for (const auto& l : lines) {
    city.network_vertices += l.size();
    city.network_length += std::hypot(l.back().x - l.front().x, l.back().y - l.front().y);
  }
  city.network_vertices -= 3;  // branch roots coincide with trunk vertices
  write(dir / "network.kml", kml(lines, proj));

  std::vector<PlanePoint> kept;
  for (int i = 0; i < 15; ++i) {
    kept.push_back({-280.0 + 40 * i, 30});
    kept.push_back({-280.0 + 40 * i, -30});
  }
  for (double y : {60, 120, 180}) {
    kept.push_back({-130, y});
    kept.push_back({-70, y});
    kept.push_back({70, -y});
    kept.push_back({130, -y});
  }
  kept.push_back({330, 50});
  kept.push_back({330, 100});
  kept.push_back({-200, -95});
  const std::vector<PlanePoint> far = {{-250, 160}, {250, -160}, {-250, -105}};

  std::vector<PlanePoint> all = kept;
  all.insert(all.end(), far.begin(), far.end());
  std::vector<dhforge::BuildingRecord> records;
  for (std::size_t i = 0; i < all.size(); ++i) {
    dhforge::BuildingRecord b;
    char id[32];
    std::snprintf(id, sizeof id, "B%03zu", i + 1);
    b.id = id;
    b.footprint = square(all[i], 6.0);
    b.usage = i % 7 == 3 ? UsageType::Commercial : i % 5 == 2 ? UsageType::Office : UsageType::Residential;
    if (i == 11) b.usage = UsageType::Industrial;
    if (i % 2 == 0)
      b.annual_demand = 15000.0 + 500.0 * i;
    else
      b.floor_area = 120.0 + 5.0 * i;
    if (i % 3 == 0) b.construction_year = 1950 + static_cast<int>(i);
    records.push_back(b);
    const bool in = i < kept.size();
    city.buildings.push_back({b.id, all[i], b.usage, in, all[i].x < 0});
  }
  write(dir / "buildings.geojson", dhforge::write_buildings_geojson(records, proj));

  std::size_t west = 0, east = 0;
  for (const auto& b : city.buildings) {
    if (!b.in_buffer) continue;
    ++city.in_buffer;
    (b.west_block ? west : east) += 1;
  }
  city.expected_connected = (west + 1) / 2 + east;  // round-half-up(0.5 * west)

  write(dir / "blocks.geojson",
        "{\"type\":\"FeatureCollection\",\"features\":[\n"
        "{\"type\":\"Feature\",\"properties\":{\"block_id\":\"west\",\"connection_proportion\":0.5},"
        "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":" +
            ring_json({{-320, -220}, {-1, -220}, {-1, 220}, {-320, 220}}, proj) +
            "}},\n"
            "{\"type\":\"Feature\",\"properties\":{\"block_id\":\"east\"},"
            "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":" +
            ring_json({{0, -220}, {350, -220}, {350, 220}, {0, 220}}, proj) + "}}\n]}\n");

  std::ostringstream plants;
  plants.precision(12);
  const auto p1 = proj.unproject({-330, 20});
  const auto p2 = proj.unproject({0, 600});
  plants << "{\"type\":\"FeatureCollection\",\"features\":[\n"
         << "{\"type\":\"Feature\",\"properties\":{\"id\":\"P1\",\"name\":\"Heizwerk Nord\",\"capacity_kw\":5000,"
         << "\"plant_type\":\"chp\"},\"geometry\":{\"type\":\"Point\",\"coordinates\":[" << p1.lon << "," << p1.lat
         << "]}},\n"
         << "{\"type\":\"Feature\",\"properties\":{\"id\":\"P2\",\"name\":\"Remote boiler\"},"
         << "\"geometry\":{\"type\":\"Point\",\"coordinates\":[" << p2.lon << "," << p2.lat << "]}}\n]}\n";
  write(dir / "plants.geojson", plants.str());

  std::ostringstream census;
  census << "grid_x,grid_y,construction_year\n";
  const char* classes[] = {"1949-1978", "1919-1948", "1979-1986"};
  int n = 0;
  for (int gx = -3; gx <= -1; ++gx)
    for (int gy = -3; gy <= 2; ++gy, ++n) {
      census << gx << "," << gy << ",";
      if (n % 2)
        census << classes[n % 3] << "\n";
      else
        census << 1955 + 3 * n << "\n";
    }
  write(dir / "census.csv", census.str());
  write(dir / "weather.csv", weather_csv());
  write(dir / "catalog.csv", catalog_csv());

  std::ostringstream cfg;
  cfg << "seed: " << seed << "\n"
      << "output_dir: out\n"
      << "inputs:\n"
      << "  network_kml: network.kml\n"
      << "  buildings: buildings.geojson\n"
      << "  blocks: blocks.geojson\n"
      << "  plants: plants.geojson\n"
      << "  census: census.csv\n"
      << "  weather: weather.csv\n"
      << "  catalog: catalog.csv\n"
      << "assembly:\n"
      << "  buffer_threshold_m: 100\n"
      << "  plant_attach_max_m: 200\n"
      << "sizing:\n"
      << "  delta_t_k: 30\n"
      << "cluster:\n"
      << "  enabled: true\n"
      << "  k: " << k << "\n"
      << "  restarts: 3\n"
      << extra_yaml;
  city.config = dir / "config.yaml";
  write(city.config, cfg.str());
  return city;
}

SyntheticCity write_synthetic_city(const fs::path& dir, std::size_t n_buildings, std::size_t k, std::uint64_t seed) {
  fs::create_directories(dir);
  SyntheticCity city;
  city.dir = dir;
  const Projection proj(kOrigin);

  // Square street grid with 100 m blocks, six building slots per street
  // segment; size chosen so the grid is symmetric around the origin.
  std::size_t m = 2;
  while (2 * m * (m - 1) * 6 < n_buildings) ++m;
  const double half = 50.0 * (m - 1);
  std::vector<std::vector<PlanePoint>> lines;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = -half + 100.0 * i;
    lines.push_back(line({-half, c}, {half, c}, 100));
    lines.push_back(line({c, -half}, {c, half}, 100));
  }
  write(dir / "network.kml", kml(lines, proj));

  std::vector<dhforge::BuildingRecord> records;
  for (std::size_t seg = 0; records.size() < n_buildings; ++seg) {
    const bool horizontal = seg % 2 == 0;
    const std::size_t idx = seg / 2;
    const std::size_t row = idx / (m - 1), col = idx % (m - 1);
    const double a = -half + 100.0 * row, b = -half + 100.0 * col;
    for (double t : {30.0, 50.0, 70.0})
      for (double off : {-25.0, 25.0}) {
        if (records.size() == n_buildings) break;
        const PlanePoint c = horizontal ? PlanePoint{b + t, a + off} : PlanePoint{a + off, b + t};
        dhforge::BuildingRecord r;
        char id[32];
        std::snprintf(id, sizeof id, "S%05zu", records.size());
        r.id = id;
        r.footprint = square(c, 3.0);
        const std::size_t i = records.size();
        r.usage = i % 9 == 4 ? UsageType::Office : UsageType::Residential;
        r.annual_demand = 10000.0 + 200.0 * (i % 50);
        r.construction_year = 1950 + static_cast<int>(i % 60);
        records.push_back(std::move(r));
      }
  }
  city.buildings = records.size();
  write(dir / "buildings.geojson", dhforge::write_buildings_geojson(records, proj));

  const auto p = proj.unproject({-half - 20.0, -half - 20.0});
  std::ostringstream plants;
  plants.precision(12);
  plants << "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\",\"properties\":{\"id\":\"P1\","
         << "\"name\":\"Plant\"},\"geometry\":{\"type\":\"Point\",\"coordinates\":[" << p.lon << "," << p.lat
         << "]}}]}\n";
  write(dir / "plants.geojson", plants.str());
  write(dir / "weather.csv", weather_csv());

  std::ostringstream cfg;
  cfg << "seed: " << seed << "\n"
      << "output_dir: out\n"
      << "inputs:\n"
      << "  network_kml: network.kml\n"
      << "  buildings: buildings.geojson\n"
      << "  plants: plants.geojson\n"
      << "  weather: weather.csv\n"
      << "cluster:\n"
      << "  enabled: true\n"
      << "  k: " << k << "\n";
  city.config = dir / "config.yaml";
  write(city.config, cfg.str());
  return city;
}

dhforge::RasterMap rasterize(const std::vector<std::vector<PlanePoint>>& pixel_lines, int width, int height,
                             double half_width, dhforge::Rgb color) {
  dhforge::RasterMap img(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (const auto& l : pixel_lines)
        for (std::size_t i = 0; i + 1 < l.size(); ++i)
          if (dhforge::point_segment_distance({double(c), double(r)}, l[i], l[i + 1]).distance <= half_width)
            img.at(c, r) = color;
  return img;
}

PlanePoint pixel_to_plane(PlanePoint px, PlanePoint top_left, double mpp) {
  return {top_left.x + mpp * px.x, top_left.y - mpp * px.y};
}

std::vector<dhforge::ControlPoint> control_points(PlanePoint top_left, double mpp) {
  const Projection proj(kOrigin);
  std::vector<dhforge::ControlPoint> out;
  for (PlanePoint px : {PlanePoint{0, 0}, PlanePoint{100, 0}, PlanePoint{0, 100}})
    out.push_back({px.x, px.y, proj.unproject(pixel_to_plane(px, top_left, mpp))});
  return out;
}

std::string control_points_csv(const std::vector<dhforge::ControlPoint>& cps) {
  std::ostringstream s;
  s.precision(12);
  s << "col,row,lon,lat\n";
  for (const auto& cp : cps) s << cp.col << "," << cp.row << "," << cp.geo.lon << "," << cp.geo.lat << "\n";
  return s.str();
}

}  // namespace fixtures
