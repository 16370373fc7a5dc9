#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dhforge/geo.hpp"
#include "dhforge/ingest.hpp"
#include "dhforge/rasterex.hpp"

namespace fixtures {

namespace fs = std::filesystem;

// Fresh, empty directory below the system temp dir.
fs::path scratch_dir(const std::string& name);

// Geographic origin every fixture is built around.
inline const dhforge::GeoPoint kOrigin{6.95, 51.45};

struct ToyBuilding {
  std::string id;
  dhforge::PlanePoint center;
  dhforge::UsageType usage;
  bool in_buffer;   // centroid within 100 m of a pipe
  bool west_block;  // inside the block with proportion 0.5
};

// A small town: a trunk with two branches and a spur, 48 buildings (45
// within 100 m of a pipe), two blocks, two plants (one beyond 200 m), a
// census grid covering the western half and a synthetic weather year.
struct ToyCity {
  fs::path dir;
  fs::path config;
  std::vector<ToyBuilding> buildings;
  std::size_t in_buffer = 0;
  std::size_t expected_connected = 0;
  std::size_t network_vertices = 0;
  double network_length = 0.0;
};

ToyCity write_toy_city(const fs::path& dir, std::uint64_t seed = 42, std::size_t k = 10,
                       const std::string& extra_yaml = "");

// Weather CSV with a seasonal and a daily cycle.
std::string weather_csv(double mean = 9.0, double seasonal = 9.0, double daily = 3.0);
std::string catalog_csv();

// Street grid with n buildings, all within the buffer and none in a block
// with a proportion; every building has an explicit demand and year.
struct SyntheticCity {
  fs::path dir;
  fs::path config;
  std::size_t buildings = 0;
};
SyntheticCity write_synthetic_city(const fs::path& dir, std::size_t n_buildings, std::size_t k,
                                   std::uint64_t seed = 7);

// Axis-aligned square footprint around c.
dhforge::Polygon square(dhforge::PlanePoint c, double half);

// Paints every pixel whose centre lies within half_width pixels of one of
// the polylines (given in pixel coordinates).
dhforge::RasterMap rasterize(const std::vector<std::vector<dhforge::PlanePoint>>& pixel_lines, int width, int height,
                             double half_width, dhforge::Rgb color = {0, 0, 255});

// Three control points for a north-up raster whose pixel (0, 0) sits at
// `top_left` (projected metres about kOrigin) with the given pixel size.
std::vector<dhforge::ControlPoint> control_points(dhforge::PlanePoint top_left, double metres_per_pixel);
std::string control_points_csv(const std::vector<dhforge::ControlPoint>& cps);

// Pixel coordinates to projected metres for the same raster.
dhforge::PlanePoint pixel_to_plane(dhforge::PlanePoint px, dhforge::PlanePoint top_left, double metres_per_pixel);

}  // namespace fixtures
