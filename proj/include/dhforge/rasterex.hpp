#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "dhforge/geo.hpp"

namespace dhforge {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major RGB raster.
class RasterMap {
 public:
  RasterMap(int width, int height, Rgb fill = {255, 255, 255});
  RasterMap(int width, int height, std::vector<Rgb> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  const Rgb& at(int col, int row) const { return pixels_[index(col, row)]; }
  Rgb& at(int col, int row) { return pixels_[index(col, row)]; }
  const std::vector<Rgb>& pixels() const { return pixels_; }

 private:
  std::size_t index(int col, int row) const;

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// 8-bit RGB or RGBA PNG; alpha is dropped. Throws InputError.
RasterMap read_png(const std::filesystem::path& path);
void write_png(const RasterMap& raster, const std::filesystem::path& path);

struct PixelPoint {
  int col = 0;
  int row = 0;

  auto operator<=>(const PixelPoint&) const = default;
};

struct ControlPoint {
  double col = 0.0;
  double row = 0.0;
  GeoPoint geo;
};

/// CSV with header col,row,lon,lat.
std::vector<ControlPoint> load_control_points(std::string_view csv);

/// x = a·col + b·row + c, y = d·col + e·row + f in projected meters.
struct AffineTransform {
  double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

  PlanePoint apply(double col, double row) const { return {a * col + b * row + c, d * col + e * row + f}; }
  double determinant() const { return a * e - b * d; }
};

/// Least-squares fit; exact for three non-collinear points. Throws
/// std::invalid_argument with fewer than three or collinear points.
AffineTransform fit_affine(const std::vector<ControlPoint>& points, const Projection& proj);

class BinaryMask {
 public:
  BinaryMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_ && bits_[std::size_t(row) * width_ + col];
  }
  void set(int col, int row, bool v) { bits_[std::size_t(row) * width_ + col] = v ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Pixels whose largest per-channel difference to target is <= tolerance.
BinaryMask color_mask(const RasterMap& raster, Rgb target, int tolerance);

/// Square-neighbourhood dilation, radius in pixels (0 = identity).
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Zhang–Suen thinning to a fixpoint. An 8-connected component is never
/// erased completely: if a pass would delete all of it, its first pixel in
/// row-major order survives.
BinaryMask thin(const BinaryMask& mask);

/// Number of 8-connected components.
std::size_t count_components(const BinaryMask& mask);

using PixelPolyline = std::vector<PixelPoint>;

/// Splits a skeleton into pixel runs between end and junction pixels
/// (degree != 2, with diagonal steps dropped where a 4-neighbour path
/// exists). Junction pixels end every run that touches them; closed loops
/// start and end at their first pixel in row-major order; isolated pixels
/// are dropped.
std::vector<PixelPolyline> trace(const BinaryMask& skeleton);

struct ExtractionOptions {
  Rgb rgb{0, 0, 255};
  int tolerance = 30;
  int dilation = 0;  // 0..2 px
};

std::vector<GeoPolyline> extract_network(const RasterMap& raster, const std::vector<ControlPoint>& control_points,
                                         const ExtractionOptions& options, const Projection& proj);

}  // namespace dhforge
