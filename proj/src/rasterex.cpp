#include "dhforge/rasterex.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dhforge/errors.hpp"

namespace dhforge {

namespace {

// Neighbour offsets P2..P9, clockwise from north.
constexpr int kDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDr[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

std::vector<std::vector<PixelPoint>> components(const BinaryMask& mask) {
  std::vector<std::vector<PixelPoint>> out;
  std::vector<std::uint8_t> seen(std::size_t(mask.width()) * mask.height(), 0);
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.get(c, r) || seen[std::size_t(r) * mask.width() + c]) continue;
      std::vector<PixelPoint> comp;
      std::vector<PixelPoint> stack{{c, r}};
      seen[std::size_t(r) * mask.width() + c] = 1;
      while (!stack.empty()) {
        PixelPoint p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int k = 0; k < 8; ++k) {
          const int nc = p.col + kDc[k], nr = p.row + kDr[k];
          if (!mask.get(nc, nr) || seen[std::size_t(nr) * mask.width() + nc]) continue;
          seen[std::size_t(nr) * mask.width() + nc] = 1;
          stack.push_back({nc, nr});
        }
      }
      out.push_back(std::move(comp));
    }
  return out;
}

// Skeleton adjacency: 8-neighbours, minus diagonal links whose two pixels
// also connect through a shared 4-neighbour.
std::vector<PixelPoint> skeleton_neighbours(const BinaryMask& m, PixelPoint p) {
  std::vector<PixelPoint> out;
  for (int k = 0; k < 8; ++k) {
    const int nc = p.col + kDc[k], nr = p.row + kDr[k];
    if (!m.get(nc, nr)) continue;
    const bool diagonal = kDc[k] != 0 && kDr[k] != 0;
    if (diagonal && (m.get(nc, p.row) || m.get(p.col, nr))) continue;
    out.push_back({nc, nr});
  }
  return out;
}

}  // namespace

RasterMap::RasterMap(int width, int height, Rgb fill)
    : RasterMap(width, height, std::vector<Rgb>(std::size_t(std::max(width, 0)) * std::max(height, 0), fill)) {}

RasterMap::RasterMap(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw std::invalid_argument("raster needs width and height >= 1");
  if (pixels_.size() != std::size_t(width) * height) throw std::invalid_argument("raster pixel count mismatch");
}

std::size_t RasterMap::index(int col, int row) const {
  if (col < 0 || row < 0 || col >= width_ || row >= height_) throw std::out_of_range("pixel outside raster");
  return std::size_t(row) * width_ + col;
}

RasterMap read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw InputError("cannot read PNG '" + path.string() + "': " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw InputError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  std::vector<Rgb> pixels(std::size_t(w) * h);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  return RasterMap(w, h, std::move(pixels));
}

void write_png(const RasterMap& raster, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer;
  buffer.reserve(raster.pixels().size() * 3);
  for (const Rgb& p : raster.pixels()) buffer.insert(buffer.end(), p.begin(), p.end());
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw std::runtime_error("cannot write PNG '" + path.string() + "': " + image.message);
}

std::vector<ControlPoint> load_control_points(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::vector<ControlPoint> out;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      line.erase(std::remove(line.begin(), line.end(), ' '), line.end());
      if (line != "col,row,lon,lat") throw InputError("control points: expected header 'col,row,lon,lat'");
      header = true;
      continue;
    }
    std::istringstream row(line);
    ControlPoint cp;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> cp.col >> c1 >> cp.row >> c2 >> cp.geo.lon >> c3 >> cp.geo.lat) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !(row >> std::ws).eof())
      throw InputError("control points line " + std::to_string(lineno) + ": expected four numbers");
    if (!is_valid(cp.geo)) throw InputError("control points line " + std::to_string(lineno) + ": bad lon/lat");
    out.push_back(cp);
  }
  if (!header) throw InputError("control points: empty file");
  return out;
}

AffineTransform fit_affine(const std::vector<ControlPoint>& points, const Projection& proj) {
  if (points.size() < 3) throw std::invalid_argument("affine fit needs at least 3 control points");
  double max_cross = 0.0, scale = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    scale = std::max(scale, std::hypot(points[i].col - points[0].col, points[i].row - points[0].row));
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double cross = (points[i].col - points[0].col) * (points[j].row - points[0].row) -
                           (points[j].col - points[0].col) * (points[i].row - points[0].row);
      max_cross = std::max(max_cross, std::abs(cross));
    }
  }
  if (!(max_cross > 1e-9 * std::max(scale * scale, 1.0)))
    throw std::invalid_argument("control points are collinear in pixel space");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::MatrixXd target(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ControlPoint& cp = points[static_cast<std::size_t>(i)];
    const PlanePoint p = proj.project(cp.geo);
    design.row(i) << cp.col, cp.row, 1.0;
    target.row(i) << p.x, p.y;
  }
  const Eigen::MatrixXd coef = design.colPivHouseholderQr().solve(target);
  AffineTransform t{coef(0, 0), coef(1, 0), coef(2, 0), coef(0, 1), coef(1, 1), coef(2, 1)};
  if (t.determinant() == 0.0) throw std::invalid_argument("degenerate affine transform");
  return t;
}

std::size_t BinaryMask::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

BinaryMask color_mask(const RasterMap& raster, Rgb target, int tolerance) {
  if (tolerance < 0) throw std::invalid_argument("color tolerance must be >= 0");
  BinaryMask mask(raster.width(), raster.height());
  for (int r = 0; r < raster.height(); ++r)
    for (int c = 0; c < raster.width(); ++c) {
      const Rgb& p = raster.at(c, r);
      int diff = 0;
      for (int k = 0; k < 3; ++k) diff = std::max(diff, std::abs(int(p[k]) - int(target[k])));
      if (diff <= tolerance) mask.set(c, r, true);
    }
  return mask;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0 || radius > 2) throw std::invalid_argument("dilation radius must lie in 0..2");
  if (radius == 0) return mask;
  BinaryMask out(mask.width(), mask.height());
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) {
      bool hit = false;
      for (int dr = -radius; dr <= radius && !hit; ++dr)
        for (int dc = -radius; dc <= radius && !hit; ++dc) hit = mask.get(c + dc, r + dr);
      out.set(c, r, hit);
    }
  return out;
}

BinaryMask thin(const BinaryMask& mask) {
  BinaryMask cur = mask;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<PixelPoint> doomed;
      for (int r = 0; r < cur.height(); ++r)
        for (int c = 0; c < cur.width(); ++c) {
          if (!cur.get(c, r)) continue;
          bool n[8];
          int b = 0;
          for (int k = 0; k < 8; ++k) b += (n[k] = cur.get(c + kDc[k], r + kDr[k]));
          if (b < 2 || b > 6) continue;
          int a = 0;
          for (int k = 0; k < 8; ++k) a += (!n[k] && n[(k + 1) % 8]);
          if (a != 1) continue;
          // n[0]=P2 (N), n[2]=P4 (E), n[4]=P6 (S), n[6]=P8 (W)
          if (pass == 0) {
            if (n[0] && n[2] && n[4]) continue;
            if (n[2] && n[4] && n[6]) continue;
          } else {
            if (n[0] && n[2] && n[6]) continue;
            if (n[0] && n[4] && n[6]) continue;
          }
          doomed.push_back({c, r});
        }
      if (doomed.empty()) continue;
      BinaryMask marked(cur.width(), cur.height());
      for (const auto& p : doomed) marked.set(p.col, p.row, true);
      // Keep one pixel of any component that would vanish entirely.
      for (const auto& comp : components(cur)) {
        const bool all = std::all_of(comp.begin(), comp.end(), [&](auto& p) { return marked.get(p.col, p.row); });
        if (all) {
          const auto first = *std::min_element(comp.begin(), comp.end(), [](auto& x, auto& y) {
            return x.row < y.row || (x.row == y.row && x.col < y.col);
          });
          marked.set(first.col, first.row, false);
        }
      }
      for (const auto& p : doomed)
        if (marked.get(p.col, p.row)) {
          cur.set(p.col, p.row, false);
          changed = true;
        }
    }
  }
  return cur;
}

std::size_t count_components(const BinaryMask& mask) { return components(mask).size(); }

std::vector<PixelPolyline> trace(const BinaryMask& skeleton) {
  const int w = skeleton.width(), h = skeleton.height();
  auto degree = [&](PixelPoint p) { return skeleton_neighbours(skeleton, p).size(); };
  // Visited skeleton links, keyed by ordered pixel pair.
  std::set<std::pair<PixelPoint, PixelPoint>> used;
  auto link = [](PixelPoint a, PixelPoint b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
  std::vector<std::uint8_t> covered(std::size_t(w) * h, 0);
  std::vector<PixelPolyline> out;

  auto walk = [&](PixelPoint start, PixelPoint next) {
    PixelPolyline line{start, next};
    used.insert(link(start, next));
    covered[std::size_t(start.row) * w + start.col] = 1;
    PixelPoint prev = start, cur = next;
    while (degree(cur) == 2 && cur != start) {
      covered[std::size_t(cur.row) * w + cur.col] = 1;
      PixelPoint step{-1, -1};
      for (const auto& nb : skeleton_neighbours(skeleton, cur))
        if (nb != prev && !used.contains(link(cur, nb))) {
          step = nb;
          break;
        }
      if (step.col < 0) break;
      used.insert(link(cur, step));
      line.push_back(step);
      prev = cur;
      cur = step;
    }
    covered[std::size_t(cur.row) * w + cur.col] = 1;
    out.push_back(std::move(line));
  };

  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const PixelPoint p{c, r};
      if (!skeleton.get(c, r) || degree(p) == 2) continue;
      for (const auto& nb : skeleton_neighbours(skeleton, p))
        if (!used.contains(link(p, nb))) walk(p, nb);
    }
  // Remaining pixels lie on closed loops.
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!skeleton.get(c, r) || covered[std::size_t(r) * w + c]) continue;
      const PixelPoint p{c, r};
      for (const auto& nb : skeleton_neighbours(skeleton, p))
        if (!used.contains(link(p, nb))) {
          walk(p, nb);
          break;
        }
    }
  return out;
}

std::vector<GeoPolyline> extract_network(const RasterMap& raster, const std::vector<ControlPoint>& control_points,
                                         const ExtractionOptions& options, const Projection& proj) {
  const AffineTransform t = fit_affine(control_points, proj);
  const BinaryMask mask = dilate(color_mask(raster, options.rgb, options.tolerance), options.dilation);
  std::vector<GeoPolyline> out;
  for (const auto& line : trace(thin(mask))) {
    GeoPolyline geo;
    for (const auto& p : line) geo.push_back(proj.unproject(t.apply(p.col, p.row)));
    out.push_back(std::move(geo));
  }
  return out;
}

}  // namespace dhforge
