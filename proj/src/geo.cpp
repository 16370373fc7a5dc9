#include "dhforge/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dhforge {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double signed_ring_area(const std::vector<PlanePoint>& ring, double& cx, double& cy) {
  double a2 = 0.0;
  cx = cy = 0.0;
  // Shift by the first vertex to keep the cross products well conditioned.
  const PlanePoint o = ring.front();
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const PlanePoint& p = ring[i];
    const PlanePoint& q = ring[(i + 1) % ring.size()];
    const double px = p.x - o.x, py = p.y - o.y;
    const double qx = q.x - o.x, qy = q.y - o.y;
    const double cross = px * qy - qx * py;
    a2 += cross;
    cx += (px + qx) * cross;
    cy += (py + qy) * cross;
  }
  const double area = a2 / 2.0;
  if (area != 0.0) {
    cx = cx / (6.0 * area) + o.x;
    cy = cy / (6.0 * area) + o.y;
  }
  return area;
}

bool ring_contains(const std::vector<PlanePoint>& ring, const PlanePoint& p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const PlanePoint& a = ring[i];
    const PlanePoint& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool on_ring_boundary(const std::vector<PlanePoint>& ring, const PlanePoint& p) {
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const PlanePoint& a = ring[i];
    const PlanePoint& b = ring[(i + 1) % ring.size()];
    if (a == b) continue;
    if (point_segment_distance(p, a, b).distance <= 1e-9) return true;
  }
  return false;
}

}  // namespace

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 && p.lon <= 180.0 &&
         p.lat >= -90.0 && p.lat <= 90.0;
}

double distance(const PlanePoint& a, const PlanePoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Projection::Projection(GeoPoint origin) : origin_(origin) {
  if (!is_valid(origin)) throw std::invalid_argument("projection origin outside WGS84 range");
  cos_lat0_ = std::cos(origin.lat * kDegToRad);
}

PlanePoint Projection::project(const GeoPoint& p) const {
  return {kEarthRadius * cos_lat0_ * (p.lon - origin_.lon) * kDegToRad,
          kEarthRadius * (p.lat - origin_.lat) * kDegToRad};
}

GeoPoint Projection::unproject(const PlanePoint& p) const {
  return {origin_.lon + p.x / (kEarthRadius * cos_lat0_ * kDegToRad),
          origin_.lat + p.y / (kEarthRadius * kDegToRad)};
}

Projection Projection::centered_on(std::span<const GeoPoint> points) {
  if (points.empty()) throw std::invalid_argument("cannot center a projection on zero points");
  auto [lon_min, lon_max] = std::minmax_element(points.begin(), points.end(),
                                                [](auto& a, auto& b) { return a.lon < b.lon; });
  auto [lat_min, lat_max] = std::minmax_element(points.begin(), points.end(),
                                                [](auto& a, auto& b) { return a.lat < b.lat; });
  return Projection({(lon_min->lon + lon_max->lon) / 2.0, (lat_min->lat + lat_max->lat) / 2.0});
}

void validate_polyline(const Polyline& line) {
  if (line.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  for (std::size_t i = 1; i < line.size(); ++i) {
    if (!std::isfinite(line[i].x) || !std::isfinite(line[i].y))
      throw std::invalid_argument("polyline has non-finite coordinates");
    if (line[i] == line[i - 1])
      throw std::invalid_argument("polyline has coincident consecutive points");
  }
}

std::vector<PlanePoint> normalize_ring(std::vector<PlanePoint> ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  std::vector<PlanePoint> distinct = ring;
  std::sort(distinct.begin(), distinct.end(),
            [](auto& a, auto& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw std::invalid_argument("ring needs at least three distinct vertices");
  return ring;
}

SegmentProjection point_segment_distance(const PlanePoint& p, const PlanePoint& a,
                                         const PlanePoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) throw std::invalid_argument("degenerate segment");
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  PlanePoint foot = t == 0.0 ? a : t == 1.0 ? b : PlanePoint{a.x + t * dx, a.y + t * dy};
  return {distance(p, foot), foot, t};
}

CentroidArea polygon_centroid_area(const Polygon& poly) {
  if (poly.exterior.size() < 3) throw std::invalid_argument("polygon exterior has fewer than 3 vertices");
  double cx, cy;
  const double outer = signed_ring_area(poly.exterior, cx, cy);
  double area = std::abs(outer);
  double mx = area * cx, my = area * cy;
  for (const auto& hole : poly.holes) {
    if (hole.size() < 3) continue;
    double hx, hy;
    const double ha = std::abs(signed_ring_area(hole, hx, hy));
    area -= ha;
    mx -= ha * hx;
    my -= ha * hy;
  }
  if (!(area > 0.0)) throw std::invalid_argument("polygon has zero area");
  return {{mx / area, my / area}, area};
}

bool contains(const Polygon& poly, const PlanePoint& p) {
  if (poly.exterior.size() < 3) return false;
  if (on_ring_boundary(poly.exterior, p)) return true;
  if (!ring_contains(poly.exterior, p)) return false;
  for (const auto& hole : poly.holes) {
    if (hole.size() >= 3 && ring_contains(hole, p) && !on_ring_boundary(hole, p)) return false;
  }
  return true;
}

}  // namespace dhforge
