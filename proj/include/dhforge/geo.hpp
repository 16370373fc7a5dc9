#pragma once

#include <span>
#include <vector>

namespace dhforge {

inline constexpr double kEarthRadius = 6371000.0;

/// WGS84 longitude/latitude in degrees.
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// Local planar coordinates in meters (x east, y north).
struct PlanePoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const PlanePoint&) const = default;
};

bool is_valid(const GeoPoint& p);
double distance(const PlanePoint& a, const PlanePoint& b);

/// Equirectangular projection about a fixed origin. Adequate for
/// city-scale extents; one instance is shared by every stage of a run.
class Projection {
 public:
  Projection() = default;
  explicit Projection(GeoPoint origin);

  const GeoPoint& origin() const { return origin_; }

  PlanePoint project(const GeoPoint& p) const;
  GeoPoint unproject(const PlanePoint& p) const;

  /// Projection centered on the bounding box of the given points.
  static Projection centered_on(std::span<const GeoPoint> points);

 private:
  GeoPoint origin_{};
  double cos_lat0_ = 1.0;
};

using Polyline = std::vector<PlanePoint>;
using GeoPolyline = std::vector<GeoPoint>;

/// Throws std::invalid_argument if fewer than two points or two
/// consecutive points coincide.
void validate_polyline(const Polyline& line);

/// Rings are stored open (no repeated closing vertex).
struct Polygon {
  std::vector<PlanePoint> exterior;
  std::vector<std::vector<PlanePoint>> holes;
};

/// Drops a trailing vertex equal to the first and checks for at least three
/// distinct vertices. Throws std::invalid_argument otherwise.
std::vector<PlanePoint> normalize_ring(std::vector<PlanePoint> ring);

struct SegmentProjection {
  double distance = 0.0;
  PlanePoint foot;
  double t = 0.0;  // segment parameter of the foot, in [0, 1]
};

/// Distance from p to the closed segment [a, b]. Throws on a == b.
SegmentProjection point_segment_distance(const PlanePoint& p, const PlanePoint& a,
                                         const PlanePoint& b);

struct CentroidArea {
  PlanePoint centroid;
  double area = 0.0;
};

/// Shoelace area with holes subtracted, and the area-weighted centroid.
/// Throws std::invalid_argument for zero area.
CentroidArea polygon_centroid_area(const Polygon& poly);

/// Even-odd test against exterior and holes; boundary points count as inside
/// the exterior.
bool contains(const Polygon& poly, const PlanePoint& p);

}  // namespace dhforge
