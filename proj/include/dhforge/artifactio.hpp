#pragma once

#include <string>
#include <string_view>

#include "dhforge/model.hpp"

namespace dhforge {

inline constexpr std::string_view kSchemaVersion = "1";

std::string sha256_hex(std::string_view bytes);

/// Versioned JSON document of the model. Positions are stored as WGS84 and
/// re-projected with the stored origin on import.
std::string export_graph_json(const ModelDocument& doc);
/// Throws InputError on malformed input or an unsupported schema_version.
ModelDocument import_graph_json(std::string_view text);

/// RFC 7946 FeatureCollection: one Point per node (sorted by id), then one
/// LineString per edge (insertion order). The projection origin and
/// provenance travel as foreign members.
std::string export_geojson(const ModelDocument& doc);
ModelDocument import_geojson(std::string_view text);

/// LineString features in WGS84, for extracted network polylines.
std::string export_polylines_geojson(const std::vector<GeoPolyline>& lines);

struct SvgStyle {
  double w_min = 0.5;  // px
  double w_max = 6.0;  // px
  double node_radius = 1.5;
  double plant_size = 8.0;
  double junction_radius = 0.6;
};

/// Stroke width for a diameter on the [d_min, d_max] scale of the network.
double stroke_width(double d, double d_min, double d_max, const SvgStyle& style);

std::string render_svg(const NetworkGraph& g, const SvgStyle& style = {});

/// Plain-text run summary; depends only on the document contents.
std::string summarize(const ModelDocument& doc);

/// Structural equality with a tolerance on node positions (m).
bool equivalent(const NetworkGraph& a, const NetworkGraph& b, double pos_tol = 1e-6);

}  // namespace dhforge
