#include "dhforge/artifactio.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dhforge/errors.hpp"

namespace dhforge {

using nlohmann::json;

namespace {

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void get(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

json attrs_json(const NodeAttrs& a) {
  json j = json::object();
  put(j, "annual_demand_kwh", a.annual_demand);
  put(j, "nominal_load_kw", a.nominal_load);
  put(j, "construction_year", a.construction_year);
  put(j, "usage_type", a.usage_type);
  put(j, "member_count", a.member_count);
  put(j, "floor_area_m2", a.floor_area);
  put(j, "block_id", a.block_id);
  put(j, "name", a.name);
  put(j, "capacity_kw", a.capacity);
  put(j, "plant_type", a.plant_type);
  if (!a.demand_mix.empty()) j["demand_mix_kwh"] = a.demand_mix;
  return j;
}

NodeAttrs attrs_from(const json& j) {
  NodeAttrs a;
  get(j, "annual_demand_kwh", a.annual_demand);
  get(j, "nominal_load_kw", a.nominal_load);
  get(j, "construction_year", a.construction_year);
  get(j, "usage_type", a.usage_type);
  get(j, "member_count", a.member_count);
  get(j, "floor_area_m2", a.floor_area);
  get(j, "block_id", a.block_id);
  get(j, "name", a.name);
  get(j, "capacity_kw", a.capacity);
  get(j, "plant_type", a.plant_type);
  if (j.contains("demand_mix_kwh")) a.demand_mix = j["demand_mix_kwh"].get<std::map<std::string, double>>();
  return a;
}

json edge_json(const PipeEdge& e) {
  json j = {{"u", e.u}, {"v", e.v}, {"length_m", e.length}, {"role", std::string(to_string(e.role))}};
  put(j, "dn", e.attrs.dn);
  put(j, "inner_diameter_m", e.attrs.inner_diameter);
  put(j, "nominal_flow_kg_s", e.attrs.nominal_flow);
  put(j, "insulation_class", e.attrs.insulation_class);
  if (e.attrs.flagged) j["flagged"] = true;
  return j;
}

EdgeAttrs edge_attrs_from(const json& j) {
  EdgeAttrs a;
  get(j, "dn", a.dn);
  get(j, "inner_diameter_m", a.inner_diameter);
  get(j, "nominal_flow_kg_s", a.nominal_flow);
  get(j, "insulation_class", a.insulation_class);
  a.flagged = j.value("flagged", false);
  return a;
}

json provenance_json(const Provenance& p) {
  return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"input_digests", p.input_digests}};
}

Provenance provenance_from(const json& j) {
  Provenance p;
  p.config_hash = j.value("config_hash", "");
  p.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("input_digests")) p.input_digests = j["input_digests"].get<std::map<std::string, std::string>>();
  return p;
}

json events_json(const RunEvents& ev) {
  json skipped = json::array();
  for (const auto& s : ev.skipped_plants) skipped.push_back({{"id", s.id}, {"distance_m", s.distance}});
  return {{"stages", ev.stages}, {"skipped_plants", skipped}, {"warnings", ev.warnings}};
}

RunEvents events_from(const json& j) {
  RunEvents ev;
  if (j.contains("stages")) ev.stages = j["stages"].get<std::vector<std::string>>();
  if (j.contains("warnings")) ev.warnings = j["warnings"].get<std::vector<std::string>>();
  if (j.contains("skipped_plants"))
    for (const auto& s : j["skipped_plants"]) ev.skipped_plants.push_back({s.at("id"), s.at("distance_m")});
  return ev;
}

json origin_json(const Projection& proj) { return {{"lon", proj.origin().lon}, {"lat", proj.origin().lat}}; }

Projection origin_from(const json& j) { return Projection({j.at("lon").get<double>(), j.at("lat").get<double>()}); }

json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00" flipping between runs of mirrored coordinates.
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string export_graph_json(const ModelDocument& doc) {
  const NetworkGraph& g = doc.graph;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes()) {
    const GeoPoint p = doc.projection.unproject(n.pos);
    nodes.push_back({{"id", id},
                     {"kind", std::string(to_string(n.kind))},
                     {"lon", p.lon},
                     {"lat", p.lat},
                     {"attrs", attrs_json(n.attrs)}});
  }
  json edges = json::array();
  for (const auto& [id, e] : g.edges()) edges.push_back(edge_json(e));
  json j = {{"schema_version", std::string(kSchemaVersion)},
            {"projection_origin", origin_json(doc.projection)},
            {"representation", "single-line network; service pipes attached perpendicular to the nearest main"},
            {"sequences", {{"junction", g.junction_seq()}}},
            {"nodes", nodes},
            {"edges", edges},
            {"provenance", provenance_json(doc.provenance)},
            {"events", events_json(doc.events)}};
  return j.dump(1) + "\n";
}

ModelDocument import_graph_json(std::string_view text) {
  const json j = parse_document(text, "graph json");
  if (!j.is_object() || !j.contains("schema_version"))
    throw InputError("graph json: missing schema_version");
  if (!j["schema_version"].is_string() || j["schema_version"].get<std::string>() != kSchemaVersion)
    throw InputError("graph json: unsupported schema_version " + j["schema_version"].dump());
  try {
    ModelDocument doc;
    doc.projection = origin_from(j.at("projection_origin"));
    for (const auto& n : j.at("nodes")) {
      const GeoPoint p{n.at("lon").get<double>(), n.at("lat").get<double>()};
      doc.graph.add_node(Node{n.at("id").get<std::string>(), node_kind_from_string(n.at("kind").get<std::string>()),
                              doc.projection.project(p), attrs_from(n.value("attrs", json::object()))});
    }
    for (const auto& e : j.at("edges"))
      doc.graph.add_edge(e.at("u").get<std::string>(), e.at("v").get<std::string>(), e.at("length_m").get<double>(),
                         edge_role_from_string(e.value("role", "main")), edge_attrs_from(e));
    const auto seq = j.value("sequences", json::object()).value("junction", std::uint64_t{0});
    doc.graph.set_sequences(seq, doc.graph.edge_seq());
    doc.provenance = provenance_from(j.value("provenance", json::object()));
    doc.events = events_from(j.value("events", json::object()));
    return doc;
  } catch (const json::exception& e) {
    throw InputError(std::string("graph json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("graph json: ") + e.what());
  }
}

std::string export_geojson(const ModelDocument& doc) {
  const NetworkGraph& g = doc.graph;
  json features = json::array();
  for (const auto& [id, n] : g.nodes()) {
    const GeoPoint p = doc.projection.unproject(n.pos);
    json props = attrs_json(n.attrs);
    props["id"] = id;
    props["kind"] = std::string(to_string(n.kind));
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {p.lon, p.lat}}}},
                        {"properties", props}});
  }
  for (const auto& [id, e] : g.edges()) {
    const GeoPoint a = doc.projection.unproject(g.node(e.u).pos);
    const GeoPoint b = doc.projection.unproject(g.node(e.v).pos);
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", {{a.lon, a.lat}, {b.lon, b.lat}}}}},
                        {"properties", edge_json(e)}});
  }
  json j = {{"type", "FeatureCollection"},
            {"dhforge:schema_version", std::string(kSchemaVersion)},
            {"dhforge:projection_origin", origin_json(doc.projection)},
            {"dhforge:provenance", provenance_json(doc.provenance)},
            {"features", features}};
  return j.dump(1) + "\n";
}

ModelDocument import_geojson(std::string_view text) {
  const json j = parse_document(text, "model geojson");
  try {
    if (j.value("type", "") != "FeatureCollection") throw InputError("model geojson: not a FeatureCollection");
    ModelDocument doc;
    doc.projection = origin_from(j.at("dhforge:projection_origin"));
    doc.provenance = provenance_from(j.value("dhforge:provenance", json::object()));
    std::uint64_t max_seq = 0;
    bool any_junction = false;
    for (const auto& f : j.at("features")) {
      const json& geom = f.at("geometry");
      if (geom.at("type") != "Point") continue;
      const json& props = f.at("properties");
      const auto& c = geom.at("coordinates");
      Node n{props.at("id").get<std::string>(), node_kind_from_string(props.at("kind").get<std::string>()),
             doc.projection.project({c.at(0).get<double>(), c.at(1).get<double>()}), attrs_from(props)};
      if (n.kind == NodeKind::Junction && n.id.size() > 1 && n.id[0] == 'j') {
        any_junction = true;
        max_seq = std::max<std::uint64_t>(max_seq, std::stoull(n.id.substr(1)));
      }
      doc.graph.add_node(std::move(n));
    }
    for (const auto& f : j.at("features")) {
      if (f.at("geometry").at("type") != "LineString") continue;
      const json& e = f.at("properties");
      doc.graph.add_edge(e.at("u").get<std::string>(), e.at("v").get<std::string>(), e.at("length_m").get<double>(),
                         edge_role_from_string(e.value("role", "main")), edge_attrs_from(e));
    }
    doc.graph.set_sequences(any_junction ? max_seq + 1 : 0, doc.graph.edge_seq());
    return doc;
  } catch (const json::exception& e) {
    throw InputError(std::string("model geojson: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("model geojson: ") + e.what());
  }
}

std::string export_polylines_geojson(const std::vector<GeoPolyline>& lines) {
  json features = json::array();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json coords = json::array();
    for (const auto& p : lines[i]) coords.push_back({p.lon, p.lat});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", {{"index", i}}}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) + "\n";
}

double stroke_width(double d, double d_min, double d_max, const SvgStyle& style) {
  if (!(d_max > d_min)) return style.w_min;
  const double t = std::clamp((d - d_min) / (d_max - d_min), 0.0, 1.0);
  return style.w_min + t * (style.w_max - style.w_min);
}

std::string render_svg(const NetworkGraph& g, const SvgStyle& style) {
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  bool first = true;
  for (const auto& [id, n] : g.nodes()) {
    if (first) {
      min_x = max_x = n.pos.x;
      min_y = max_y = n.pos.y;
      first = false;
    }
    min_x = std::min(min_x, n.pos.x);
    max_x = std::max(max_x, n.pos.x);
    min_y = std::min(min_y, n.pos.y);
    max_y = std::max(max_y, n.pos.y);
  }
  const double w = std::max(max_x - min_x, 1.0);
  const double h = std::max(max_y - min_y, 1.0);
  const double mx = 0.02 * w, my = 0.02 * h;
  // SVG y grows downwards; north-up is achieved by plotting -y.
  const double vb_x = min_x - mx, vb_y = -max_y - my, vb_w = w + 2 * mx, vb_h = h + 2 * my;
  const double px_per_m = 1000.0 / std::max(vb_w, vb_h);

  double d_min = std::numeric_limits<double>::infinity(), d_max = -d_min;
  for (const auto& [id, e] : g.edges())
    if (e.attrs.inner_diameter) {
      d_min = std::min(d_min, *e.attrs.inner_diameter);
      d_max = std::max(d_max, *e.attrs.inner_diameter);
    }

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << fmt(vb_x) << ' ' << fmt(vb_y)
      << ' ' << fmt(vb_w) << ' ' << fmt(vb_h) << "\" width=\"" << fmt(vb_w * px_per_m) << "\" height=\""
      << fmt(vb_h * px_per_m) << "\">\n"
      << "<rect x=\"" << fmt(vb_x) << "\" y=\"" << fmt(vb_y) << "\" width=\"" << fmt(vb_w) << "\" height=\""
      << fmt(vb_h) << "\" fill=\"#ffffff\"/>\n"
      << "<g id=\"edges\" stroke=\"#c0392b\" stroke-linecap=\"round\" fill=\"none\">\n";
  for (const auto& [id, e] : g.edges()) {
    const PlanePoint& a = g.node(e.u).pos;
    const PlanePoint& b = g.node(e.v).pos;
    const double sw = e.attrs.inner_diameter ? stroke_width(*e.attrs.inner_diameter, d_min, d_max, style) : style.w_min;
    out << "<line class=\"" << to_string(e.role) << "\" x1=\"" << fmt(a.x) << "\" y1=\"" << fmt(-a.y) << "\" x2=\""
        << fmt(b.x) << "\" y2=\"" << fmt(-b.y) << "\" stroke-width=\"" << fmt(sw)
        << "\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  out << "</g>\n<g id=\"nodes\">\n";
  const double unit = 1.0 / px_per_m;
  for (const auto& [id, n] : g.nodes()) {
    switch (n.kind) {
      case NodeKind::Plant: {
        const double s = style.plant_size * unit;
        out << "<rect class=\"plant\" x=\"" << fmt(n.pos.x - s / 2) << "\" y=\"" << fmt(-n.pos.y - s / 2)
            << "\" width=\"" << fmt(s) << "\" height=\"" << fmt(s) << "\" fill=\"#1f3a93\"/>\n";
        break;
      }
      case NodeKind::Junction:
        out << "<circle class=\"junction\" cx=\"" << fmt(n.pos.x) << "\" cy=\"" << fmt(-n.pos.y) << "\" r=\""
            << fmt(style.junction_radius * unit) << "\" fill=\"#7f8c8d\"/>\n";
        break;
      case NodeKind::Building:
      case NodeKind::Consumer:
        out << "<circle class=\"" << to_string(n.kind) << "\" cx=\"" << fmt(n.pos.x) << "\" cy=\"" << fmt(-n.pos.y)
            << "\" r=\"" << fmt(style.node_radius * unit) << "\" fill=\"#e67e22\"/>\n";
        break;
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string summarize(const ModelDocument& doc) {
  const NetworkGraph& g = doc.graph;
  std::map<NodeKind, std::size_t> kinds;
  double demand = 0.0;
  for (const auto& [id, n] : g.nodes()) {
    ++kinds[n.kind];
    if (is_demand_node(n.kind)) demand += n.attrs.annual_demand.value_or(0.0);
  }
  std::map<std::string, std::pair<double, std::size_t>> dn_hist;  // dn -> (diameter, count)
  std::size_t unsized = 0;
  double main_len = 0.0, service_len = 0.0;
  std::vector<const PipeEdge*> flagged;
  for (const auto& [id, e] : g.edges()) {
    (e.role == EdgeRole::Main ? main_len : service_len) += e.length;
    if (e.attrs.dn) {
      auto& slot = dn_hist[*e.attrs.dn];
      slot.first = e.attrs.inner_diameter.value_or(0.0);
      ++slot.second;
    } else {
      ++unsized;
    }
    if (e.attrs.flagged) flagged.push_back(&e);
  }
  std::vector<std::pair<std::string, std::pair<double, std::size_t>>> hist(dn_hist.begin(), dn_hist.end());
  std::stable_sort(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.second.first < b.second.first; });

  std::ostringstream out;
  char buf[256];
  out << "district heating model report\n";
  out << "schema_version: " << kSchemaVersion << "\n";
  out << "seed: " << doc.provenance.seed << "\n";
  out << "config_hash: " << (doc.provenance.config_hash.empty() ? "-" : doc.provenance.config_hash) << "\n";
  out << "stages: ";
  for (std::size_t i = 0; i < doc.events.stages.size(); ++i) out << (i ? " -> " : "") << doc.events.stages[i];
  out << (doc.events.stages.empty() ? "-\n" : "\n");
  out << "\nnodes: " << g.node_count() << "\n";
  for (NodeKind k : {NodeKind::Junction, NodeKind::Building, NodeKind::Plant, NodeKind::Consumer})
    out << "  " << to_string(k) << ": " << kinds[k] << "\n";
  out << "edges: " << g.edge_count() << "\n";
  std::snprintf(buf, sizeof buf, "total length: %.3f km (main %.3f km, service %.3f km)\n",
                (main_len + service_len) / 1000.0, main_len / 1000.0, service_len / 1000.0);
  out << buf;
  std::snprintf(buf, sizeof buf, "total annual demand: %.3f MWh\n", demand / 1000.0);
  out << buf;
  out << "\nDN histogram:\n";
  if (hist.empty()) out << "  (no sized edges)\n";
  for (const auto& [dn, slot] : hist) out << "  " << dn << ": " << slot.second << "\n";
  if (unsized > 0 && !hist.empty()) out << "  unsized: " << unsized << "\n";
  out << "\nflagged edges (catalog exceeded): " << flagged.size() << "\n";
  for (const PipeEdge* e : flagged) {
    std::snprintf(buf, sizeof buf, "  %s - %s (%.3f kg/s)\n", e->u.c_str(), e->v.c_str(),
                  e->attrs.nominal_flow.value_or(0.0));
    out << buf;
  }
  out << "\nskipped plants: " << doc.events.skipped_plants.size() << "\n";
  for (const auto& s : doc.events.skipped_plants) {
    std::snprintf(buf, sizeof buf, "  %s (%.1f m from the network)\n", s.id.c_str(), s.distance);
    out << buf;
  }
  out << "\nwarnings: " << doc.events.warnings.size() << "\n";
  for (const auto& w : doc.events.warnings) out << "  " << w << "\n";
  if (!doc.provenance.input_digests.empty()) {
    out << "\ninputs:\n";
    for (const auto& [role, digest] : doc.provenance.input_digests) out << "  " << role << ": " << digest << "\n";
  }
  return out.str();
}

bool equivalent(const NetworkGraph& a, const NetworkGraph& b, double pos_tol) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (auto ia = a.nodes().begin(), ib = b.nodes().begin(); ia != a.nodes().end(); ++ia, ++ib) {
    const Node& na = ia->second;
    const Node& nb = ib->second;
    if (na.id != nb.id || na.kind != nb.kind || !(na.attrs == nb.attrs)) return false;
    if (distance(na.pos, nb.pos) > pos_tol) return false;
  }
  for (auto ia = a.edges().begin(), ib = b.edges().begin(); ia != a.edges().end(); ++ia, ++ib) {
    const PipeEdge& ea = ia->second;
    const PipeEdge& eb = ib->second;
    if (ea.u != eb.u || ea.v != eb.v || ea.length != eb.length || ea.role != eb.role || !(ea.attrs == eb.attrs))
      return false;
  }
  return true;
}

}  // namespace dhforge
