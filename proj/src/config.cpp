#include "dhforge/config.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include "dhforge/errors.hpp"

namespace dhforge {

using nlohmann::json;

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& key, T fallback) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError("config: bad value for '" + key + "'");
  }
}

std::optional<fs::path> path_of(const YAML::Node& node, const char* key, const fs::path& base) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return std::nullopt;
  fs::path p = v.as<std::string>();
  return p.is_absolute() ? p : base / p;
}

void check_known(const YAML::Node& node, std::initializer_list<std::string_view> keys, const std::string& section) {
  if (!node) return;
  if (!node.IsMap()) throw InputError("config: section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto k = kv.first.as<std::string>();
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw InputError("config: unknown key '" + (section.empty() ? k : section + "." + k) + "'");
  }
}

SlpParams slp_from(const YAML::Node& n, SlpParams p, const std::string& usage) {
  check_known(n, {"a", "b", "c", "d", "theta0", "weekday", "band_edges", "hour_factors"}, "demand.slp." + usage);
  p.a = scalar(n, "a", p.a);
  p.b = scalar(n, "b", p.b);
  p.c = scalar(n, "c", p.c);
  p.d = scalar(n, "d", p.d);
  p.theta0 = scalar(n, "theta0", p.theta0);
  try {
    if (n["weekday"]) {
      auto v = n["weekday"].as<std::vector<double>>();
      if (v.size() != 7) throw InputError("config: demand.slp." + usage + ".weekday needs 7 values");
      std::copy(v.begin(), v.end(), p.weekday.begin());
    }
    if (n["band_edges"]) p.band_edges = n["band_edges"].as<std::vector<double>>();
    if (n["hour_factors"]) {
      p.hour_factors.clear();
      for (const auto& row : n["hour_factors"]) {
        auto v = row.as<std::vector<double>>();
        if (v.size() != 24) throw InputError("config: hour factor rows need 24 values");
        std::array<double, 24> a{};
        std::copy(v.begin(), v.end(), a.begin());
        p.hour_factors.push_back(a);
      }
    }
  } catch (const YAML::Exception& e) {
    throw InputError("config: demand.slp." + usage + ": " + e.what());
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError("config: demand.slp." + usage + ": " + e.what());
  }
  return p;
}

}  // namespace

int RunConfig::network_source_count() const {
  return int(inputs.network_kml.has_value()) + int(inputs.network_geojson.has_value()) +
         int(inputs.raster.has_value()) + int(inputs.graph_json.has_value());
}

std::string RunConfig::canonical_json() const {
  json slp_json = json::object();
  for (const auto& [usage, p] : slp) {
    json hours = json::array();
    for (const auto& row : p.hour_factors) hours.push_back(std::vector<double>(row.begin(), row.end()));
    slp_json[usage] = {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"theta0", p.theta0},
                       {"weekday", std::vector<double>(p.weekday.begin(), p.weekday.end())},
                       {"band_edges", p.band_edges}, {"hour_factors", hours}};
  }
  json catalog = json::array();
  for (const auto& e : sizing.catalog) catalog.push_back({e.dn, e.inner_diameter, e.roughness_mm});
  json j = {
      {"seed", seed.value_or(0)},
      {"snap_tolerance_m", snap_tolerance},
      {"raster", {{"rgb", raster.rgb}, {"tolerance", raster.tolerance}, {"dilation_px", raster.dilation}}},
      {"assembly",
       {{"buffer_threshold_m", assembly.buffer_threshold},
        {"plant_attach_max_m", assembly.plant_attach_max},
        {"min_service_length_m", assembly.min_service_length},
        {"neighbor_k", assembly.neighbor_k}}},
      {"year_classes", year_classes},
      {"calendar_year", calendar_year},
      {"specific_demand", specific_demand},
      {"slp", slp_json},
      {"sizing", {{"delta_t_k", sizing.delta_t}, {"r_max_pa_per_m", sizing.r_max}, {"v_max_m_s", sizing.v_max},
                  {"catalog", catalog}}},
      {"fluid", {{"rho", fluid.rho}, {"cp", fluid.cp}, {"mu", fluid.mu}}},
      {"cluster",
       {{"enabled", cluster_enabled}, {"k", cluster.k}, {"max_iter", cluster.max_iter}, {"tol_m", cluster.tol},
        {"restarts", cluster.restarts}, {"before_sizing", cluster_before_sizing}}},
  };
  return j.dump();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_json()); }

static RunConfig parse_config_impl(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  cfg.output_dir = base_dir / cfg.output_dir;
  if (!root || root.IsNull()) return cfg;
  check_known(root, {"seed", "output_dir", "inputs", "network", "raster", "assembly", "census", "demand", "sizing",
                     "fluid", "cluster", "render"},
              "");
  try {
    if (root["seed"] && !root["seed"].IsNull()) cfg.seed = root["seed"].as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    throw InputError("config: seed must be a non-negative integer");
  }
  if (root["output_dir"]) {
    fs::path out = root["output_dir"].as<std::string>();
    cfg.output_dir = out.is_absolute() ? out : base_dir / out;
  }

  const YAML::Node in = root["inputs"];
  check_known(in, {"network_kml", "network_geojson", "raster", "control_points", "graph_json", "buildings", "blocks",
                   "plants", "census", "weather", "catalog"},
              "inputs");
  if (in) {
    cfg.inputs.network_kml = path_of(in, "network_kml", base_dir);
    cfg.inputs.network_geojson = path_of(in, "network_geojson", base_dir);
    cfg.inputs.raster = path_of(in, "raster", base_dir);
    cfg.inputs.control_points = path_of(in, "control_points", base_dir);
    cfg.inputs.graph_json = path_of(in, "graph_json", base_dir);
    cfg.inputs.buildings = path_of(in, "buildings", base_dir);
    cfg.inputs.blocks = path_of(in, "blocks", base_dir);
    cfg.inputs.plants = path_of(in, "plants", base_dir);
    cfg.inputs.census = path_of(in, "census", base_dir);
    cfg.inputs.weather = path_of(in, "weather", base_dir);
    cfg.inputs.catalog = path_of(in, "catalog", base_dir);
  }

  const YAML::Node net = root["network"];
  check_known(net, {"snap_tolerance_m"}, "network");
  if (net) cfg.snap_tolerance = scalar(net, "snap_tolerance_m", cfg.snap_tolerance);
  if (!(cfg.snap_tolerance >= 0.0)) throw InputError("config: network.snap_tolerance_m must be >= 0");

  const YAML::Node ras = root["raster"];
  check_known(ras, {"rgb", "tolerance", "dilation_px"}, "raster");
  if (ras) {
    if (ras["rgb"]) {
      auto v = ras["rgb"].as<std::vector<int>>();
      if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](int c) { return c < 0 || c > 255; }))
        throw InputError("config: raster.rgb needs three values in 0..255");
      cfg.raster.rgb = {std::uint8_t(v[0]), std::uint8_t(v[1]), std::uint8_t(v[2])};
    }
    cfg.raster.tolerance = scalar(ras, "tolerance", cfg.raster.tolerance);
    cfg.raster.dilation = scalar(ras, "dilation_px", cfg.raster.dilation);
    if (cfg.raster.tolerance < 0) throw InputError("config: raster.tolerance must be >= 0");
    if (cfg.raster.dilation < 0 || cfg.raster.dilation > 2) throw InputError("config: raster.dilation_px must be 0..2");
  }

  const YAML::Node as = root["assembly"];
  check_known(as, {"buffer_threshold_m", "plant_attach_max_m", "min_service_length_m", "neighbor_k"}, "assembly");
  if (as) {
    cfg.assembly.buffer_threshold = scalar(as, "buffer_threshold_m", cfg.assembly.buffer_threshold);
    cfg.assembly.plant_attach_max = scalar(as, "plant_attach_max_m", cfg.assembly.plant_attach_max);
    cfg.assembly.min_service_length = scalar(as, "min_service_length_m", cfg.assembly.min_service_length);
    cfg.assembly.neighbor_k = scalar(as, "neighbor_k", cfg.assembly.neighbor_k);
  }
  cfg.assembly.validate();

  const YAML::Node census = root["census"];
  check_known(census, {"year_classes"}, "census");
  if (census && census["year_classes"])
    for (const auto& kv : census["year_classes"]) cfg.year_classes[kv.first.as<std::string>()] = kv.second.as<int>();

  const YAML::Node dem = root["demand"];
  check_known(dem, {"calendar_year", "specific_demand", "slp"}, "demand");
  if (dem) {
    cfg.calendar_year = scalar(dem, "calendar_year", cfg.calendar_year);
    if (cfg.calendar_year < 1900 || cfg.calendar_year > 2100) throw InputError("config: demand.calendar_year out of range");
    if (dem["specific_demand"])
      for (const auto& kv : dem["specific_demand"]) {
        const double v = kv.second.as<double>();
        if (!(v >= 0.0)) throw InputError("config: specific demand must be >= 0");
        cfg.specific_demand[kv.first.as<std::string>()] = v;
      }
    if (dem["slp"])
      for (const auto& kv : dem["slp"]) {
        const auto usage = kv.first.as<std::string>();
        SlpParams base = cfg.slp.contains(usage) ? cfg.slp.at(usage) : cfg.slp.at("other");
        cfg.slp[usage] = slp_from(kv.second, base, usage);
      }
  }

  const YAML::Node siz = root["sizing"];
  check_known(siz, {"delta_t_k", "r_max_pa_per_m", "v_max_m_s"}, "sizing");
  if (siz) {
    cfg.sizing.delta_t = scalar(siz, "delta_t_k", cfg.sizing.delta_t);
    cfg.sizing.r_max = scalar(siz, "r_max_pa_per_m", cfg.sizing.r_max);
    cfg.sizing.v_max = scalar(siz, "v_max_m_s", cfg.sizing.v_max);
  }
  if (!(cfg.sizing.delta_t > 0.0) || !(cfg.sizing.r_max > 0.0) || !(cfg.sizing.v_max > 0.0))
    throw InputError("config: sizing limits must be > 0");

  const YAML::Node fl = root["fluid"];
  check_known(fl, {"rho", "cp", "mu"}, "fluid");
  if (fl) {
    cfg.fluid.rho = scalar(fl, "rho", cfg.fluid.rho);
    cfg.fluid.cp = scalar(fl, "cp", cfg.fluid.cp);
    cfg.fluid.mu = scalar(fl, "mu", cfg.fluid.mu);
  }
  if (!(cfg.fluid.rho > 0.0) || !(cfg.fluid.cp > 0.0) || !(cfg.fluid.mu > 0.0))
    throw InputError("config: fluid properties must be > 0");

  const YAML::Node cl = root["cluster"];
  check_known(cl, {"enabled", "k", "max_iter", "tol_m", "restarts", "before_sizing"}, "cluster");
  if (cl) {
    cfg.cluster_enabled = scalar(cl, "enabled", true);
    cfg.cluster.k = scalar(cl, "k", cfg.cluster.k);
    cfg.cluster.max_iter = scalar(cl, "max_iter", cfg.cluster.max_iter);
    cfg.cluster.tol = scalar(cl, "tol_m", cfg.cluster.tol);
    cfg.cluster.restarts = scalar(cl, "restarts", cfg.cluster.restarts);
    cfg.cluster_before_sizing = scalar(cl, "before_sizing", false);
    if (cfg.cluster.k < 1 || cfg.cluster.max_iter < 1 || cfg.cluster.restarts < 1 || !(cfg.cluster.tol >= 0.0))
      throw InputError("config: cluster.k, max_iter and restarts must be >= 1, tol_m >= 0");
  }

  const YAML::Node ren = root["render"];
  check_known(ren, {"w_min_px", "w_max_px"}, "render");
  if (ren) {
    cfg.svg.w_min = scalar(ren, "w_min_px", cfg.svg.w_min);
    cfg.svg.w_max = scalar(ren, "w_max_px", cfg.svg.w_max);
    if (!(cfg.svg.w_min > 0.0) || !(cfg.svg.w_max >= cfg.svg.w_min))
      throw InputError("config: render widths need 0 < w_min_px <= w_max_px");
  }
  return cfg;
}

RunConfig parse_config(std::string_view yaml_text, const fs::path& base_dir) {
  try {
    return parse_config_impl(yaml_text, base_dir);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  const std::string text = read_text_file(path);
  return parse_config(text, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace dhforge
