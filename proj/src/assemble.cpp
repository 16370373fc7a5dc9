#include "dhforge/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "dhforge/errors.hpp"
#include "dhforge/rng.hpp"

namespace dhforge {

namespace {

PlanePoint centroid_of(const BuildingRecord& b) { return polygon_centroid_area(b.footprint).centroid; }

long long round_half_up(double v) { return static_cast<long long>(std::floor(v + 0.5)); }

}  // namespace

void AssemblyConfig::validate() const {
  if (!(buffer_threshold > 0.0)) throw InputError("buffer threshold must be > 0");
  if (!(plant_attach_max > 0.0)) throw InputError("plant attach distance must be > 0");
  if (!(min_service_length > 0.0)) throw InputError("minimum service length must be > 0");
  if (neighbor_k == 0) throw InputError("neighbour count must be >= 1");
}

std::size_t proportion_count(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("proportion outside [0, 1]");
  const double exact = p * static_cast<double>(n);
  const auto k = static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9 * std::max(1.0, exact)));
  return std::min(k, n);
}

std::vector<BuildingRecord> filter_by_buffer(const NetworkGraph& g,
                                             const std::vector<BuildingRecord>& buildings,
                                             double threshold) {
  if (g.edge_count() == 0) throw std::invalid_argument("buffer filter needs a network with edges");
  std::vector<BuildingRecord> kept;
  for (const auto& b : buildings) {
    if (nearest_edge(g, centroid_of(b)).distance <= threshold) kept.push_back(b);
  }
  return kept;
}

std::vector<long> assign_blocks(const std::vector<BuildingRecord>& buildings,
                                const std::vector<BlockRecord>& blocks) {
  std::vector<long> out(buildings.size(), -1);
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    const PlanePoint c = centroid_of(buildings[i]);
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      if (contains(blocks[j].polygon, c)) {
        out[i] = static_cast<long>(j);
        break;
      }
    }
  }
  return out;
}

std::vector<BuildingRecord> sample_connections(const std::vector<BuildingRecord>& kept,
                                               const std::vector<BlockRecord>& blocks,
                                               const AssemblyConfig& cfg) {
  const std::vector<long> block_of = assign_blocks(kept, blocks);
  std::vector<bool> selected(kept.size(), true);
  std::map<long, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (block_of[i] >= 0 && blocks[block_of[i]].connection_proportion) members[block_of[i]].push_back(i);

  for (auto& [block, idx] : members) {
    const BlockRecord& blk = blocks[block];
    // Draw over members sorted by building id so input order is irrelevant.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return kept[a].id < kept[b].id; });
    const std::size_t n = idx.size();
    const std::size_t k = proportion_count(*blk.connection_proportion, n);
    CounterRng rng(cfg.seed, "block:" + blk.block_id);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(n - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = k; i < n; ++i) selected[idx[i]] = false;
  }

  std::vector<BuildingRecord> out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!selected[i]) continue;
    out.push_back(kept[i]);
    if (!out.back().block_id && block_of[i] >= 0) out.back().block_id = blocks[block_of[i]].block_id;
  }
  return out;
}

std::string building_node_id(const std::string& building_id) { return "b:" + building_id; }
std::string plant_node_id(const std::string& plant_id) { return "p:" + plant_id; }

std::string attach_building(NetworkGraph& g, const BuildingRecord& b, const AssemblyConfig& cfg) {
  const PlanePoint c = centroid_of(b);
  const EdgeHit hit = nearest_edge(g, c, true);
  Node node{building_node_id(b.id), NodeKind::Building, c, {}};
  node.attrs.usage_type = std::string(to_string(b.usage));
  node.attrs.floor_area = b.floor_area;
  node.attrs.annual_demand = b.annual_demand;
  node.attrs.block_id = b.block_id;
  node.attrs.construction_year = b.construction_year;
  if (b.annual_demand) node.attrs.demand_mix[*node.attrs.usage_type] = *b.annual_demand;
  g.add_node(std::move(node));
  const std::string junction = split_edge(g, hit.edge, hit.foot);
  const double len = std::max(distance(c, g.node(junction).pos), cfg.min_service_length);
  g.add_edge(building_node_id(b.id), junction, len, EdgeRole::Service);
  return building_node_id(b.id);
}

std::vector<BuildingRecord> assign_construction_years(std::vector<BuildingRecord> buildings,
                                                      const std::vector<CensusCell>& cells,
                                                      std::size_t neighbor_k) {
  if (neighbor_k == 0) throw std::invalid_argument("neighbour count must be >= 1");
  std::map<std::pair<long, long>, int> grid;
  for (const auto& c : cells) grid[{c.grid_x, c.grid_y}] = c.construction_year;

  std::vector<PlanePoint> centroids;
  std::vector<std::size_t> missing;
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    auto& b = buildings[i];
    centroids.push_back(centroid_of(b));
    if (!b.construction_year) {
      const auto gx = static_cast<long>(std::floor(centroids[i].x / 100.0));
      const auto gy = static_cast<long>(std::floor(centroids[i].y / 100.0));
      if (auto it = grid.find({gx, gy}); it != grid.end()) b.construction_year = it->second;
    }
    (b.construction_year ? known : missing).push_back(i);
  }
  if (missing.empty()) return buildings;
  if (known.empty()) throw InputError("no construction year available for any building");

  std::vector<int> fill(missing.size());
  for (std::size_t m = 0; m < missing.size(); ++m) {
    const PlanePoint& c = centroids[missing[m]];
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(known.size());
    for (std::size_t i : known) cand.emplace_back(distance(c, centroids[i]), i);
    const std::size_t k = std::min(neighbor_k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end(),
                      [&](const auto& a, const auto& b) {
                        return a.first < b.first ||
                               (a.first == b.first && buildings[a.second].id < buildings[b.second].id);
                      });
    long sum = 0;
    for (std::size_t j = 0; j < k; ++j) sum += *buildings[cand[j].second].construction_year;
    fill[m] = static_cast<int>(round_half_up(static_cast<double>(sum) / static_cast<double>(k)));
  }
  for (std::size_t m = 0; m < missing.size(); ++m) buildings[missing[m]].construction_year = fill[m];
  return buildings;
}

PlantAttachment attach_plants(NetworkGraph& g, const std::vector<PlantRecord>& plants,
                              const Projection& proj, const AssemblyConfig& cfg) {
  PlantAttachment result;
  if (plants.empty()) {
    result.warnings.push_back("no plants given; the model has no supply node and cannot be sized");
    return result;
  }
  for (const auto& plant : plants) {
    const PlanePoint pos = proj.project(plant.pos);
    const EdgeHit hit = nearest_edge(g, pos, true);
    if (hit.distance > cfg.plant_attach_max) {
      result.skipped.push_back({plant.id, hit.distance});
      continue;
    }
    Node node{plant_node_id(plant.id), NodeKind::Plant, pos, {}};
    node.attrs.name = plant.name;
    node.attrs.capacity = plant.capacity;
    node.attrs.plant_type = plant.plant_type;
    g.add_node(std::move(node));
    const std::string junction = split_edge(g, hit.edge, hit.foot);
    const double len = std::max(distance(pos, g.node(junction).pos), cfg.min_service_length);
    g.add_edge(plant_node_id(plant.id), junction, len, EdgeRole::Service);
    result.attached.push_back(plant_node_id(plant.id));
  }
  if (result.attached.empty())
    result.warnings.push_back("no plant lies within reach of the network; the model cannot be sized");
  return result;
}

}  // namespace dhforge
