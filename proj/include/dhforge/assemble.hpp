#pragma once

#include <cstdint>
#include <vector>

#include "dhforge/ingest.hpp"
#include "dhforge/model.hpp"
#include "dhforge/netgraph.hpp"

namespace dhforge {

struct AssemblyConfig {
  double buffer_threshold = 100.0;  // m
  double plant_attach_max = 200.0;  // m
  std::uint64_t seed = 0;
  double min_service_length = 1.0;  // m
  std::size_t neighbor_k = 5;       // year fallback neighbours

  void validate() const;
};

/// Round half up of p·n, robust against p·n landing a few ulps below .5.
std::size_t proportion_count(double p, std::size_t n);

/// Buildings whose footprint centroid lies within threshold of a network
/// edge, in input order. Throws std::invalid_argument on an edgeless graph.
std::vector<BuildingRecord> filter_by_buffer(const NetworkGraph& g,
                                             const std::vector<BuildingRecord>& buildings,
                                             double threshold);

/// Block of each building by centroid containment (first matching block),
/// -1 when outside every block.
std::vector<long> assign_blocks(const std::vector<BuildingRecord>& buildings,
                                const std::vector<BlockRecord>& blocks);

/// Per block with a known proportion p and n members, round-half-up(p·n)
/// members drawn without replacement from a generator keyed by (seed,
/// block_id). Everything else is connected. Output keeps input order.
std::vector<BuildingRecord> sample_connections(const std::vector<BuildingRecord>& kept,
                                               const std::vector<BlockRecord>& blocks,
                                               const AssemblyConfig& cfg);

std::string building_node_id(const std::string& building_id);
std::string plant_node_id(const std::string& plant_id);

/// Adds the building at its centroid with a service pipe to the nearest
/// point of the main network. Returns the building node id.
std::string attach_building(NetworkGraph& g, const BuildingRecord& b, const AssemblyConfig& cfg = {});

/// Explicit years win, then the census cell of the centroid, then the
/// rounded mean of the k nearest buildings that have a year from either
/// source. Throws InputError when a year is needed and none exists anywhere.
std::vector<BuildingRecord> assign_construction_years(std::vector<BuildingRecord> buildings,
                                                      const std::vector<CensusCell>& cells,
                                                      std::size_t neighbor_k = 5);

struct PlantAttachment {
  std::vector<std::string> attached;  // node ids
  std::vector<SkippedPlant> skipped;
  std::vector<std::string> warnings;
};

PlantAttachment attach_plants(NetworkGraph& g, const std::vector<PlantRecord>& plants,
                              const Projection& proj, const AssemblyConfig& cfg);

}  // namespace dhforge
