#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dhforge/geo.hpp"
#include "dhforge/netgraph.hpp"

namespace dhforge {

struct SkippedPlant {
  std::string id;
  double distance = 0.0;  // m to the nearest main pipe

  bool operator==(const SkippedPlant&) const = default;
};

/// Things that happened while the model was generated and that the report
/// must be able to reproduce from a stored document.
struct RunEvents {
  std::vector<std::string> stages;  // in execution order
  std::vector<SkippedPlant> skipped_plants;
  std::vector<std::string> warnings;

  bool operator==(const RunEvents&) const = default;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // role -> sha256

  bool operator==(const Provenance&) const = default;
};

/// A generated heating network model plus everything needed to audit it.
struct ModelDocument {
  Projection projection;
  NetworkGraph graph;
  Provenance provenance;
  RunEvents events;
};

}  // namespace dhforge
