#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dhforge/demand.hpp"
#include "dhforge/netgraph.hpp"

namespace dhforge {

/// Removes pass-through junctions (degree 2) and merges their two pipes
/// into one whose length is the sum. A junction is kept when the two pipes
/// differ in role, diameter, DN, insulation, flow or flag, or when merging
/// would create a parallel edge. Repeats to a fixpoint; returns the number
/// of removed junctions.
std::size_t contract_degree2(NetworkGraph& g);

struct ClusterConfig {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-3;  // m, centroid shift
  int restarts = 1;   // best-of-n by within-cluster sum of squares
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  std::vector<PlanePoint> centroids;
  double wcss = 0.0;
  int iterations = 0;
  std::vector<double> wcss_history;  // after each update step
};

/// Lloyd iterations from k-means++ seeding. Deterministic for a fixed seed;
/// every cluster is non-empty on return. Throws std::invalid_argument when
/// k is 0 or exceeds the number of points.
KMeansResult kmeans(std::span<const PlanePoint> points, const ClusterConfig& cfg);

double within_cluster_ss(std::span<const PlanePoint> points, std::span<const std::size_t> labels,
                         std::span<const PlanePoint> centroids);

struct ClusterAssignment {
  std::map<std::string, std::size_t> cluster_of;  // building node id -> cluster
  std::vector<PlanePoint> centroids;
};

/// k-means over the positions of all Building nodes (sorted by id).
ClusterAssignment cluster_buildings(const NetworkGraph& g, const ClusterConfig& cfg);

std::string consumer_node_id(std::size_t cluster);

struct AggregationSummary {
  std::size_t consumers = 0;
  std::size_t removed_buildings = 0;
};

/// Replaces the buildings of every cluster with one Consumer node at the
/// cluster centroid, attached by a service pipe to the nearest junction.
/// Demand mixes and annual demands are summed, the construction year is the
/// rounded mean, the nominal load is the peak of the summed profile.
AggregationSummary aggregate_clusters(NetworkGraph& g, const ClusterAssignment& assignment,
                                      const ProfileBank& bank, double min_service_length = 1.0);

}  // namespace dhforge
