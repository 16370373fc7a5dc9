#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dhforge/geo.hpp"

namespace dhforge {

enum class NodeKind { Junction, Building, Plant, Consumer };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view s);

inline bool is_demand_node(NodeKind kind) {
  return kind == NodeKind::Building || kind == NodeKind::Consumer;
}

struct NodeAttrs {
  std::optional<double> annual_demand;  // kWh/a
  std::optional<double> nominal_load;   // kW
  std::optional<int> construction_year;
  std::optional<std::string> usage_type;
  std::optional<int> member_count;
  std::optional<double> floor_area;  // m²
  std::optional<std::string> block_id;
  std::optional<std::string> name;
  std::optional<double> capacity;  // kW, plants
  std::optional<std::string> plant_type;
  // Annual demand per usage type (kWh/a). The hourly profile of a node is
  // the weighted sum of the per-usage normalized profile shapes.
  std::map<std::string, double> demand_mix;

  bool operator==(const NodeAttrs&) const = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Junction;
  PlanePoint pos;
  NodeAttrs attrs;

  bool operator==(const Node&) const = default;
};

/// Main pipes come from the network source; service pipes connect buildings,
/// consumers and plants to it.
enum class EdgeRole { Main, Service };

std::string_view to_string(EdgeRole role);
EdgeRole edge_role_from_string(std::string_view s);

struct EdgeAttrs {
  std::optional<std::string> dn;
  std::optional<double> inner_diameter;  // m
  std::optional<double> nominal_flow;    // kg/s
  std::optional<std::string> insulation_class;
  bool flagged = false;  // no catalog entry met the sizing limits

  bool operator==(const EdgeAttrs&) const = default;
};

using EdgeId = std::uint64_t;

struct PipeEdge {
  EdgeId id = 0;
  std::string u;
  std::string v;
  double length = 0.0;  // m
  EdgeRole role = EdgeRole::Main;
  EdgeAttrs attrs;

  const std::string& other(const std::string& end) const { return end == u ? v : u; }
};

/// Undirected geometric graph of the heating network. Nodes iterate in id
/// order, edges in insertion order. At most one edge per node pair.
class NetworkGraph {
 public:
  const Node& add_node(Node node);
  EdgeId add_edge(const std::string& u, const std::string& v, double length,
                  EdgeRole role = EdgeRole::Main, EdgeAttrs attrs = {});
  /// Removes the node together with its incident edges.
  void remove_node(const std::string& id);
  void remove_edge(EdgeId id);

  bool has_node(const std::string& id) const { return nodes_.contains(id); }
  const Node& node(const std::string& id) const;
  NodeAttrs& node_attrs(const std::string& id);
  const std::map<std::string, Node>& nodes() const { return nodes_; }

  bool has_edge(EdgeId id) const { return edges_.contains(id); }
  const PipeEdge& edge(EdgeId id) const;
  EdgeAttrs& edge_attrs(EdgeId id);
  const std::map<EdgeId, PipeEdge>& edges() const { return edges_; }
  std::optional<EdgeId> edge_between(const std::string& u, const std::string& v) const;

  const std::set<EdgeId>& incident(const std::string& id) const;
  std::size_t degree(const std::string& id) const { return incident(id).size(); }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  double total_length() const;

  /// Fresh junction id ("j" + zero-padded sequence number).
  std::string make_junction_id();
  std::uint64_t junction_seq() const { return next_junction_; }
  std::uint64_t edge_seq() const { return next_edge_; }
  void set_sequences(std::uint64_t junction_seq, std::uint64_t edge_seq);

 private:
  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  std::map<std::string, Node> nodes_;
  std::map<EdgeId, PipeEdge> edges_;
  std::map<std::string, std::set<EdgeId>> adjacency_;
  std::map<std::pair<std::string, std::string>, EdgeId> pair_index_;
  std::uint64_t next_junction_ = 0;
  std::uint64_t next_edge_ = 0;
};

/// Components sorted by their smallest member id; members sorted.
std::vector<std::vector<std::string>> connected_components(const NetworkGraph& g);

struct Path {
  std::vector<std::string> nodes;
  double length = 0.0;
};

/// Dijkstra by edge length. Among equal-length routes the predecessor with
/// the smaller id wins. Returns nullopt when dst is unreachable.
std::optional<Path> shortest_path(const NetworkGraph& g, const std::string& src,
                                  const std::string& dst);

/// Shortest distances from src to every reachable node.
std::map<std::string, double> shortest_distances(const NetworkGraph& g, const std::string& src);

struct EdgeHit {
  EdgeId edge = 0;
  double distance = 0.0;
  PlanePoint foot;
  double t = 0.0;
};

/// Closest edge to p. Ties go to the earlier-inserted edge. With
/// main_only, service edges are ignored. Throws std::invalid_argument when
/// no candidate edge exists.
EdgeHit nearest_edge(const NetworkGraph& g, const PlanePoint& p, bool main_only = false);

/// Splits the edge at the foot point and returns the id of the junction there.
/// A foot within 1e-6 m of an endpoint returns that endpoint without a split.
std::string split_edge(NetworkGraph& g, EdgeId edge, const PlanePoint& foot);

}  // namespace dhforge
