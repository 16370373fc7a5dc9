#include "dhforge/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <stdexcept>

namespace dhforge {

namespace {

constexpr double kSplitSnap = 1e-6;

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Junction: return "junction";
    case NodeKind::Building: return "building";
    case NodeKind::Plant: return "plant";
    case NodeKind::Consumer: return "consumer";
  }
  return "junction";
}

NodeKind node_kind_from_string(std::string_view s) {
  if (s == "junction") return NodeKind::Junction;
  if (s == "building") return NodeKind::Building;
  if (s == "plant") return NodeKind::Plant;
  if (s == "consumer") return NodeKind::Consumer;
  throw std::invalid_argument("unknown node kind '" + std::string(s) + "'");
}

std::string_view to_string(EdgeRole role) { return role == EdgeRole::Main ? "main" : "service"; }

EdgeRole edge_role_from_string(std::string_view s) {
  if (s == "main") return EdgeRole::Main;
  if (s == "service") return EdgeRole::Service;
  throw std::invalid_argument("unknown edge role '" + std::string(s) + "'");
}

const Node& NetworkGraph::add_node(Node node) {
  if (node.id.empty()) throw std::invalid_argument("empty node id");
  if (nodes_.contains(node.id)) throw std::invalid_argument("duplicate node id '" + node.id + "'");
  if (node.attrs.annual_demand && *node.attrs.annual_demand < 0.0)
    throw std::invalid_argument("negative annual demand on node '" + node.id + "'");
  if (node.attrs.construction_year &&
      (*node.attrs.construction_year < 1500 || *node.attrs.construction_year > 2100))
    throw std::invalid_argument("construction year out of range on node '" + node.id + "'");
  adjacency_[node.id];
  auto id = node.id;
  return nodes_.emplace(id, std::move(node)).first->second;
}

EdgeId NetworkGraph::add_edge(const std::string& u, const std::string& v, double length,
                              EdgeRole role, EdgeAttrs attrs) {
  if (u == v) throw std::invalid_argument("self-loop at node '" + u + "'");
  if (!nodes_.contains(u)) throw std::invalid_argument("dangling edge endpoint '" + u + "'");
  if (!nodes_.contains(v)) throw std::invalid_argument("dangling edge endpoint '" + v + "'");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("edge " + u + "-" + v + " needs a positive length");
  if (attrs.inner_diameter && !(*attrs.inner_diameter > 0.0))
    throw std::invalid_argument("edge " + u + "-" + v + " has non-positive diameter");
  if (attrs.nominal_flow && *attrs.nominal_flow < 0.0)
    throw std::invalid_argument("edge " + u + "-" + v + " has negative flow");
  auto k = key(u, v);
  if (pair_index_.contains(k)) throw std::invalid_argument("parallel edge " + u + "-" + v);
  const EdgeId id = next_edge_++;
  edges_.emplace(id, PipeEdge{id, u, v, length, role, std::move(attrs)});
  pair_index_.emplace(std::move(k), id);
  adjacency_[u].insert(id);
  adjacency_[v].insert(id);
  return id;
}

void NetworkGraph::remove_edge(EdgeId id) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw std::invalid_argument("unknown edge " + std::to_string(id));
  adjacency_[it->second.u].erase(id);
  adjacency_[it->second.v].erase(id);
  pair_index_.erase(key(it->second.u, it->second.v));
  edges_.erase(it);
}

void NetworkGraph::remove_node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node '" + id + "'");
  const std::set<EdgeId> incident = adjacency_[id];
  for (EdgeId e : incident) remove_edge(e);
  adjacency_.erase(id);
  nodes_.erase(it);
}

const Node& NetworkGraph::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node '" + id + "'");
  return it->second;
}

NodeAttrs& NetworkGraph::node_attrs(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node '" + id + "'");
  return it->second.attrs;
}

const PipeEdge& NetworkGraph::edge(EdgeId id) const {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw std::invalid_argument("unknown edge " + std::to_string(id));
  return it->second;
}

EdgeAttrs& NetworkGraph::edge_attrs(EdgeId id) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw std::invalid_argument("unknown edge " + std::to_string(id));
  return it->second.attrs;
}

std::optional<EdgeId> NetworkGraph::edge_between(const std::string& u, const std::string& v) const {
  auto it = pair_index_.find(key(u, v));
  if (it == pair_index_.end()) return std::nullopt;
  return it->second;
}

const std::set<EdgeId>& NetworkGraph::incident(const std::string& id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw std::invalid_argument("unknown node '" + id + "'");
  return it->second;
}

double NetworkGraph::total_length() const {
  double sum = 0.0;
  for (const auto& [id, e] : edges_) sum += e.length;
  return sum;
}

std::string NetworkGraph::make_junction_id() {
  char buf[32];
  std::string id;
  do {
    std::snprintf(buf, sizeof buf, "j%07llu", static_cast<unsigned long long>(next_junction_++));
    id = buf;
  } while (nodes_.contains(id));
  return id;
}

void NetworkGraph::set_sequences(std::uint64_t junction_seq, std::uint64_t edge_seq) {
  if (!edges_.empty() && edge_seq <= edges_.rbegin()->first)
    throw std::invalid_argument("edge sequence below existing edge ids");
  next_junction_ = junction_seq;
  next_edge_ = edge_seq;
}

std::vector<std::vector<std::string>> connected_components(const NetworkGraph& g) {
  std::vector<std::vector<std::string>> parts;
  std::set<std::string> seen;
  for (const auto& [id, node] : g.nodes()) {
    if (seen.contains(id)) continue;
    std::vector<std::string> part;
    std::vector<std::string> stack{id};
    seen.insert(id);
    while (!stack.empty()) {
      std::string cur = std::move(stack.back());
      stack.pop_back();
      for (EdgeId e : g.incident(cur)) {
        const std::string& nb = g.edge(e).other(cur);
        if (seen.insert(nb).second) stack.push_back(nb);
      }
      part.push_back(std::move(cur));
    }
    std::sort(part.begin(), part.end());
    parts.push_back(std::move(part));
  }
  return parts;
}

namespace {

struct DijkstraState {
  std::map<std::string, double> dist;
  std::map<std::string, std::string> pred;
};

DijkstraState dijkstra(const NetworkGraph& g, const std::string& src, const std::string* stop) {
  DijkstraState st;
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::set<std::string> done;
  st.dist[src] = 0.0;
  queue.emplace(0.0, src);
  while (!queue.empty()) {
    auto [d, cur] = queue.top();
    queue.pop();
    if (!done.insert(cur).second) continue;
    if (stop && cur == *stop) break;
    for (EdgeId e : g.incident(cur)) {
      const PipeEdge& edge = g.edge(e);
      const std::string& nb = edge.other(cur);
      if (done.contains(nb)) continue;
      const double nd = d + edge.length;
      auto it = st.dist.find(nb);
      if (it == st.dist.end() || nd < it->second) {
        st.dist[nb] = nd;
        st.pred[nb] = cur;
        queue.emplace(nd, nb);
      } else if (nd == it->second && cur < st.pred[nb]) {
        st.pred[nb] = cur;
      }
    }
  }
  return st;
}

}  // namespace

std::optional<Path> shortest_path(const NetworkGraph& g, const std::string& src,
                                  const std::string& dst) {
  if (!g.has_node(src)) throw std::invalid_argument("unknown node '" + src + "'");
  if (!g.has_node(dst)) throw std::invalid_argument("unknown node '" + dst + "'");
  if (src == dst) return Path{{src}, 0.0};
  DijkstraState st = dijkstra(g, src, &dst);
  auto it = st.dist.find(dst);
  if (it == st.dist.end()) return std::nullopt;
  Path path;
  path.length = it->second;
  for (std::string cur = dst;; cur = st.pred.at(cur)) {
    path.nodes.push_back(cur);
    if (cur == src) break;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

std::map<std::string, double> shortest_distances(const NetworkGraph& g, const std::string& src) {
  if (!g.has_node(src)) throw std::invalid_argument("unknown node '" + src + "'");
  return dijkstra(g, src, nullptr).dist;
}

EdgeHit nearest_edge(const NetworkGraph& g, const PlanePoint& p, bool main_only) {
  std::optional<EdgeHit> best;
  for (const auto& [id, e] : g.edges()) {
    if (main_only && e.role != EdgeRole::Main) continue;
    const SegmentProjection sp =
        point_segment_distance(p, g.node(e.u).pos, g.node(e.v).pos);
    if (!best || sp.distance < best->distance) best = EdgeHit{id, sp.distance, sp.foot, sp.t};
  }
  if (!best) throw std::invalid_argument("nearest_edge on a graph without candidate edges");
  return *best;
}

std::string split_edge(NetworkGraph& g, EdgeId edge_id, const PlanePoint& foot) {
  const PipeEdge e = g.edge(edge_id);
  const PlanePoint a = g.node(e.u).pos;
  const PlanePoint b = g.node(e.v).pos;
  if (distance(foot, a) <= kSplitSnap) return e.u;
  if (distance(foot, b) <= kSplitSnap) return e.v;
  const SegmentProjection sp = point_segment_distance(foot, a, b);
  if (sp.distance > kSplitSnap)
    throw std::invalid_argument("split point is not on edge " + e.u + "-" + e.v);
  // Stored length may exceed the chord (contracted edges); split it
  // proportionally so the two halves sum to the original.
  const double first = e.length * sp.t;
  const double second = e.length - first;
  if (!(first > 0.0) || !(second > 0.0)) return sp.t < 0.5 ? e.u : e.v;
  const std::string mid = g.make_junction_id();
  g.add_node(Node{mid, NodeKind::Junction, sp.foot, {}});
  g.remove_edge(edge_id);
  g.add_edge(e.u, mid, first, e.role, e.attrs);
  g.add_edge(mid, e.v, second, e.role, e.attrs);
  return mid;
}

}  // namespace dhforge
