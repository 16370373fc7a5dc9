#include "dhforge/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "dhforge/errors.hpp"
#include "dhforge/rng.hpp"

namespace dhforge {

namespace {

double sq_dist(const PlanePoint& a, const PlanePoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

bool mergeable(const PipeEdge& a, const PipeEdge& b) { return a.role == b.role && a.attrs == b.attrs; }

std::vector<PlanePoint> seed_centroids(std::span<const PlanePoint> points, std::size_t k, CounterRng& rng) {
  const std::size_t n = points.size();
  std::vector<PlanePoint> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > u) {
          pick = i;
          break;
        }
      }
      if (pick == n)  // rounding at the tail
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      // Remaining points coincide with chosen centres.
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
  }
  return centers;
}

// Returns true when any label changed.
bool assign_nearest(std::span<const PlanePoint> points, const std::vector<PlanePoint>& centroids,
                    std::vector<std::size_t>& labels) {
  bool changed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = sq_dist(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (labels[i] != best) {
      labels[i] = best;
      changed = true;
    }
  }
  return changed;
}

// Moves the farthest point of the largest cluster into each empty cluster.
bool repair_empty(std::span<const PlanePoint> points, std::vector<PlanePoint>& centroids,
                  std::vector<std::size_t>& labels) {
  const std::size_t k = centroids.size();
  bool repaired = false;
  for (;;) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t l : labels) ++sizes[l];
    auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) return repaired;
    const std::size_t target = static_cast<std::size_t>(empty - sizes.begin());
    const std::size_t largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (labels[i] != largest) continue;
      const double d = sq_dist(points[i], centroids[largest]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    labels[far] = target;
    centroids[target] = points[far];
    repaired = true;
  }
}

double update_centroids(std::span<const PlanePoint> points, const std::vector<std::size_t>& labels,
                        std::vector<PlanePoint>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<double> sx(k, 0.0), sy(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sx[labels[i]] += points[i].x;
    sy[labels[i]] += points[i].y;
    ++count[labels[i]];
  }
  double shift = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    const PlanePoint next{sx[c] / static_cast<double>(count[c]), sy[c] / static_cast<double>(count[c])};
    shift = std::max(shift, distance(next, centroids[c]));
    centroids[c] = next;
  }
  return shift;
}

KMeansResult kmeans_once(std::span<const PlanePoint> points, const ClusterConfig& cfg, std::uint64_t stream) {
  CounterRng rng(cfg.seed, stream);
  KMeansResult r;
  r.centroids = seed_centroids(points, cfg.k, rng);
  r.labels.assign(points.size(), cfg.k);  // sentinel: forces the first pass to count as a change
  for (r.iterations = 1; r.iterations <= cfg.max_iter; ++r.iterations) {
    bool changed = assign_nearest(points, r.centroids, r.labels);
    changed = repair_empty(points, r.centroids, r.labels) || changed;
    const double shift = update_centroids(points, r.labels, r.centroids);
    r.wcss_history.push_back(within_cluster_ss(points, r.labels, r.centroids));
    if (!changed || shift < cfg.tol) break;
  }
  r.iterations = std::min(r.iterations, cfg.max_iter);
  r.wcss = within_cluster_ss(points, r.labels, r.centroids);
  return r;
}

}  // namespace

std::size_t contract_degree2(NetworkGraph& g) {
  std::size_t removed = 0;
  for (bool progress = true; progress;) {
    progress = false;
    std::vector<std::string> candidates;
    for (const auto& [id, node] : g.nodes())
      if (node.kind == NodeKind::Junction && g.degree(id) == 2) candidates.push_back(id);
    for (const auto& id : candidates) {
      if (!g.has_node(id) || g.degree(id) != 2) continue;
      const auto& inc = g.incident(id);
      const PipeEdge a = g.edge(*inc.begin());
      const PipeEdge b = g.edge(*std::next(inc.begin()));
      if (!mergeable(a, b)) continue;
      const std::string& left = a.other(id);
      const std::string& right = b.other(id);
      if (left == right || g.edge_between(left, right)) continue;
      g.remove_node(id);
      g.add_edge(left, right, a.length + b.length, a.role, a.attrs);
      ++removed;
      progress = true;
    }
  }
  return removed;
}

double within_cluster_ss(std::span<const PlanePoint> points, std::span<const std::size_t> labels,
                         std::span<const PlanePoint> centroids) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) sum += sq_dist(points[i], centroids[labels[i]]);
  return sum;
}

KMeansResult kmeans(std::span<const PlanePoint> points, const ClusterConfig& cfg) {
  if (cfg.k == 0) throw std::invalid_argument("k-means needs k >= 1");
  if (cfg.k > points.size())
    throw std::invalid_argument("k-means with k = " + std::to_string(cfg.k) + " exceeds " +
                                std::to_string(points.size()) + " points");
  if (cfg.max_iter < 1) throw std::invalid_argument("k-means needs max_iter >= 1");
  KMeansResult best;
  for (int run = 0; run < std::max(cfg.restarts, 1); ++run) {
    KMeansResult r = kmeans_once(points, cfg, static_cast<std::uint64_t>(run));
    if (run == 0 || r.wcss < best.wcss) best = std::move(r);
  }
  return best;
}

ClusterAssignment cluster_buildings(const NetworkGraph& g, const ClusterConfig& cfg) {
  std::vector<std::string> ids;
  std::vector<PlanePoint> points;
  for (const auto& [id, node] : g.nodes()) {
    if (node.kind != NodeKind::Building) continue;
    ids.push_back(id);
    points.push_back(node.pos);
  }
  const KMeansResult r = kmeans(points, cfg);
  ClusterAssignment out;
  out.centroids = r.centroids;
  for (std::size_t i = 0; i < ids.size(); ++i) out.cluster_of[ids[i]] = r.labels[i];
  return out;
}

std::string consumer_node_id(std::size_t cluster) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%06zu", cluster);
  return buf;
}

AggregationSummary aggregate_clusters(NetworkGraph& g, const ClusterAssignment& assignment,
                                      const ProfileBank& bank, double min_service_length) {
  const std::size_t k = assignment.centroids.size();
  std::vector<std::vector<std::string>> members(k);
  std::size_t buildings = 0;
  for (const auto& [id, node] : g.nodes()) {
    if (node.kind != NodeKind::Building) continue;
    ++buildings;
    auto it = assignment.cluster_of.find(id);
    if (it == assignment.cluster_of.end()) throw std::invalid_argument("building '" + id + "' has no cluster");
    if (it->second >= k) throw std::invalid_argument("building '" + id + "' has an invalid cluster index");
    members[it->second].push_back(id);
  }
  if (buildings != assignment.cluster_of.size())
    throw std::invalid_argument("cluster assignment covers nodes that are not buildings");
  for (std::size_t c = 0; c < k; ++c)
    if (members[c].empty()) throw std::invalid_argument("cluster " + std::to_string(c) + " is empty");

  std::vector<Node> consumers;
  for (std::size_t c = 0; c < k; ++c) {
    Node node{consumer_node_id(c), NodeKind::Consumer, assignment.centroids[c], {}};
    double annual = 0.0;
    long year_sum = 0;
    std::size_t year_count = 0;
    for (const auto& id : members[c]) {
      const NodeAttrs& a = g.node(id).attrs;
      if (a.demand_mix.empty() && a.annual_demand.value_or(0.0) > 0.0)
        throw InputError("building '" + id + "' has demand but no demand mix");
      for (const auto& [usage, kwh] : a.demand_mix) node.attrs.demand_mix[usage] += kwh;
      annual += a.annual_demand.value_or(0.0);
      if (a.construction_year) {
        year_sum += *a.construction_year;
        ++year_count;
      }
    }
    node.attrs.annual_demand = annual;
    if (year_count > 0)
      node.attrs.construction_year =
          static_cast<int>(std::floor(static_cast<double>(year_sum) / static_cast<double>(year_count) + 0.5));
    node.attrs.nominal_load = node.attrs.demand_mix.empty() ? 0.0 : bank.peak(node.attrs.demand_mix);
    node.attrs.member_count = static_cast<int>(members[c].size());
    if (members[c].size() == 1) {
      const NodeAttrs& a = g.node(members[c].front()).attrs;
      node.attrs.usage_type = a.usage_type;
      node.attrs.floor_area = a.floor_area;
      node.attrs.block_id = a.block_id;
    }
    consumers.push_back(std::move(node));
  }

  for (const auto& group : members)
    for (const auto& id : group) g.remove_node(id);

  std::vector<std::pair<std::string, PlanePoint>> junctions;
  for (const auto& [id, node] : g.nodes())
    if (node.kind == NodeKind::Junction && g.degree(id) > 0) junctions.emplace_back(id, node.pos);
  if (junctions.empty()) throw InfeasibleError("no network junction left to attach consumers to");

  for (auto& node : consumers) {
    const std::string* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [id, pos] : junctions) {
      const double d = distance(node.pos, pos);
      if (d < best_d) {
        best_d = d;
        best = &id;
      }
    }
    const std::string id = node.id;
    g.add_node(std::move(node));
    g.add_edge(id, *best, std::max(best_d, min_service_length), EdgeRole::Service);
  }
  return {k, buildings};
}

}  // namespace dhforge
