#include "dhforge/hydro.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "dhforge/errors.hpp"

namespace dhforge {

namespace {

constexpr double kReLaminar = 2300.0;
constexpr double kReTurbulent = 4000.0;

double swamee_jain(double re, double rel_roughness) {
  const double arg = rel_roughness / 3.7 + 5.74 / std::pow(re, 0.9);
  const double lg = std::log10(arg);
  return 0.25 / (lg * lg);
}

}  // namespace

void validate_catalog(const std::vector<PipeCatalogEntry>& catalog) {
  if (catalog.empty()) throw std::invalid_argument("pipe catalog is empty");
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!(catalog[i].inner_diameter > 0.0))
      throw std::invalid_argument("catalog entry " + catalog[i].dn + " has non-positive diameter");
    if (!(catalog[i].roughness_mm >= 0.0))
      throw std::invalid_argument("catalog entry " + catalog[i].dn + " has negative roughness");
    if (i > 0 && !(catalog[i].inner_diameter > catalog[i - 1].inner_diameter))
      throw std::invalid_argument("catalog inner diameters must be strictly increasing");
  }
}

std::vector<PipeCatalogEntry> default_catalog() {
  return {{"DN25", 0.0285, 0.1},  {"DN32", 0.0372, 0.1},  {"DN40", 0.0431, 0.1},
          {"DN50", 0.0545, 0.1},  {"DN65", 0.0703, 0.1},  {"DN80", 0.0825, 0.1},
          {"DN100", 0.1071, 0.1}, {"DN125", 0.1325, 0.1}, {"DN150", 0.1603, 0.1},
          {"DN200", 0.2101, 0.1}, {"DN250", 0.2630, 0.1}, {"DN300", 0.3127, 0.1},
          {"DN350", 0.3444, 0.1}, {"DN400", 0.3938, 0.1}, {"DN450", 0.4446, 0.1},
          {"DN500", 0.4954, 0.1}};
}

double nominal_mass_flow(double q_kw, const SizingConfig& cfg, const FluidProps& fluid) {
  if (!(q_kw >= 0.0)) throw std::invalid_argument("nominal load must be >= 0");
  return q_kw / (fluid.cp * cfg.delta_t);
}

std::map<std::string, double> demand_flows(const NetworkGraph& g, const SizingConfig& cfg,
                                           const FluidProps& fluid) {
  std::map<std::string, double> flows;
  for (const auto& [id, node] : g.nodes()) {
    if (!is_demand_node(node.kind)) continue;
    if (!node.attrs.nominal_load) throw InputError("demand node '" + id + "' has no nominal load");
    flows[id] = nominal_mass_flow(*node.attrs.nominal_load, cfg, fluid);
  }
  return flows;
}

FlowRouting route_flows(const NetworkGraph& g, const std::map<std::string, double>& node_flow) {
  std::vector<std::string> plants;
  for (const auto& [id, node] : g.nodes())
    if (node.kind == NodeKind::Plant) plants.push_back(id);
  if (plants.empty()) throw InfeasibleError("no supply node: the model has no plant");

  // Multi-source Dijkstra; labels order by (distance, plant id).
  struct Label {
    double dist;
    std::string plant;
    std::string pred;
  };
  std::map<std::string, Label> label;
  using Item = std::tuple<double, std::string, std::string>;  // dist, plant, node
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (const auto& p : plants) {
    label[p] = {0.0, p, ""};
    queue.emplace(0.0, p, p);
  }
  std::set<std::string> done;
  std::vector<std::string> settled;
  while (!queue.empty()) {
    auto [d, plant, cur] = queue.top();
    queue.pop();
    if (!done.insert(cur).second) continue;
    settled.push_back(cur);
    for (EdgeId e : g.incident(cur)) {
      const PipeEdge& edge = g.edge(e);
      const std::string& nb = edge.other(cur);
      if (done.contains(nb)) continue;
      const double nd = d + edge.length;
      auto it = label.find(nb);
      if (it == label.end() || nd < it->second.dist ||
          (nd == it->second.dist && plant < it->second.plant)) {
        label[nb] = {nd, plant, cur};
        queue.emplace(nd, plant, nb);
      } else if (nd == it->second.dist && plant == it->second.plant && cur < it->second.pred) {
        it->second.pred = cur;
      }
    }
  }

  std::vector<std::string> unreachable;
  for (const auto& [id, node] : g.nodes())
    if (is_demand_node(node.kind) && !done.contains(id)) unreachable.push_back(id);
  if (!unreachable.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unreachable.size() && i < 20; ++i) list += (i ? ", " : "") + unreachable[i];
    if (unreachable.size() > 20) list += ", ...";
    throw InfeasibleError(std::to_string(unreachable.size()) + " demand node(s) cannot reach a plant: " + list);
  }

  FlowRouting routing;
  for (const auto& [id, e] : g.edges()) routing.edge_flow[id] = 0.0;
  std::map<std::string, double> subtree;
  for (const auto& [id, flow] : node_flow) {
    if (!g.has_node(id)) throw std::invalid_argument("flow given for unknown node '" + id + "'");
    if (!(flow >= 0.0)) throw std::invalid_argument("negative demand flow at '" + id + "'");
    subtree[id] += flow;
  }
  // Settle order is non-decreasing in distance, so walking it backwards
  // visits every child before its parent.
  for (auto it = settled.rbegin(); it != settled.rend(); ++it) {
    const Label& l = label.at(*it);
    routing.plant_of[*it] = l.plant;
    routing.distance[*it] = l.dist;
    if (l.pred.empty()) continue;
    routing.parent[*it] = l.pred;
    const double f = subtree[*it];
    routing.edge_flow[*g.edge_between(*it, l.pred)] += f;
    subtree[l.pred] += f;
  }
  return routing;
}

double friction_factor(double re, double rel_roughness) {
  if (!(re > 0.0)) throw std::invalid_argument("Reynolds number must be positive");
  if (re < kReLaminar) return 64.0 / re;
  if (re >= kReTurbulent) return swamee_jain(re, rel_roughness);
  const double lo = 64.0 / kReLaminar;
  const double hi = swamee_jain(kReTurbulent, rel_roughness);
  return lo + (re - kReLaminar) / (kReTurbulent - kReLaminar) * (hi - lo);
}

HydraulicState pressure_gradient(double m_dot, const PipeCatalogEntry& pipe, const FluidProps& fluid) {
  if (!(m_dot >= 0.0)) throw std::invalid_argument("mass flow must be >= 0");
  HydraulicState s;
  if (m_dot == 0.0) return s;
  const double d = pipe.inner_diameter;
  s.velocity = 4.0 * m_dot / (fluid.rho * std::numbers::pi * d * d);
  s.reynolds = 4.0 * m_dot / (std::numbers::pi * d * fluid.mu);
  s.friction = friction_factor(s.reynolds, pipe.roughness_mm * 1e-3 / d);
  s.gradient = s.friction * fluid.rho * s.velocity * s.velocity / (2.0 * d);
  return s;
}

DiameterChoice select_diameter(double m_dot, const SizingConfig& cfg, const FluidProps& fluid) {
  if (cfg.catalog.empty()) throw std::invalid_argument("pipe catalog is empty");
  for (const auto& entry : cfg.catalog) {
    HydraulicState s = pressure_gradient(m_dot, entry, fluid);
    if (s.gradient <= cfg.r_max && s.velocity <= cfg.v_max) return {entry, s, false};
  }
  const auto& largest = cfg.catalog.back();
  return {largest, pressure_gradient(m_dot, largest, fluid), true};
}

SizingSummary size_network(NetworkGraph& g, const SizingConfig& cfg, const FluidProps& fluid) {
  validate_catalog(cfg.catalog);
  const FlowRouting routing = route_flows(g, demand_flows(g, cfg, fluid));
  SizingSummary summary;
  for (const auto& [id, flow] : routing.edge_flow) {
    const DiameterChoice choice = select_diameter(flow, cfg, fluid);
    EdgeAttrs& attrs = g.edge_attrs(id);
    attrs.dn = choice.entry.dn;
    attrs.inner_diameter = choice.entry.inner_diameter;
    attrs.nominal_flow = flow;
    attrs.flagged = choice.flagged;
    if (choice.flagged) summary.flagged.push_back(id);
    ++summary.sized_edges;
  }
  for (const auto& [id, node] : g.nodes()) {
    if (node.kind != NodeKind::Plant) continue;
    for (EdgeId e : g.incident(id)) summary.plant_outflow += routing.edge_flow.at(e);
  }
  return summary;
}

}  // namespace dhforge
