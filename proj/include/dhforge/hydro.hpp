#pragma once

#include <map>
#include <string>
#include <vector>

#include "dhforge/netgraph.hpp"

namespace dhforge {

/// Water at roughly 85 °C.
struct FluidProps {
  double rho = 960.0;    // kg/m³
  double cp = 4.18;      // kJ/(kg·K)
  double mu = 3.55e-4;   // Pa·s
};

struct PipeCatalogEntry {
  std::string dn;
  double inner_diameter = 0.0;  // m
  double roughness_mm = 0.1;

  bool operator==(const PipeCatalogEntry&) const = default;
};

/// Throws std::invalid_argument unless non-empty with strictly increasing
/// positive inner diameters and non-negative roughness.
void validate_catalog(const std::vector<PipeCatalogEntry>& catalog);

/// Steel DH pipe series DN20..DN500, roughness 0.1 mm.
std::vector<PipeCatalogEntry> default_catalog();

struct SizingConfig {
  double delta_t = 30.0;  // K across the building substation
  double r_max = 250.0;   // Pa/m
  double v_max = 3.0;     // m/s
  std::vector<PipeCatalogEntry> catalog = default_catalog();
};

/// ṁ = q / (cp · ΔT), kg/s for q in kW.
double nominal_mass_flow(double q_kw, const SizingConfig& cfg, const FluidProps& fluid);

/// Nominal mass flow of every Building/Consumer node from its nominal_load.
/// Throws InputError if a demand node has no nominal load.
std::map<std::string, double> demand_flows(const NetworkGraph& g, const SizingConfig& cfg,
                                           const FluidProps& fluid);

struct FlowRouting {
  std::map<EdgeId, double> edge_flow;          // kg/s, every edge present
  std::map<std::string, std::string> parent;   // next node towards the plant
  std::map<std::string, std::string> plant_of; // supplying plant per reached node
  std::map<std::string, double> distance;      // network distance to that plant
};

/// Routes each demand node's flow along its shortest path to the nearest
/// plant (equal distance: smaller plant id; equal routes: smaller
/// predecessor id) and sums flows per edge. Throws InfeasibleError without
/// plants or when a demand node cannot reach any plant.
FlowRouting route_flows(const NetworkGraph& g, const std::map<std::string, double>& node_flow);

/// Darcy friction factor: 64/Re below 2300, Swamee–Jain from 4000, linear
/// blend between.
double friction_factor(double re, double rel_roughness);

struct HydraulicState {
  double velocity = 0.0;  // m/s
  double reynolds = 0.0;
  double friction = 0.0;
  double gradient = 0.0;  // Pa/m
};

HydraulicState pressure_gradient(double m_dot, const PipeCatalogEntry& pipe, const FluidProps& fluid);

struct DiameterChoice {
  PipeCatalogEntry entry;
  HydraulicState state;
  bool flagged = false;  // largest entry still violates a limit
};

/// Smallest entry with gradient <= r_max and velocity <= v_max.
DiameterChoice select_diameter(double m_dot, const SizingConfig& cfg, const FluidProps& fluid);

struct SizingSummary {
  std::size_t sized_edges = 0;
  std::vector<EdgeId> flagged;
  double plant_outflow = 0.0;  // kg/s
};

/// Routes flows and assigns dn, inner_diameter and nominal_flow to every edge.
SizingSummary size_network(NetworkGraph& g, const SizingConfig& cfg, const FluidProps& fluid);

}  // namespace dhforge
