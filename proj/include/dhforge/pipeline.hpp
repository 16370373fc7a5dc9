#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dhforge/config.hpp"
#include "dhforge/model.hpp"

namespace dhforge {

/// Called with the appendix-step name ("01_buffer", "02_attach",
/// "03_simplify", "04_cluster") and the model at that step.
using SnapshotSink = std::function<void(std::string_view step, const ModelDocument& doc)>;

/// Network polylines from the raster map and control points in the config.
std::vector<GeoPolyline> extract_from_config(const RunConfig& cfg);

/// Ingest, buffer filter, connection sampling, demand completion,
/// construction years, building and plant attachment, nominal loads and
/// degree-2 contraction.
ModelDocument build_model(const RunConfig& cfg, const SnapshotSink& snapshot = {});

/// Routes nominal flows and assigns pipe diameters.
SizingSummary size_model(ModelDocument& doc, const RunConfig& cfg);

/// Aggregates buildings into cfg.cluster.k consumer nodes. Service pipes of
/// the new consumers are sized when the network already carries diameters.
AggregationSummary cluster_model(ModelDocument& doc, const RunConfig& cfg, const SnapshotSink& snapshot = {});

ProfileBank make_profile_bank(const RunConfig& cfg);

struct PipelineOptions {
  bool snapshots = false;
  bool no_cluster = false;
};

struct PipelineResult {
  ModelDocument doc;
  std::vector<fs::path> written;
};

/// build -> [cluster] -> size -> [cluster] -> render + report, writing
/// model.json, model.geojson, model.svg and report.txt to the output
/// directory.
PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& options);

void write_text(const fs::path& path, std::string_view text);
ModelDocument read_model(const fs::path& path);

/// Writes snapshots/<step>.json below dir.
SnapshotSink snapshot_writer(const fs::path& dir);

}  // namespace dhforge
