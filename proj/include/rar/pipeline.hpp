#pragma once

#include "rar/inference.hpp"
#include "rar/report.hpp"

#include <optional>

namespace rar {

struct SegmentRequest {
  Family family = Family::PoissonLog;
  /// Fixed K; when absent K is chosen by BIC over [k_min, k_max].
  std::optional<int> k;
  int k_min = 1;
  int k_max = 6;
  std::uint64_t seed = 1;
  SegmentOptions segment;
  GlmOptions glm;
};

struct PipelineResult {
  ReportDocument report;
  Partition partition;
};

/// Steps one to three on a dataset and its adjacency, plus diagnostics.
PipelineResult run_segment_pipeline(const Dataset& data, const AdjacencyMatrix& w,
                                    const SegmentRequest& request);

/// Step three only, on a supplied partition. Moran's I needs `w`.
ReportDocument run_fit_pipeline(const Dataset& data, const Partition& partition, Family family,
                                const AdjacencyMatrix* w = nullptr, const GlmOptions& glm = {});

}  // namespace rar
