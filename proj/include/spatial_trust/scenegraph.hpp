#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatial_trust/records.hpp"

namespace spatial_trust::graph {

struct Edge {
  std::string subject;
  Relation relation = Relation::kLeft;
  std::string object;
  double confidence = 0.0;
  std::optional<bool> correct;
};

struct SceneGraph {
  std::string image_id;
  std::vector<std::string> vertices;  // sorted, unique
  std::vector<Edge> edges;
};

struct GraphMetrics {
  double tau = 0.0;
  double precision = 0.0;
  double edge_coverage = 0.0;
  double f1 = 0.0;
  std::size_t retained = 0;
  std::size_t total = 0;
};

// Operating point chosen by accuracy target instead of a fixed tau.
struct TargetMetrics {
  double target_accuracy = 0.0;
  double tau = 0.0;  // confidence of the lowest retained edge; 0 if none
  GraphMetrics metrics;
};

// One graph per distinct image_id in first-appearance order. Edges carry the
// VLM's predicted relation and are kept iff confidence >= tau.
std::vector<SceneGraph> build_graphs(const std::vector<Sample>& samples, std::span<const double> confidences,
                                     double tau);

std::vector<GraphMetrics> sweep_tau(const std::vector<Sample>& samples, std::span<const double> confidences,
                                    std::span<const double> taus);

std::vector<TargetMetrics> sweep_targets(const std::vector<Sample>& samples,
                                         std::span<const double> confidences,
                                         std::span<const double> targets);

nlohmann::ordered_json graphs_to_json(const std::vector<SceneGraph>& graphs);
void write_sweep_csv(const std::string& path, const std::vector<GraphMetrics>& rows);
void write_targets_csv(const std::string& path, const std::vector<TargetMetrics>& rows);

}  // namespace spatial_trust::graph
