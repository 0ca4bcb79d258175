#include "spatial_trust/scenegraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "spatial_trust/evalkit.hpp"

namespace spatial_trust::graph {

namespace {

void check_inputs(const std::vector<Sample>& samples, std::span<const double> confidences) {
  if (samples.size() != confidences.size()) {
    throw std::invalid_argument("confidences (" + std::to_string(confidences.size()) + ") and samples (" +
                                std::to_string(samples.size()) + ") differ in length");
  }
  for (double c : confidences) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("edge confidence outside [0,1]");
  }
}

std::vector<std::uint8_t> correctness(const std::vector<Sample>& samples) {
  std::vector<std::uint8_t> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(), [](const Sample& s) { return s.label ? 1 : 0; });
  return out;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(12);
  return out;
}

}  // namespace

std::vector<SceneGraph> build_graphs(const std::vector<Sample>& samples, std::span<const double> confidences,
                                     double tau) {
  check_inputs(samples, confidences);
  std::vector<SceneGraph> graphs;
  std::map<std::string, std::size_t> slot;
  std::vector<std::set<std::string>> vertices;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    auto [it, inserted] = slot.try_emplace(s.image_id, graphs.size());
    if (inserted) {
      graphs.push_back({s.image_id, {}, {}});
      vertices.emplace_back();
    }
    const std::size_t g = it->second;
    vertices[g].insert(s.object_1);
    vertices[g].insert(s.object_2);
    if (confidences[i] >= tau) {
      graphs[g].edges.push_back({s.object_1, s.prediction.relation, s.object_2, confidences[i], s.label});
    }
  }
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    graphs[g].vertices.assign(vertices[g].begin(), vertices[g].end());
  }
  return graphs;
}

std::vector<GraphMetrics> sweep_tau(const std::vector<Sample>& samples, std::span<const double> confidences,
                                    std::span<const double> taus) {
  check_inputs(samples, confidences);
  std::vector<GraphMetrics> rows;
  for (double tau : taus) {
    GraphMetrics m;
    m.tau = tau;
    m.total = samples.size();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (confidences[i] < tau) continue;
      ++m.retained;
      if (samples[i].label) ++hits;
    }
    if (m.retained > 0) m.precision = static_cast<double>(hits) / static_cast<double>(m.retained);
    if (m.total > 0) m.edge_coverage = static_cast<double>(m.retained) / static_cast<double>(m.total);
    m.f1 = eval::harmonic_mean(m.precision, m.edge_coverage);
    rows.push_back(m);
  }
  return rows;
}

std::vector<TargetMetrics> sweep_targets(const std::vector<Sample>& samples, std::span<const double> confidences,
                                         std::span<const double> targets) {
  check_inputs(samples, confidences);
  std::vector<TargetMetrics> rows;
  if (samples.empty()) return rows;
  const std::vector<std::uint8_t> correct = correctness(samples);
  const std::vector<std::size_t> ranked = eval::rank_by_score(confidences);
  for (double target : targets) {
    const eval::CoveragePoint p = eval::coverage_at_accuracy(confidences, correct, target);
    TargetMetrics row;
    row.target_accuracy = target;
    row.tau = p.retained > 0 ? confidences[ranked[p.retained - 1]] : 0.0;
    row.metrics.tau = row.tau;
    row.metrics.total = samples.size();
    row.metrics.retained = p.retained;
    row.metrics.precision = p.achieved_accuracy;
    row.metrics.edge_coverage = p.coverage;
    row.metrics.f1 = eval::harmonic_mean(p.achieved_accuracy, p.coverage);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::ordered_json graphs_to_json(const std::vector<SceneGraph>& graphs) {
  auto out = nlohmann::ordered_json::array();
  for (const SceneGraph& g : graphs) {
    nlohmann::ordered_json jg;
    jg["image_id"] = g.image_id;
    jg["vertices"] = g.vertices;
    auto edges = nlohmann::ordered_json::array();
    for (const Edge& e : g.edges) {
      nlohmann::ordered_json je;
      je["s"] = e.subject;
      je["r"] = to_string(e.relation);
      je["o"] = e.object;
      je["confidence"] = e.confidence;
      je["correct"] = e.correct ? nlohmann::ordered_json(*e.correct) : nlohmann::ordered_json(nullptr);
      edges.push_back(std::move(je));
    }
    jg["edges"] = std::move(edges);
    out.push_back(std::move(jg));
  }
  return out;
}

void write_sweep_csv(const std::string& path, const std::vector<GraphMetrics>& rows) {
  std::ofstream out = open_csv(path);
  out << "tau,precision,coverage,f1,retained,total\n";
  for (const GraphMetrics& m : rows) {
    out << m.tau << ',' << m.precision << ',' << m.edge_coverage << ',' << m.f1 << ',' << m.retained << ','
        << m.total << '\n';
  }
}

void write_targets_csv(const std::string& path, const std::vector<TargetMetrics>& rows) {
  std::ofstream out = open_csv(path);
  out << "target,tau,precision,coverage,f1,retained,total\n";
  for (const TargetMetrics& t : rows) {
    const GraphMetrics& m = t.metrics;
    out << t.target_accuracy << ',' << t.tau << ',' << m.precision << ',' << m.edge_coverage << ',' << m.f1 << ','
        << m.retained << ',' << m.total << '\n';
  }
}

}  // namespace spatial_trust::graph
