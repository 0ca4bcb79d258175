#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace spatial_trust::eval {

// Raised when a metric needs both classes and only one is present.
class UndefinedMetric : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RocPoint {
  double threshold;  // predict positive iff score >= threshold
  double tpr;
  double fpr;
};

struct ThresholdMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

struct CoveragePoint {
  double target_accuracy = 0.0;
  double coverage = 0.0;
  double achieved_accuracy = 0.0;  // 0 when nothing is retained
  std::size_t retained = 0;
};

struct EvalReport {
  std::size_t n = 0;
  double auroc = 0.0;
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<CoveragePoint> coverage_curve;
  CoveragePoint coverage_at_60;  // always coverage_at_accuracy(scores, labels, 0.6)
  std::vector<RocPoint> roc;
};

inline constexpr double kHeadlineTargetAccuracy = 0.6;

// Probability that a random positive outranks a random negative; ties count 1/2.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// One point per distinct score, descending threshold, preceded by the reject-all point.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Cut maximizing TPR - FPR. Candidates are midpoints between consecutive
// distinct scores plus the accept-all cut at the minimum score; ties in J go
// to the highest candidate.
double youden_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels);

double harmonic_mean(double a, double b);

ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                   double threshold);

// Largest top-k prefix (score descending, ties in input order) whose accuracy meets target.
CoveragePoint coverage_at_accuracy(std::span<const double> scores, std::span<const std::uint8_t> correct,
                                   double target);

std::vector<CoveragePoint> coverage_curve(std::span<const double> scores,
                                          std::span<const std::uint8_t> correct,
                                          std::span<const double> targets);

// Indices sorted by score descending; equal scores keep input order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

EvalReport build_report(std::span<const double> scores, std::span<const std::uint8_t> labels,
                        double threshold, std::span<const double> targets);

nlohmann::ordered_json report_to_json(const EvalReport& report);
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc);
void write_coverage_csv(const std::string& path, const std::vector<CoveragePoint>& curve);

}  // namespace spatial_trust::eval
