#include "spatial_trust/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace spatial_trust::eval {

namespace {

void check_aligned(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
}

struct ScoreGroup {
  double score;
  std::size_t positives;
  std::size_t negatives;
};

// Distinct scores in descending order with per-score class counts.
std::vector<ScoreGroup> group_descending(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<ScoreGroup> groups;
  for (std::size_t i : idx) {
    if (groups.empty() || groups.back().score != scores[i]) groups.push_back({scores[i], 0, 0});
    (labels[i] ? groups.back().positives : groups.back().negatives) += 1;
  }
  return groups;
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const std::uint8_t> labels, const char* metric) {
  const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto y) { return y != 0; }));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetric(std::string(metric) + " undefined: both classes are required");
  return {pos, neg};
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(12);
  return out;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_aligned(scores, labels);
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("AUROC undefined for NaN scores");
  }
  const auto [pos, neg] = class_counts(labels, "AUROC");
  // Twice the Mann-Whitney U, kept integral so ties stay exact.
  std::uint64_t u2 = 0;
  std::uint64_t negatives_below = static_cast<std::uint64_t>(neg);
  for (const ScoreGroup& g : group_descending(scores, labels)) {
    negatives_below -= g.negatives;
    u2 += 2 * g.positives * negatives_below + g.positives * g.negatives;
  }
  return (static_cast<double>(u2) / 2.0) / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_aligned(scores, labels);
  const auto [pos, neg] = class_counts(labels, "ROC");
  std::vector<RocPoint> roc{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const ScoreGroup& g : group_descending(scores, labels)) {
    tp += g.positives;
    fp += g.negatives;
    roc.push_back({g.score, static_cast<double>(tp) / static_cast<double>(pos),
                   static_cast<double>(fp) / static_cast<double>(neg)});
  }
  return roc;
}

double youden_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_aligned(scores, labels);
  const auto [pos, neg] = class_counts(labels, "Youden threshold");
  const std::vector<ScoreGroup> groups = group_descending(scores, labels);

  // J * pos * neg = tp * neg - fp * pos, compared in integers.
  auto scaled_j = [&](std::size_t tp, std::size_t fp) {
    return static_cast<long double>(tp) * static_cast<long double>(neg) -
           static_cast<long double>(fp) * static_cast<long double>(pos);
  };

  // Candidates run from the highest threshold down, so strict > keeps the highest tie.
  double best_threshold = 0.0;
  long double best_j = -std::numeric_limits<long double>::infinity();
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
    tp += groups[i].positives;
    fp += groups[i].negatives;
    if (const long double j = scaled_j(tp, fp); j > best_j) {
      best_j = j;
      best_threshold = groups[i].score + (groups[i + 1].score - groups[i].score) / 2.0;
    }
  }
  // Accept-all cut at the minimum score: J = 0.
  if (0.0L > best_j) best_threshold = groups.back().score;
  return best_threshold;
}

double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                   double threshold) {
  check_aligned(scores, labels);
  ThresholdMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted && labels[i]) ++m.true_positives;
    if (predicted && !labels[i]) ++m.false_positives;
    if (!predicted && labels[i]) ++m.false_negatives;
  }
  const auto tp = static_cast<double>(m.true_positives);
  if (m.true_positives + m.false_positives > 0) m.precision = tp / static_cast<double>(m.true_positives + m.false_positives);
  if (m.true_positives + m.false_negatives > 0) m.recall = tp / static_cast<double>(m.true_positives + m.false_negatives);
  m.f1 = harmonic_mean(m.precision, m.recall);
  return m;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

CoveragePoint coverage_at_accuracy(std::span<const double> scores, std::span<const std::uint8_t> correct,
                                   double target) {
  check_aligned(scores, correct);
  if (scores.empty()) throw std::invalid_argument("coverage needs at least one prediction");
  if (!(target >= 0.0 && target <= 1.0)) throw std::invalid_argument("target accuracy must lie in [0,1]");
  CoveragePoint p;
  p.target_accuracy = target;
  std::size_t hits = 0;
  std::size_t k = 0;
  for (std::size_t i : rank_by_score(scores)) {
    ++k;
    if (correct[i]) ++hits;
    const double acc = static_cast<double>(hits) / static_cast<double>(k);
    if (acc >= target) {
      p.retained = k;
      p.achieved_accuracy = acc;
    }
  }
  p.coverage = static_cast<double>(p.retained) / static_cast<double>(scores.size());
  return p;
}

std::vector<CoveragePoint> coverage_curve(std::span<const double> scores, std::span<const std::uint8_t> correct,
                                          std::span<const double> targets) {
  std::vector<CoveragePoint> out;
  out.reserve(targets.size());
  for (double t : targets) out.push_back(coverage_at_accuracy(scores, correct, t));
  return out;
}

EvalReport build_report(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold,
                        std::span<const double> targets) {
  EvalReport r;
  r.n = scores.size();
  r.auroc = auroc(scores, labels);
  r.roc = roc_curve(scores, labels);
  r.threshold = threshold;
  const ThresholdMetrics m = threshold_metrics(scores, labels, threshold);
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.coverage_curve = coverage_curve(scores, labels, targets);
  r.coverage_at_60 = coverage_at_accuracy(scores, labels, kHeadlineTargetAccuracy);
  return r;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["auroc"] = report.auroc;
  j["threshold"] = report.threshold;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["coverage_at_60"] = report.coverage_at_60.coverage;
  // No ranked prefix reaches the bar.
  j["coverage_at_60_unreachable"] = report.coverage_at_60.retained == 0;
  auto curve = nlohmann::ordered_json::array();
  for (const CoveragePoint& p : report.coverage_curve) {
    nlohmann::ordered_json jp;
    jp["target"] = p.target_accuracy;
    jp["coverage"] = p.coverage;
    jp["achieved_accuracy"] = p.achieved_accuracy;
    jp["retained"] = p.retained;
    curve.push_back(std::move(jp));
  }
  j["coverage_curve"] = std::move(curve);
  return j;
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc) {
  std::ofstream out = open_csv(path);
  out << "threshold,tpr,fpr\n";
  for (const RocPoint& p : roc) out << p.threshold << ',' << p.tpr << ',' << p.fpr << '\n';
}

void write_coverage_csv(const std::string& path, const std::vector<CoveragePoint>& curve) {
  std::ofstream out = open_csv(path);
  out << "target,coverage,achieved_accuracy,retained\n";
  for (const CoveragePoint& p : curve) {
    out << p.target_accuracy << ',' << p.coverage << ',' << p.achieved_accuracy << ',' << p.retained << '\n';
  }
}

}  // namespace spatial_trust::eval
