#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Counts every (positive, negative) pair directly.
inline double pairwise_auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (auto y : labels) (y ? pos : neg) += 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  pairs = static_cast<double>(pos) * static_cast<double>(neg);
  return wins / pairs;
}

// Scans every prefix of the ranking (score desc, ties by input index) from scratch.
struct PrefixResult {
  std::size_t retained = 0;
  double accuracy = 0.0;
};

inline PrefixResult prefix_scan(const std::vector<double>& scores, const std::vector<std::uint8_t>& correct,
                                double target) {
  std::vector<std::size_t> order;
  std::vector<bool> used(scores.size(), false);
  // selection sort: repeatedly take the highest unused score, lowest index on ties
  for (std::size_t step = 0; step < scores.size(); ++step) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (used[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  PrefixResult r;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    double hits = 0.0;
    for (std::size_t m = 0; m < k; ++m) hits += correct[order[m]] ? 1.0 : 0.0;
    const double acc = hits / static_cast<double>(k);
    if (acc >= target) {
      r.retained = k;
      r.accuracy = acc;
    }
  }
  return r;
}

inline double soft(double g, double a) {
  if (g > a) return g - a;
  if (g < -a) return g + a;
  return 0.0;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double left_weight = 0.0;
  double right_weight = 0.0;
};

// Tries every feature and every midpoint between consecutive distinct values,
// partitioning by direct comparison x < t. Ties (within 1e-12 relative) keep
// the earlier feature / lower threshold.
inline SplitChoice exhaustive_split(const std::vector<std::vector<double>>& x, const std::vector<double>& g,
                                    const std::vector<double>& h, double alpha, double lambda) {
  auto score = [&](double gs, double hs) {
    const double t = soft(gs, alpha);
    return t * t / (hs + lambda);
  };
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  SplitChoice best;
  double best_gain = 1e-12;
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(x[i][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      double gl = 0, hl = 0, gr = 0, hr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i][f] < t) {
          gl += g[i];
          hl += h[i];
        } else {
          gr += g[i];
          hr += h[i];
        }
      }
      const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
      if (gain > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
        best_gain = gain;
        best = {static_cast<int>(f), t, gain, -soft(gl, alpha) / (hl + lambda), -soft(gr, alpha) / (hr + lambda)};
      }
    }
  }
  return best;
}

// -[y log sigma(s) + (1-y) log(1 - sigma(s))] in the form log(1 + e^s) - y s.
inline double logistic_loss(double s, double y) {
  return std::log1p(std::exp(-std::abs(s))) + std::max(s, 0.0) - y * s;
}

inline double central_first(double s, double y, double step) {
  return (logistic_loss(s + step, y) - logistic_loss(s - step, y)) / (2.0 * step);
}

inline double central_second(double s, double y, double step) {
  return (logistic_loss(s + step, y) - 2.0 * logistic_loss(s, y) + logistic_loss(s - step, y)) / (step * step);
}

}  // namespace oracle
