#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spatial_trust/evalkit.hpp"

using namespace spatial_trust::eval;
using doctest::Approx;
using Labels = std::vector<std::uint8_t>;
using Scores = std::vector<double>;

namespace {

// Youden J by enumerating every cut explicitly (predict positive iff score >= cut).
double youden_j(const Scores& s, const Labels& y, double cut) {
  double tp = 0, fp = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (y[i] ? pos : neg) += 1;
    if (s[i] >= cut) (y[i] ? tp : fp) += 1;
  }
  return tp / pos - fp / neg;
}

}  // namespace

TEST_CASE("AUROC examples") {
  CHECK(auroc(Scores{0.9, 0.8, 0.7, 0.1}, Labels{1, 0, 1, 0}) == 0.75);
  CHECK(auroc(Scores{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0}) == 1.0);
  CHECK(auroc(Scores{0.4, 0.4, 0.4, 0.4, 0.4}, Labels{1, 0, 1, 0, 0}) == 0.5);
  CHECK_THROWS_WITH_AS(auroc(Scores{0.1, 0.2}, Labels{1, 1}), doctest::Contains("AUROC undefined"), UndefinedMetric);
  CHECK_THROWS_AS(auroc(Scores{0.1}, Labels{1, 0}), std::invalid_argument);
}

TEST_CASE("AUROC equals pairwise counting") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    Scores s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7) / 7.0;
      y[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(auroc(s, y) == oracle::pairwise_auroc(s, y));
    // Ranking is all that matters.
    Scores squashed(n);
    for (std::size_t i = 0; i < n; ++i) squashed[i] = std::tanh(3 * s[i] - 1);
    CHECK(auroc(squashed, y) == auroc(s, y));
  }
}

TEST_CASE("ROC curve is monotone and ends at (1,1)") {
  const Scores s{0.9, 0.8, 0.8, 0.4, 0.1};
  const Labels y{1, 0, 1, 0, 1};
  const auto roc = roc_curve(s, y);
  REQUIRE(roc.size() == 5);
  CHECK(std::isinf(roc.front().threshold));
  CHECK(roc.front().tpr == 0.0);
  CHECK(roc.back().tpr == 1.0);
  CHECK(roc.back().fpr == 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].threshold < roc[i - 1].threshold);
    CHECK(roc[i].tpr >= roc[i - 1].tpr);
    CHECK(roc[i].fpr >= roc[i - 1].fpr);
  }
}

TEST_CASE("Youden threshold examples") {
  const double t = youden_threshold(Scores{0.9, 0.6, 0.55, 0.2}, Labels{1, 1, 0, 0});
  CHECK(t == Approx(0.575));
  CHECK(youden_j({0.9, 0.6, 0.55, 0.2}, {1, 1, 0, 0}, t) == 1.0);

  // Interleaved ties: J is 0 at every cut, highest candidate wins.
  CHECK(youden_threshold(Scores{0.5, 0.5, 0.4, 0.4}, Labels{1, 0, 1, 0}) == Approx(0.45));
  // A single score value leaves only the accept-all cut.
  CHECK(youden_threshold(Scores{0.3, 0.3, 0.3}, Labels{1, 0, 1}) == 0.3);
}

TEST_CASE("Youden threshold maximizes J over all cuts") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    Scores s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 10) / 10.0;
      y[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    Scores cuts = s;
    std::sort(cuts.begin(), cuts.end());
    double best = -1.0;
    for (double c : cuts) best = std::max(best, youden_j(s, y, c));
    CHECK(youden_j(s, y, youden_threshold(s, y)) == Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("threshold metrics") {
  const Scores s{0.9, 0.6, 0.55, 0.2};
  const Labels y{1, 0, 1, 0};
  const auto m = threshold_metrics(s, y, 0.5);
  CHECK(m.true_positives == 2);
  CHECK(m.false_positives == 1);
  CHECK(m.false_negatives == 0);
  CHECK(m.precision == Approx(2.0 / 3.0));
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == Approx(0.8));

  const auto all = threshold_metrics(s, y, 0.0);
  CHECK(all.recall == 1.0);
  CHECK(all.precision == 0.5);
  const auto none = threshold_metrics(s, y, 0.95);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("coverage at accuracy examples") {
  const Scores s{0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
  const Labels c{1, 1, 0, 1, 0, 0};
  const auto p = coverage_at_accuracy(s, c, 0.66);
  CHECK(p.retained == 4);
  CHECK(p.coverage == Approx(4.0 / 6.0));
  CHECK(p.achieved_accuracy == 0.75);
  CHECK(coverage_at_accuracy(s, c, 0.0).coverage == 1.0);
  CHECK(coverage_at_accuracy(s, Labels(6, 0), 0.1).coverage == 0.0);
  CHECK(coverage_at_accuracy(s, Labels(6, 0), 0.1).achieved_accuracy == 0.0);
  CHECK_THROWS_AS(coverage_at_accuracy(Scores{}, Labels{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(coverage_at_accuracy(s, c, 1.5), std::invalid_argument);
}

TEST_CASE("coverage ties keep input order") {
  // Equal scores: the earlier sample ranks first.
  CHECK(coverage_at_accuracy(Scores{0.5, 0.5}, Labels{1, 0}, 1.0).retained == 1);
  CHECK(coverage_at_accuracy(Scores{0.5, 0.5}, Labels{0, 1}, 1.0).retained == 0);
  CHECK(rank_by_score(Scores{0.1, 0.5, 0.5, 0.9}) == std::vector<std::size_t>{3, 1, 2, 0});
}

TEST_CASE("coverage curve") {
  CHECK(coverage_curve(Scores{0.3}, Labels{1}, Scores{1.0}).front().coverage == 1.0);
  CHECK(coverage_curve(Scores{0.3}, Labels{1}, Scores{}).empty());

  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0, 1);
  const Scores targets{0.5, 0.6, 0.8};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    Scores s(n);
    Labels c(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(u(rng) * 8) / 8;
      c[i] = u(rng) < s[i] ? 1 : 0;
    }
    const auto curve = coverage_curve(s, c, targets);
    for (std::size_t k = 0; k < curve.size(); ++k) {
      const auto want = oracle::prefix_scan(s, c, targets[k]);
      CHECK(curve[k].retained == want.retained);
      CHECK(curve[k].achieved_accuracy == want.accuracy);
      if (k > 0) CHECK(curve[k].coverage <= curve[k - 1].coverage);
    }
  }
}

TEST_CASE("report assembles the metrics") {
  const Scores s{0.9, 0.8, 0.7, 0.1};
  const Labels y{1, 0, 1, 0};
  const Scores targets{0.5, 0.9};
  const EvalReport r = build_report(s, y, 0.5, targets);
  CHECK(r.n == 4);
  CHECK(r.auroc == 0.75);
  CHECK(r.precision == Approx(2.0 / 3.0));
  CHECK(r.coverage_curve.size() == 2);
  CHECK(r.coverage_at_60.coverage == 0.75);
  const auto j = report_to_json(r);
  CHECK(j["auroc"] == 0.75);
  CHECK(j["coverage_curve"].size() == 2);
  CHECK(j["coverage_at_60_unreachable"] == false);
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(1.0, 1.0) == 1.0);
  CHECK(harmonic_mean(0.5, 1.0) == Approx(2.0 / 3.0));
}
