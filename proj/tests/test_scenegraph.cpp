#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "spatial_trust/scenegraph.hpp"

using namespace spatial_trust;
using namespace spatial_trust::graph;
using doctest::Approx;

namespace {

std::vector<Sample> samples(std::size_t n, std::mt19937_64& rng, double accuracy) {
  std::uniform_real_distribution<double> u(0, 1);
  const char* names[] = {"cup", "plate", "fork", "lamp"};
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s = fixture::sample("s" + std::to_string(i));
    s.image_id = "img" + std::to_string(i / 3);
    s.object_1 = names[rng() % 4];
    s.object_2 = names[rng() % 4];
    s.label = u(rng) < accuracy;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("graphs group samples by image") {
  std::mt19937_64 rng(1);
  auto data = samples(7, rng, 0.5);
  const std::vector<double> conf(7, 0.5);
  const auto graphs = build_graphs(data, conf, 0.0);
  REQUIRE(graphs.size() == 3);
  CHECK(graphs[0].image_id == "img0");
  CHECK(graphs[0].edges.size() == 3);
  CHECK(graphs[2].edges.size() == 1);
  for (const auto& g : graphs) {
    CHECK(std::is_sorted(g.vertices.begin(), g.vertices.end()));
    CHECK(std::adjacent_find(g.vertices.begin(), g.vertices.end()) == g.vertices.end());
  }
}

TEST_CASE("edge threshold semantics") {
  std::mt19937_64 rng(2);
  auto data = samples(2, rng, 1.0);
  data[0].prediction.relation = Relation::kBelow;
  const std::vector<double> conf{0.7, 0.3};
  const auto graphs = build_graphs(data, conf, 0.5);
  REQUIRE(graphs.size() == 1);
  REQUIRE(graphs[0].edges.size() == 1);
  CHECK(graphs[0].edges[0].subject == data[0].object_1);
  CHECK(graphs[0].edges[0].relation == Relation::kBelow);
  CHECK(graphs[0].edges[0].confidence == 0.7);

  const auto none = build_graphs(data, conf, 0.8);
  CHECK(none[0].edges.empty());
  CHECK_FALSE(none[0].vertices.empty());

  CHECK_THROWS_AS(build_graphs(data, std::vector<double>{0.5}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_graphs(data, std::vector<double>{0.5, 1.2}, 0.5), std::invalid_argument);
}

TEST_CASE("sweep metrics") {
  std::mt19937_64 rng(3);
  auto data = samples(500, rng, 0.7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> conf(data.size());
  for (auto& c : conf) c = u(rng);
  std::vector<double> taus;
  for (int i = 0; i <= 20; ++i) taus.push_back(i / 20.0);
  const auto rows = sweep_tau(data, conf, taus);
  REQUIRE(rows.size() == taus.size());
  CHECK(rows.front().retained == data.size());
  CHECK(rows.front().edge_coverage == 1.0);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].retained <= rows[k - 1].retained);

  // Direct recount at one threshold.
  std::size_t kept = 0, hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (conf[i] >= 0.35) {
      ++kept;
      hits += data[i].label ? 1 : 0;
    }
  }
  CHECK(rows[7].retained == kept);
  CHECK(rows[7].precision == Approx(static_cast<double>(hits) / kept));
  CHECK(rows[7].f1 == Approx(2 * rows[7].precision * rows[7].edge_coverage /
                             (rows[7].precision + rows[7].edge_coverage)));
}

TEST_CASE("perfect confidences") {
  std::mt19937_64 rng(4);
  auto data = samples(200, rng, 0.6);
  std::vector<double> conf;
  double base = 0.0;
  for (const auto& s : data) {
    conf.push_back(s.label ? 1.0 : 0.0);
    base += s.label ? 1.0 : 0.0;
  }
  base /= static_cast<double>(data.size());
  const auto rows = sweep_tau(data, conf, std::vector<double>{0.5});
  CHECK(rows[0].precision == 1.0);
  CHECK(rows[0].edge_coverage == Approx(base));

  for (auto& s : data) s.label = true;
  for (const auto& m : sweep_tau(data, conf, std::vector<double>{0.0, 0.5, 1.0})) {
    if (m.retained > 0) CHECK(m.precision == 1.0);
  }
}

TEST_CASE("target mode picks the coverage prefix") {
  std::mt19937_64 rng(5);
  auto data = samples(300, rng, 0.5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> conf;
  for (const auto& s : data) conf.push_back(std::clamp(u(rng) * 0.6 + (s.label ? 0.4 : 0.0), 0.0, 1.0));
  const std::vector<double> targets{0.5, 0.7, 0.9};
  const auto rows = sweep_targets(data, conf, targets);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    if (r.metrics.retained == 0) continue;
    CHECK(r.metrics.precision >= r.target_accuracy);
    // Thresholding at the reported tau keeps at least the prefix.
    const auto at = sweep_tau(data, conf, std::vector<double>{r.tau});
    CHECK(at[0].retained >= r.metrics.retained);
  }
  CHECK(rows[0].metrics.edge_coverage >= rows[2].metrics.edge_coverage);
  CHECK(sweep_targets({}, std::vector<double>{}, targets).empty());
}

TEST_CASE("graph JSON layout") {
  std::mt19937_64 rng(6);
  auto data = samples(2, rng, 1.0);
  const auto j = graphs_to_json(build_graphs(data, std::vector<double>{0.9, 0.1}, 0.5));
  REQUIRE(j.size() == 1);
  CHECK(j[0]["image_id"] == "img0");
  REQUIRE(j[0]["edges"].size() == 1);
  const auto& e = j[0]["edges"][0];
  CHECK(e["s"] == data[0].object_1);
  CHECK(e["r"] == "left");
  CHECK(e["o"] == data[0].object_2);
  CHECK(e["correct"] == true);
}
