#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "cdbench/graphgen.hpp"
#include "testutil.hpp"

using namespace cdbench;

namespace {

GraphConfig make_cfg(GraphKind kind, int d) {
  GraphConfig cfg;
  cfg.kind = kind;
  cfg.d = d;
  return cfg;
}

int out_degree(const Dag& g, int i) {
  int deg = 0;
  for (int j = 0; j < g.d; ++j) deg += g.edge(i, j) ? 1 : 0;
  return deg;
}

// Undirected connectivity of the skeleton.
bool skeleton_connected(const Dag& g) {
  std::vector<int> stack{0};
  std::vector<char> seen(g.d, 0);
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u = 0; u < g.d; ++u) {
      if (seen[u] || (!g.edge(v, u) && !g.edge(u, v))) continue;
      seen[u] = 1;
      ++reached;
      stack.push_back(u);
    }
  }
  return reached == g.d;
}

}  // namespace

TEST_CASE("er with p=1 yields the complete dag", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Er, 5);
  cfg.er_p = 1.0;
  std::mt19937_64 rng(1);
  Dag g = sample_er(cfg, rng);
  CHECK(g.edge_count() == 10);
  CHECK(is_acyclic(g));
}

TEST_CASE("5-node sparse er draws are resampled up to two edges", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Er, 5);
  cfg.er_p = 0.1;
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 300; ++rep) CHECK(sample_er(cfg, rng).edge_count() >= 2);
}

TEST_CASE("er edge count matches its binomial mean", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Er, 10);
  cfg.er_m = 1;  // expected edges = d*m = 10, p = 10/45
  std::mt19937_64 rng(3);
  double total = 0.0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) total += sample_er(cfg, rng).edge_count();
  const double mean = total / reps;
  CHECK(mean > 8.0);
  CHECK(mean < 12.0);
  // 3 standard errors of Binomial(45, 2/9) over 1000 draws
  const double p = 10.0 / 45.0;
  const double se = std::sqrt(45.0 * p * (1.0 - p) / reps);
  CHECK(std::abs(mean - 10.0) < 3.0 * se);
}

TEST_CASE("scale-free with m=1 is a spanning tree", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Sf, 10);
  cfg.er_m = 1;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    Dag g = sample_sf(cfg, rng);
    CHECK(g.edge_count() == 9);
    CHECK(skeleton_connected(g));
    CHECK(is_acyclic(g));
  }
}

TEST_CASE("scale-free attachment produces hubs", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Sf, 20);
  cfg.er_m = 4;
  int max_deg = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    Dag g = sample_sf(cfg, rng);
    for (int i = 0; i < g.d; ++i) max_deg = std::max(max_deg, out_degree(g, i));
  }
  CHECK(max_deg > 8);  // well beyond 2*m
}

TEST_CASE("grp extremes: full within-cluster, none across", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Grp, 20);
  cfg.grp_p_in = 1.0;
  cfg.grp_p_out = 0.0;
  std::mt19937_64 rng(3);
  std::vector<int> cluster;
  Dag g = sample_grp(cfg, rng, &cluster);
  REQUIRE(cluster.size() == 20);
  for (int a = 0; a < 20; ++a)
    for (int b = a + 1; b < 20; ++b) {
      const bool linked = g.edge(a, b) || g.edge(b, a);
      CHECK(linked == (cluster[a] == cluster[b]));
    }

  cfg.grp_p_in = 0.0;
  Dag none = sample_grp(cfg, rng);
  CHECK(none.edge_count() == 0);
}

TEST_CASE("grp concentrates edges within clusters", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Grp, 20);
  cfg.grp_p_in = 0.4;
  cfg.grp_p_out = 0.05;
  double within = 0, cross = 0, within_pairs = 0, cross_pairs = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> cluster;
    Dag g = sample_grp(cfg, rng, &cluster);
    for (int a = 0; a < 20; ++a)
      for (int b = a + 1; b < 20; ++b) {
        const bool linked = g.edge(a, b) || g.edge(b, a);
        if (cluster[a] == cluster[b]) {
          within_pairs += 1;
          within += linked;
        } else {
          cross_pairs += 1;
          cross += linked;
        }
      }
  }
  CHECK(within / within_pairs > cross / cross_pairs);
}

TEST_CASE("fully connected dag admits exactly one order", "[graphgen]") {
  std::mt19937_64 rng(5);
  CHECK(fully_connected(3, rng).edge_count() == 3);
  CHECK(fully_connected(20, rng).edge_count() == 190);
  Dag g = fully_connected(6, rng);
  // complete comparability: a unique topological order exists
  CausalOrder order = topological_sort(g);
  auto pos = order_positions(order);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) CHECK((g.edge(i, j) == (pos[i] < pos[j])));
}

TEST_CASE("every sampler stays acyclic over many seeds", "[graphgen]") {
  GraphConfig er = make_cfg(GraphKind::Er, 10);
  GraphConfig sf = make_cfg(GraphKind::Sf, 10);
  sf.er_m = 2;
  GraphConfig grp = make_cfg(GraphKind::Grp, 10);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 r1(seed), r2(seed), r3(seed), r4(seed);
    CHECK(is_acyclic(sample_er(er, r1)));
    CHECK(is_acyclic(sample_sf(sf, r2)));
    CHECK(is_acyclic(sample_grp(grp, r3)));
    CHECK(is_acyclic(fully_connected(10, r4)));
  }
}

TEST_CASE("same config and seed reproduce the same graph", "[graphgen]") {
  for (GraphKind kind : {GraphKind::Er, GraphKind::Sf, GraphKind::Grp}) {
    GraphConfig cfg = make_cfg(kind, 12);
    if (kind == GraphKind::Sf) cfg.er_m = 2;
    std::mt19937_64 a(99), b(99);
    CHECK(sample_graph(cfg, a) == sample_graph(cfg, b));
  }
}

TEST_CASE("er rejects conflicting density settings", "[graphgen]") {
  GraphConfig cfg = make_cfg(GraphKind::Er, 10);
  cfg.er_p = 0.5;
  cfg.er_m = 2;
  std::mt19937_64 rng(1);
  CHECK_THROWS(sample_er(cfg, rng));
}
