#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdbench/dag.hpp"

namespace cdbench {

enum class GraphKind { Er, Sf, Grp, Fc };
enum class Density { Sparse, Dense };

inline std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::Er: return "er";
    case GraphKind::Sf: return "sf";
    case GraphKind::Grp: return "grp";
    case GraphKind::Fc: return "fc";
  }
  return "?";
}

inline GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "er") return GraphKind::Er;
  if (s == "sf") return GraphKind::Sf;
  if (s == "grp") return GraphKind::Grp;
  if (s == "fc") return GraphKind::Fc;
  throw std::invalid_argument("unknown graph kind: " + s);
}

inline std::string to_string(Density den) {
  return den == Density::Sparse ? "sparse" : "dense";
}

inline Density density_from_string(const std::string& s) {
  if (s == "sparse") return Density::Sparse;
  if (s == "dense") return Density::Dense;
  throw std::invalid_argument("unknown density: " + s);
}

struct GraphConfig {
  GraphKind kind = GraphKind::Er;
  int d = 10;
  Density density = Density::Sparse;
  // Optional overrides of the density schema.
  std::optional<double> er_p;   // ER pairwise probability (the 5-node rows)
  std::optional<int> er_m;      // ER/SF mean edges per node (10+ node rows)
  std::optional<double> grp_p_in;
  std::optional<double> grp_p_out;
};

constexpr double kGrpDefaultPIn = 0.4;
constexpr double kGrpDefaultPOut = 0.05;  // B.3 value; the 0.1 variant is an override

// Density schema: sparse = {p=0.1 (d=5), m=1 (d=10,20), m=2 (d=50)},
// dense = {p=0.4 (d=5), m=2 (d=10), m=4 (d=20), m=8 (d=50)}.
inline std::optional<int> schema_edges_per_node(int d, Density den) {
  if (den == Density::Sparse) {
    if (d == 10 || d == 20) return 1;
    if (d == 50) return 2;
  } else {
    if (d == 10) return 2;
    if (d == 20) return 4;
    if (d == 50) return 8;
  }
  return std::nullopt;
}

// m is converted to a pairwise probability via p = m*d / (d*(d-1)/2).
inline double er_edge_probability(const GraphConfig& cfg) {
  if (cfg.er_p && cfg.er_m) throw std::invalid_argument("er: set only one of er_p / er_m");
  if (cfg.er_p) {
    if (*cfg.er_p < 0.0 || *cfg.er_p > 1.0) throw std::invalid_argument("er_p must be in [0,1]");
    return *cfg.er_p;
  }
  std::optional<int> m = cfg.er_m;
  if (!m) {
    if (cfg.d == 5) return cfg.density == Density::Sparse ? 0.1 : 0.4;
    m = schema_edges_per_node(cfg.d, cfg.density);
    if (!m)
      throw std::invalid_argument("no density schema entry for d=" + std::to_string(cfg.d) +
                                  "; pass er_p or er_m explicitly");
  }
  if (*m < 1) throw std::invalid_argument("er_m must be >= 1");
  double pairs = cfg.d * (cfg.d - 1) / 2.0;
  return std::min(1.0, *m * cfg.d / pairs);
}

inline int sf_edges_per_node(const GraphConfig& cfg) {
  if (cfg.er_m) {
    if (*cfg.er_m < 1) throw std::invalid_argument("er_m must be >= 1");
    return *cfg.er_m;
  }
  auto m = schema_edges_per_node(cfg.d, cfg.density);
  if (m) return *m;
  if (cfg.d == 5) return cfg.density == Density::Sparse ? 1 : 2;
  throw std::invalid_argument("no density schema entry for d=" + std::to_string(cfg.d) +
                              "; pass er_m explicitly");
}

// Uniform random permutation, then each forward pair kept independently.
// 5-node draws are repeated until the graph has at least 2 edges.
inline Dag sample_er(const GraphConfig& cfg, std::mt19937_64& rng) {
  if (cfg.kind != GraphKind::Er) throw std::invalid_argument("sample_er: wrong kind");
  if (cfg.d < 2) throw std::invalid_argument("sample_er: d must be >= 2");
  const double p = er_edge_probability(cfg);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<int> perm(cfg.d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dag g(cfg.d);
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b)
        if (unif(rng) < p) g.set_edge(perm[a], perm[b]);
    if (cfg.d != 5 || g.edge_count() >= 2) return g;
  }
  throw std::runtime_error("sample_er: could not reach 2 edges (p too small)");
}

// Barabasi-Albert preferential attachment; each arriving node attaches to m
// distinct existing nodes, edges oriented from earlier-attached to
// later-attached. Node labels are shuffled afterwards so that the index does
// not encode attachment depth.
inline Dag sample_sf(const GraphConfig& cfg, std::mt19937_64& rng) {
  if (cfg.kind != GraphKind::Sf) throw std::invalid_argument("sample_sf: wrong kind");
  if (cfg.d < 3) throw std::invalid_argument("sample_sf: d must be >= 3");
  if (cfg.d == 5)
    std::cerr << "warning: scale-free graphs are not part of the 5-node benchmark grid\n";
  const int m = sf_edges_per_node(cfg);
  if (m >= cfg.d) throw std::invalid_argument("sample_sf: need m < d");

  std::vector<int> label(cfg.d);
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);

  Dag g(cfg.d);
  std::vector<int> targets(m);
  std::iota(targets.begin(), targets.end(), 0);
  std::vector<int> repeated;
  for (int v = m; v < cfg.d; ++v) {
    for (int t : targets) g.set_edge(label[t], label[v]);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, v);
    // m distinct preferential picks for the next arrival.
    std::set<int> picked;
    std::uniform_int_distribution<std::size_t> idx(0, repeated.size() - 1);
    while (static_cast<int>(picked.size()) < m) picked.insert(repeated[idx(rng)]);
    targets.assign(picked.begin(), picked.end());
  }
  return g;
}

// Gaussian random partition: k = max(2, round(d/5)) clusters with sizes drawn
// around d/k, dense within clusters (p_in) and sparse across (p_out);
// orientation by a global random permutation.
inline Dag sample_grp(const GraphConfig& cfg, std::mt19937_64& rng,
                      std::vector<int>* cluster_out = nullptr) {
  if (cfg.kind != GraphKind::Grp) throw std::invalid_argument("sample_grp: wrong kind");
  if (cfg.d < 2) throw std::invalid_argument("sample_grp: d must be >= 2");
  const double p_in = cfg.grp_p_in.value_or(kGrpDefaultPIn);
  const double p_out = cfg.grp_p_out.value_or(kGrpDefaultPOut);
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
    throw std::invalid_argument("sample_grp: probabilities must be in [0,1]");

  const int k = std::max(2, static_cast<int>(std::lround(cfg.d / 5.0)));
  const double mean_size = static_cast<double>(cfg.d) / k;
  std::normal_distribution<double> size_draw(mean_size, std::sqrt(mean_size));
  std::vector<int> cluster(cfg.d);
  int assigned = 0;
  for (int c = 0; c < k && assigned < cfg.d; ++c) {
    int remaining_clusters = k - c - 1;
    int size;
    if (remaining_clusters == 0) {
      size = cfg.d - assigned;
    } else {
      size = static_cast<int>(std::lround(size_draw(rng)));
      size = std::clamp(size, 1, cfg.d - assigned - remaining_clusters);
    }
    for (int t = 0; t < size; ++t) cluster[assigned + t] = c;
    assigned += size;
  }

  std::vector<int> perm(cfg.d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> pos(cfg.d);
  for (int r = 0; r < cfg.d; ++r) pos[perm[r]] = r;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dag g(cfg.d);
  for (int a = 0; a < cfg.d; ++a)
    for (int b = a + 1; b < cfg.d; ++b) {
      double p = cluster[a] == cluster[b] ? p_in : p_out;
      if (unif(rng) < p) {
        if (pos[a] < pos[b])
          g.set_edge(a, b);
        else
          g.set_edge(b, a);
      }
    }
  if (cluster_out) *cluster_out = cluster;
  return g;
}

inline Dag fully_connected(int d, std::mt19937_64& rng) {
  if (d < 2) throw std::invalid_argument("fully_connected: d must be >= 2");
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dag g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) g.set_edge(perm[a], perm[b]);
  return g;
}

inline Dag sample_graph(const GraphConfig& cfg, std::mt19937_64& rng) {
  switch (cfg.kind) {
    case GraphKind::Er: return sample_er(cfg, rng);
    case GraphKind::Sf: return sample_sf(cfg, rng);
    case GraphKind::Grp: return sample_grp(cfg, rng);
    case GraphKind::Fc: return fully_connected(cfg.d, rng);
  }
  throw std::invalid_argument("sample_graph: unknown kind");
}

}  // namespace cdbench
