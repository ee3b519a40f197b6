#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cdbench {

// Topological order over node indices, source first, leaf last.
using CausalOrder = std::vector<int>;

// Directed graph over d indexed nodes; adjacency is dense row-major,
// adj[i*d+j] != 0 means edge i -> j. Acyclicity is not enforced on every
// mutation; generators construct acyclic graphs and topological_sort()
// rejects cycles.
struct Dag {
  int d = 0;
  std::vector<std::uint8_t> adj;

  Dag() = default;
  explicit Dag(int nodes) : d(nodes) {
    if (nodes < 1) throw std::invalid_argument("Dag: node count must be >= 1");
    adj.assign(static_cast<std::size_t>(nodes) * nodes, 0);
  }

  bool edge(int i, int j) const { return adj[static_cast<std::size_t>(i) * d + j] != 0; }

  void set_edge(int i, int j, bool present = true) {
    if (i == j) throw std::invalid_argument("Dag: self-loops are not allowed");
    if (i < 0 || j < 0 || i >= d || j >= d) throw std::invalid_argument("Dag: node out of range");
    adj[static_cast<std::size_t>(i) * d + j] = present ? 1 : 0;
  }

  int edge_count() const {
    int c = 0;
    for (auto v : adj) c += v != 0;
    return c;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (edge(i, j)) out.emplace_back(i, j);
    return out;
  }

  std::vector<int> parents(int j) const {
    std::vector<int> out;
    for (int i = 0; i < d; ++i)
      if (edge(i, j)) out.push_back(i);
    return out;
  }

  bool operator==(const Dag&) const = default;
};

// Kahn's algorithm with a min-index frontier for deterministic tie-breaking.
inline CausalOrder topological_sort(const Dag& g) {
  std::vector<int> indeg(g.d, 0);
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j)
      if (g.edge(i, j)) ++indeg[j];
  std::set<int> frontier;
  for (int i = 0; i < g.d; ++i)
    if (indeg[i] == 0) frontier.insert(i);
  CausalOrder order;
  order.reserve(g.d);
  while (!frontier.empty()) {
    int u = *frontier.begin();
    frontier.erase(frontier.begin());
    order.push_back(u);
    for (int j = 0; j < g.d; ++j)
      if (g.edge(u, j) && --indeg[j] == 0) frontier.insert(j);
  }
  if (static_cast<int>(order.size()) != g.d)
    throw std::runtime_error("topological_sort: cycle detected");
  return order;
}

inline bool is_acyclic(const Dag& g) {
  try {
    topological_sort(g);
    return true;
  } catch (const std::runtime_error&) {
    return false;
  }
}

inline void validate_order(const CausalOrder& order, int d) {
  if (static_cast<int>(order.size()) != d)
    throw std::invalid_argument("order: wrong length");
  std::vector<char> seen(d, 0);
  for (int v : order) {
    if (v < 0 || v >= d || seen[v]) throw std::invalid_argument("order: not a permutation");
    seen[v] = 1;
  }
}

// position[node] = rank in the order (0 = source end).
inline std::vector<int> order_positions(const CausalOrder& order) {
  std::vector<int> pos(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) pos[order[r]] = static_cast<int>(r);
  return pos;
}

// --- serialization -------------------------------------------------------

// CSV adjacency matrix: d rows of d comma-separated 0/1 values, no header.
inline void save_adjacency_csv(const Dag& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int i = 0; i < g.d; ++i) {
    for (int j = 0; j < g.d; ++j) {
      if (j) out << ',';
      out << (g.edge(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

inline Dag load_adjacency_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<int> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell != "0" && cell != "1")
        throw std::runtime_error(path + ": adjacency entries must be 0/1, got '" + cell + "'");
      row.push_back(cell == "1");
    }
    rows.push_back(std::move(row));
  }
  const int d = static_cast<int>(rows.size());
  if (d == 0) throw std::runtime_error(path + ": empty adjacency file");
  Dag g(d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d)
      throw std::runtime_error(path + ": adjacency matrix is not square at row " + std::to_string(i + 1));
    for (int j = 0; j < d; ++j)
      if (rows[i][j]) {
        if (i == j) throw std::runtime_error(path + ": self-loop at node " + std::to_string(i));
        g.set_edge(i, j);
      }
  }
  return g;
}

// Edge list: leading "# d=<n>" line (node count, needed for lossless
// round-trips with isolated nodes) followed by one "i j" pair per line.
inline void save_edge_list(const Dag& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# d=" << g.d << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

inline Dag load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  int d = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("d=");
      if (pos != std::string::npos) d = std::stoi(line.substr(pos + 2));
      continue;
    }
    std::istringstream ss(line);
    int i, j;
    if (!(ss >> i >> j)) throw std::runtime_error(path + ": malformed edge line '" + line + "'");
    edges.emplace_back(i, j);
    d = std::max({d, i + 1, j + 1});
  }
  if (d < 1) throw std::runtime_error(path + ": no node count and no edges");
  Dag g(d);
  for (const auto& [i, j] : edges) g.set_edge(i, j);
  return g;
}

// One line of space-separated node indices, source first.
inline void save_order(const CausalOrder& order, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r) out << ' ';
    out << order[r];
  }
  out << '\n';
}

inline CausalOrder load_order(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CausalOrder order;
  int v;
  while (in >> v) order.push_back(v);
  if (order.empty()) throw std::runtime_error(path + ": empty order file");
  validate_order(order, static_cast<int>(order.size()));
  return order;
}

}  // namespace cdbench
