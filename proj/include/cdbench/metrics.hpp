#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cdbench/dag.hpp"
#include "cdbench/io.hpp"

namespace cdbench {

// Skeleton-level confusion counts over unordered node pairs. A pair counts as
// TP when both graphs make it adjacent (regardless of direction), TN when
// neither does, FP when only the prediction does. FN collects both missing
// adjacencies and reversed edges, so a reversed edge contributes one TP and
// one FN.
struct Confusion {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
};

inline Confusion confusion(const Dag& truth, const Dag& pred) {
  if (truth.d != pred.d) throw std::invalid_argument("confusion: node count mismatch");
  Confusion c;
  int reversed = 0;
  for (int i = 0; i < truth.d; ++i)
    for (int j = i + 1; j < truth.d; ++j) {
      const bool t_adj = truth.edge(i, j) || truth.edge(j, i);
      const bool p_adj = pred.edge(i, j) || pred.edge(j, i);
      if (t_adj && p_adj) {
        ++c.tp;
        const bool same = (truth.edge(i, j) && pred.edge(i, j)) ||
                          (truth.edge(j, i) && pred.edge(j, i));
        if (!same) ++reversed;
      } else if (t_adj && !p_adj) {
        ++c.fn;
      } else if (!t_adj && p_adj) {
        ++c.fp;
      } else {
        ++c.tn;
      }
    }
  c.fn += reversed;
  return c;
}

inline double f1_score(const Confusion& c) {
  const double denom = c.tp + 0.5 * (c.fn + c.fp);
  if (denom == 0.0) return 1.0;  // empty prediction against empty truth
  return c.tp / denom;
}

inline double false_negative_rate(const Confusion& c) {
  const int denom = c.tp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(c.fn) / denom;
}

inline double false_positive_rate(const Confusion& c) {
  const int denom = c.fp + c.tn;
  return denom == 0 ? 0.0 : static_cast<double>(c.fp) / denom;
}

// Balanced scoring function: rewards true decisions per true class size and
// penalizes false ones symmetrically; 1 is perfect, 0 matches an empty or
// trivial guess. Undefined when the truth has no edges or no non-adjacent
// pairs (a fully connected truth), since one of the class sizes vanishes.
inline double balanced_scoring_function(const Dag& truth, const Dag& pred) {
  const Confusion c = confusion(truth, pred);
  int adjacent = 0;
  const int pairs = truth.d * (truth.d - 1) / 2;
  for (int i = 0; i < truth.d; ++i)
    for (int j = i + 1; j < truth.d; ++j)
      if (truth.edge(i, j) || truth.edge(j, i)) ++adjacent;
  const int independent = pairs - adjacent;
  if (adjacent == 0 || independent == 0)
    throw std::invalid_argument(
        "balanced_scoring_function: undefined for empty or fully connected truth");
  return 0.5 * (static_cast<double>(c.tp) / adjacent + static_cast<double>(c.tn) / independent -
                static_cast<double>(c.fp) / independent - static_cast<double>(c.fn) / adjacent);
}

// Fraction of truth edges whose endpoints the order puts in the wrong
// relative position; 0 when every edge is compatible with the order.
inline double order_false_negative_rate(const Dag& truth, const CausalOrder& order) {
  validate_order(order, truth.d);
  const std::vector<int> pos = order_positions(order);
  int violated = 0;
  int total = 0;
  for (const auto& [i, j] : truth.edges()) {
    ++total;
    if (pos[i] > pos[j]) ++violated;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(violated) / total;
}

inline nlohmann::json metrics_json(const Dag& truth, const Dag& pred,
                                   const CausalOrder* order = nullptr) {
  const Confusion c = confusion(truth, pred);
  nlohmann::json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  auto num = [](double v) { return nlohmann::json::parse(format_double(v, "%.6g")); };
  j["f1"] = num(f1_score(c));
  j["fnr"] = num(false_negative_rate(c));
  j["fpr"] = num(false_positive_rate(c));
  try {
    j["bsf"] = num(balanced_scoring_function(truth, pred));
  } catch (const std::invalid_argument&) {
    j["bsf"] = nullptr;
  }
  if (order) j["fnr_order"] = num(order_false_negative_rate(truth, *order));
  return j;
}

}  // namespace cdbench
