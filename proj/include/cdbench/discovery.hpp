#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cdbench/dag.hpp"
#include "cdbench/kernels.hpp"
#include "cdbench/pruning.hpp"
#include "cdbench/random.hpp"
#include "cdbench/stein.hpp"

namespace cdbench {

struct DiscoveryConfig {
  double ridge = kDefaultRidge;        // n-scaled ridge of the score solver
  std::optional<double> bandwidth;     // fixed kernel width; default: median heuristic
  double krr_ridge = kDefaultRidge;    // ridge of the regression stages (NoGAM, RESIT)
  int nogam_folds = 5;
  double das_significance = 0.05;
  int das_null_permutations = 4;       // re-estimates pooled into the DAS null
};

enum class Method { ScoreSort, Score, NoGam, Resit, Das, Random };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::ScoreSort: return "scoresort";
    case Method::Score: return "score";
    case Method::NoGam: return "nogam";
    case Method::Resit: return "resit";
    case Method::Das: return "das";
    case Method::Random: return "random";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "scoresort") return Method::ScoreSort;
  if (s == "score") return Method::Score;
  if (s == "nogam") return Method::NoGam;
  if (s == "resit") return Method::Resit;
  if (s == "das") return Method::Das;
  if (s == "random") return Method::Random;
  throw std::invalid_argument("unknown method: " + s);
}

namespace detail {

inline double column_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
  return sub;
}

inline Eigen::MatrixXd subrows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  return sub;
}

// Iteratively remove the argmin of `criterion` (ties to the smallest node
// index); removal order is leaf-first, the returned order source-first.
template <typename CriterionFn>
CausalOrder peel_order(const Eigen::MatrixXd& x, CriterionFn&& criterion) {
  const int d = static_cast<int>(x.cols());
  std::vector<int> active(d);
  std::iota(active.begin(), active.end(), 0);
  CausalOrder order(d);
  int fill = d - 1;
  while (active.size() > 1) {
    const Eigen::MatrixXd sub = submatrix(x, active);
    const std::vector<double> crit = criterion(sub);
    std::size_t best = 0;
    for (std::size_t i = 1; i < crit.size(); ++i)
      if (crit[i] < crit[best]) best = i;
    order[fill--] = active[best];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
  }
  order[0] = active[0];
  return order;
}

// Out-of-fold predictions of y from inputs via kernel ridge; folds are index
// strides (row r in fold r % folds) so no entropy is consumed.
inline Eigen::VectorXd oof_residual(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                                    int folds, double ridge) {
  const Eigen::Index n = inputs.rows();
  Eigen::VectorXd resid(n);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (Eigen::Index r = 0; r < n; ++r) (r % folds == f ? test : train).push_back(static_cast<int>(r));
    if (test.empty()) continue;
    Eigen::MatrixXd xin = subrows(inputs, train);
    Eigen::VectorXd yin(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) yin[static_cast<Eigen::Index>(i)] = y[train[i]];
    KernelRidgeModel model = krr_fit(xin, yin, std::nullopt, ridge);
    const Eigen::VectorXd pred = model.predict(subrows(inputs, test));
    for (std::size_t i = 0; i < test.size(); ++i)
      resid[test[i]] = y[test[i]] - pred[static_cast<Eigen::Index>(i)];
  }
  return resid;
}

inline double cv_mse_1d(const Eigen::VectorXd& input, const Eigen::VectorXd& target, int folds,
                        double ridge) {
  const Eigen::Index n = input.size();
  double err = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (Eigen::Index r = 0; r < n; ++r) (r % folds == f ? test : train).push_back(static_cast<int>(r));
    if (test.empty()) continue;
    Eigen::MatrixXd xin(train.size(), 1);
    Eigen::VectorXd yin(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      xin(static_cast<Eigen::Index>(i), 0) = input[train[i]];
      yin[static_cast<Eigen::Index>(i)] = target[train[i]];
    }
    KernelRidgeModel model = krr_fit(xin, yin, std::nullopt, ridge);
    Eigen::MatrixXd xout(test.size(), 1);
    for (std::size_t i = 0; i < test.size(); ++i) xout(static_cast<Eigen::Index>(i), 0) = input[test[i]];
    const Eigen::VectorXd pred = model.predict(xout);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const double e = target[test[i]] - pred[static_cast<Eigen::Index>(i)];
      err += e * e;
    }
  }
  return err / static_cast<double>(n);
}

inline Eigen::MatrixXd drop_column(const Eigen::MatrixXd& x, Eigen::Index col) {
  Eigen::MatrixXd out(x.rows(), x.cols() - 1);
  Eigen::Index at = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    if (c != col) out.col(at++) = x.col(c);
  return out;
}

}  // namespace detail

// Leaf = argmin of the per-column sample variance of the estimated score.
inline CausalOrder scoresort_order(const Eigen::MatrixXd& x,
                                   const DiscoveryConfig& cfg = {}) {
  return detail::peel_order(x, [&](const Eigen::MatrixXd& sub) {
    const ScoreEstimate est = estimate_score(sub, cfg.ridge, cfg.bandwidth);
    std::vector<double> crit(static_cast<std::size_t>(sub.cols()));
    for (Eigen::Index c = 0; c < sub.cols(); ++c)
      crit[static_cast<std::size_t>(c)] = detail::column_variance(est.score.col(c));
    return crit;
  });
}

// Leaf = argmin of the per-column sample variance of the score-Jacobian
// diagonal.
inline CausalOrder score_order(const Eigen::MatrixXd& x, const DiscoveryConfig& cfg = {}) {
  return detail::peel_order(x, [&](const Eigen::MatrixXd& sub) {
    const ScoreEstimate est = estimate_jacobian_diag(sub, cfg.ridge, cfg.bandwidth);
    std::vector<double> crit(static_cast<std::size_t>(sub.cols()));
    for (Eigen::Index c = 0; c < sub.cols(); ++c)
      crit[static_cast<std::size_t>(c)] = detail::column_variance(est.jac_diag.col(c));
    return crit;
  });
}

// Leaf = argmin of the cross-validated MSE of predicting the node's score
// entry from its regression residual on the other columns.
inline CausalOrder nogam_order(const Eigen::MatrixXd& x, int folds = 5,
                               const DiscoveryConfig& cfg = {}) {
  if (folds < 2) throw std::invalid_argument("nogam_order: folds >= 2");
  return detail::peel_order(x, [&](const Eigen::MatrixXd& sub) {
    const ScoreEstimate est = estimate_score(sub, cfg.ridge, cfg.bandwidth);
    std::vector<double> crit(static_cast<std::size_t>(sub.cols()));
    for (Eigen::Index c = 0; c < sub.cols(); ++c) {
      const Eigen::MatrixXd others = detail::drop_column(sub, c);
      const Eigen::VectorXd resid =
          detail::oof_residual(others, sub.col(c), folds, cfg.krr_ridge);
      crit[static_cast<std::size_t>(c)] =
          detail::cv_mse_1d(resid, est.score.col(c), folds, cfg.krr_ridge);
    }
    return crit;
  });
}

// Leaf = argmin over nodes of the largest HSIC statistic between the node's
// regression residual and any other remaining column.
inline CausalOrder resit_order(const Eigen::MatrixXd& x, const DiscoveryConfig& cfg = {}) {
  if (x.rows() < 50) throw std::invalid_argument("resit_order: needs n >= 50");
  return detail::peel_order(x, [&](const Eigen::MatrixXd& sub) {
    std::vector<double> crit(static_cast<std::size_t>(sub.cols()));
    std::mt19937_64 rng(0);  // gamma approximation consumes no entropy
    for (Eigen::Index c = 0; c < sub.cols(); ++c) {
      const Eigen::MatrixXd others = detail::drop_column(sub, c);
      KernelRidgeModel model = krr_fit(others, sub.col(c), std::nullopt, cfg.krr_ridge);
      const Eigen::VectorXd resid = sub.col(c) - model.predict(others);
      double worst = 0.0;
      for (Eigen::Index j = 0; j < others.cols(); ++j)
        worst = std::max(worst, hsic_test(resid, others.col(j), rng).statistic);
      crit[static_cast<std::size_t>(c)] = worst;
    }
    return crit;
  });
}

// Candidate parents per node: walking the order leaf-to-source, re-estimate
// the mixed score-Jacobian column of the leaf against its predecessors and
// keep those whose mean absolute entry sits significantly above a
// permutation-calibrated null. The null pool is built by row-shuffling the
// predecessor block as a unit (which makes every mixed derivative exactly
// zero while keeping the marginals and the predecessors' joint intact) and
// re-running the estimate; its pooled mean is the location the observed
// column must beat, one-sided, Bonferroni-corrected over predecessors.
inline CandidateParents das_candidates(const Eigen::MatrixXd& x, const CausalOrder& order,
                                       double significance,
                                       const DiscoveryConfig& cfg = {}) {
  const int d = static_cast<int>(x.cols());
  validate_order(order, d);
  if (significance <= 0.0 || significance >= 1.0)
    throw std::invalid_argument("das_candidates: significance must be in (0,1)");
  const Eigen::Index n = x.rows();
  if (cfg.das_null_permutations < 2)
    throw std::invalid_argument("das_candidates: need at least 2 null permutations");
  CandidateParents cand(static_cast<std::size_t>(d));
  std::mt19937_64 perm_rng(0x6c078965u);  // internal; keeps the output deterministic
  for (int p = d - 1; p >= 1; --p) {
    const int leaf = order[p];
    std::vector<int> cols(order.begin(), order.begin() + p + 1);
    std::sort(cols.begin(), cols.end());
    const Eigen::MatrixXd sub = detail::submatrix(x, cols);
    const Eigen::Index local_leaf =
        std::find(cols.begin(), cols.end(), leaf) - cols.begin();
    detail::SteinContext ctx(sub, cfg.ridge, cfg.bandwidth);
    const Eigen::MatrixXd h = ctx.jacobian_offdiag(local_leaf);

    // Null pool: one column mean per (permutation, predecessor). Values from
    // the same re-estimate share a solve, so the spread across pool entries —
    // not the per-sample spread within a column — carries the real
    // solve-to-solve variance of a null column mean.
    std::vector<double> null_means;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (int b = 0; b < cfg.das_null_permutations; ++b) {
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      std::shuffle(idx.begin(), idx.end(), perm_rng);
      Eigen::MatrixXd shuffled = sub;
      for (Eigen::Index c = 0; c < sub.cols(); ++c) {
        if (c == local_leaf) continue;
        for (Eigen::Index r = 0; r < n; ++r) shuffled(r, c) = sub(idx[static_cast<std::size_t>(r)], c);
      }
      detail::SteinContext null_ctx(shuffled, cfg.ridge, cfg.bandwidth);
      const Eigen::MatrixXd hnull = null_ctx.jacobian_offdiag(local_leaf);
      for (Eigen::Index c = 0; c < hnull.cols(); ++c)
        null_means.push_back(hnull.col(c).array().abs().mean());
    }
    const double pool = static_cast<double>(null_means.size());
    double null_mean = 0.0;
    for (double v : null_means) null_mean += v;
    null_mean /= pool;
    double null_var = 0.0;
    for (double v : null_means) null_var += (v - null_mean) * (v - null_mean);
    null_var /= (pool - 1.0);
    boost::math::students_t_distribution<double> tdist(pool - 1.0);

    std::vector<int> pred_nodes;
    for (int c : cols)
      if (c != leaf) pred_nodes.push_back(c);
    const int m = static_cast<int>(pred_nodes.size());
    for (int q = 0; q < m; ++q) {
      const Eigen::ArrayXd abs_col = h.col(q).array().abs();
      const double mean_abs = abs_col.mean();
      const double var_abs =
          (abs_col - mean_abs).square().sum() / static_cast<double>(n - 1);
      const double se = std::sqrt(null_var * (1.0 + 1.0 / pool) +
                                  var_abs / static_cast<double>(n));
      double t;
      if (se > 0.0)
        t = (mean_abs - null_mean) / se;
      else
        t = mean_abs > null_mean ? std::numeric_limits<double>::infinity() : 0.0;
      const double pv = std::isinf(t) ? 0.0 : boost::math::cdf(boost::math::complement(tdist, t));
      if (pv < significance / m) cand[static_cast<std::size_t>(leaf)].push_back(pred_nodes[q]);
    }
  }
  return cand;
}

// Uniform random order plus a fair coin per order-admitted edge.
inline std::pair<CausalOrder, Dag> random_baseline(int d, std::mt19937_64& rng) {
  if (d < 1) throw std::invalid_argument("random_baseline: d >= 1");
  CausalOrder order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Dag g(d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (unif(rng) < 0.5) g.set_edge(order[i], order[j], true);
  return {order, g};
}

struct DiscoveryResult {
  CausalOrder order;
  Dag dag;
};

// Full pipeline: order inference followed by edge pruning (candidate-guided
// for Das). Random ignores the data beyond its column count.
inline DiscoveryResult discover(Method method, const Eigen::MatrixXd& x,
                                const DiscoveryConfig& dcfg = {},
                                const PruneConfig& pcfg = {},
                                std::uint64_t random_seed = 0) {
  DiscoveryResult out{CausalOrder{}, Dag(static_cast<int>(x.cols()))};
  switch (method) {
    case Method::ScoreSort: out.order = scoresort_order(x, dcfg); break;
    case Method::Score: out.order = score_order(x, dcfg); break;
    case Method::NoGam: out.order = nogam_order(x, dcfg.nogam_folds, dcfg); break;
    case Method::Resit: out.order = resit_order(x, dcfg); break;
    case Method::Das: out.order = score_order(x, dcfg); break;
    case Method::Random: {
      auto rng = make_stream(random_seed, "random_baseline", 0);
      auto [order, dag] = random_baseline(static_cast<int>(x.cols()), rng);
      out.order = order;
      out.dag = dag;
      return out;
    }
  }
  if (method == Method::Das) {
    const CandidateParents cand = das_candidates(x, out.order, dcfg.das_significance, dcfg);
    out.dag = prune_from_candidates(x, out.order, cand, pcfg);
  } else {
    out.dag = cam_prune(x, out.order, pcfg);
  }
  return out;
}

}  // namespace cdbench
