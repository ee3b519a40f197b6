#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "cdbench/dag.hpp"
#include "cdbench/stats.hpp"

namespace cdbench {

using CandidateParents = std::vector<std::vector<int>>;

struct PruneConfig {
  double alpha = 0.05;          // significance threshold on the per-covariate test
  int pns_k = 20;               // neighbour cap when preselection kicks in
  int pns_threshold_nodes = 20; // preselect only when d exceeds this
  int basis_size = 10;          // spline functions per covariate
};

// Natural cubic spline expansion of one covariate: basis_size columns built
// from basis_size+1 knots at evenly spaced empirical quantiles. First column
// is the covariate itself; the rest are the curvature terms
//   d_k(x) - d_{K-1}(x),  d_k(x) = [(x - t_k)_+^3 - (x - t_K)_+^3] / (t_K - t_k),
// which are linear beyond the boundary knots. Duplicate knots (heavily tied
// covariates) collapse, shrinking the block; a constant covariate yields a
// single zero column that the rank check later discards.
inline Eigen::MatrixXd natural_spline_basis(const Eigen::VectorXd& x, int basis_size) {
  if (basis_size < 1) throw std::invalid_argument("natural_spline_basis: basis_size >= 1");
  const Eigen::Index n = x.size();
  std::vector<double> vals(x.data(), x.data() + n);
  std::vector<double> knots;
  for (int k = 0; k <= basis_size; ++k)
    knots.push_back(quantile(vals, static_cast<double>(k) / basis_size));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const int nk = static_cast<int>(knots.size());
  if (nk < 3) {
    Eigen::MatrixXd b(n, 1);
    b.col(0) = x;
    if (nk < 2) b.setZero();
    return b;
  }
  auto trunc_cubed = [&](double v, double t) {
    const double u = v - t;
    return u > 0.0 ? u * u * u : 0.0;
  };
  auto dk = [&](double v, int k) {
    return (trunc_cubed(v, knots[k]) - trunc_cubed(v, knots[nk - 1])) /
           (knots[nk - 1] - knots[k]);
  };
  Eigen::MatrixXd b(n, nk - 1);
  b.col(0) = x;
  for (int k = 0; k < nk - 2; ++k)
    for (Eigen::Index r = 0; r < n; ++r) b(r, k + 1) = dk(x[r], k) - dk(x[r], nk - 2);
  return b;
}

namespace detail {

struct AdditiveFit {
  Eigen::MatrixXd design;          // [1 | block_0 | block_1 | ...]
  std::vector<int> covariates;     // node index per block
  std::vector<int> block_offset;   // column offset of each block in design
  std::vector<int> block_width;
  Eigen::VectorXd beta;
  double rss = 0.0;
};

inline double residual_ss(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                          Eigen::VectorXd* beta_out = nullptr) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd beta = qr.solve(y);
  if (beta_out) *beta_out = beta;
  return (y - a * beta).squaredNorm();
}

// Fits y ~ 1 + sum of spline blocks over `covariates`. Rank-deficient designs
// drop the covariate owning the most rejected pivot columns (with a warning)
// and refit, per the declared error policy.
inline AdditiveFit fit_additive(const Eigen::MatrixXd& x, int target,
                                std::vector<int> covariates, int basis_size) {
  const Eigen::Index n = x.rows();
  for (;;) {
    AdditiveFit fit;
    fit.covariates = covariates;
    std::vector<Eigen::MatrixXd> blocks;
    int cols = 1;
    for (int c : covariates) {
      blocks.push_back(natural_spline_basis(x.col(c), basis_size));
      fit.block_offset.push_back(cols);
      fit.block_width.push_back(static_cast<int>(blocks.back().cols()));
      cols += fit.block_width.back();
    }
    fit.design.resize(n, cols);
    fit.design.col(0).setOnes();
    for (std::size_t b = 0; b < blocks.size(); ++b)
      fit.design.middleCols(fit.block_offset[b], fit.block_width[b]) = blocks[b];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fit.design);
    if (qr.rank() == cols || covariates.empty()) {
      fit.beta = qr.solve(x.col(target));
      fit.rss = (x.col(target) - fit.design * fit.beta).squaredNorm();
      return fit;
    }
    // Rejected columns are the pivots past the numerical rank.
    std::vector<int> rejected_per_block(covariates.size(), 0);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index p = qr.rank(); p < cols; ++p) {
      const int col = perm[p];
      for (std::size_t b = 0; b < covariates.size(); ++b)
        if (col >= fit.block_offset[b] && col < fit.block_offset[b] + fit.block_width[b])
          ++rejected_per_block[b];
    }
    std::size_t worst = 0;
    for (std::size_t b = 1; b < covariates.size(); ++b)
      if (rejected_per_block[b] > rejected_per_block[worst]) worst = b;
    std::fprintf(stderr,
                 "warning: dropping covariate %d for node %d (rank-deficient design)\n",
                 covariates[worst], target);
    covariates.erase(covariates.begin() + static_cast<std::ptrdiff_t>(worst));
  }
}

// Residual sum of squares of the fit with block b removed (intercept kept).
inline double reduced_rss(const AdditiveFit& full, std::size_t b, const Eigen::VectorXd& y) {
  const Eigen::Index n = full.design.rows();
  Eigen::MatrixXd reduced(n, full.design.cols() - full.block_width[b]);
  reduced.col(0).setOnes();
  int at = 1;
  for (std::size_t ob = 0; ob < full.covariates.size(); ++ob) {
    if (ob == b) continue;
    reduced.middleCols(at, full.block_width[ob]) =
        full.design.middleCols(full.block_offset[ob], full.block_width[ob]);
    at += full.block_width[ob];
  }
  return residual_ss(reduced, y);
}

// Importance of each block = RSS increase when it is dropped from the joint
// fit. A plain contribution-norm ranking is unstable for correlated
// predecessors (large cancelling components), whereas the explained residual
// mass is exactly what the downstream significance test measures.
inline std::vector<double> block_importance(const AdditiveFit& fit, const Eigen::VectorXd& y) {
  std::vector<double> imp(fit.covariates.size(), 0.0);
  for (std::size_t b = 0; b < fit.covariates.size(); ++b)
    imp[b] = reduced_rss(fit, b, y) - fit.rss;
  return imp;
}

// Keep the k most important candidates, preserving ascending node order; ties
// favour the smaller node index.
inline std::vector<int> select_top_k(const Eigen::MatrixXd& x, int target,
                                     const std::vector<int>& candidates, int k,
                                     int basis_size) {
  if (static_cast<int>(candidates.size()) <= k) return candidates;
  AdditiveFit fit = fit_additive(x, target, candidates, basis_size);
  std::vector<double> imp(candidates.size(), 0.0);
  {
    std::vector<double> fitted = block_importance(fit, x.col(target));
    for (std::size_t b = 0; b < fit.covariates.size(); ++b) {
      auto it = std::find(candidates.begin(), candidates.end(), fit.covariates[b]);
      imp[static_cast<std::size_t>(it - candidates.begin())] = fitted[b];
    }
  }
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  std::vector<int> kept;
  for (std::size_t i : idx) kept.push_back(candidates[i]);
  return kept;
}

}  // namespace detail

// Per-edge p-values from the additive-model fits: for each node, a vector of
// (predecessor, p) pairs. Thresholding is a separate step so that sweeping
// alpha reuses the same fitted models (which also makes edge sets monotone in
// alpha by construction).
inline std::vector<std::vector<std::pair<int, double>>> cam_prune_pvalues(
    const Eigen::MatrixXd& x, const CausalOrder& order, const PruneConfig& cfg,
    const CandidateParents* candidates = nullptr) {
  const int d = static_cast<int>(x.cols());
  const Eigen::Index n = x.rows();
  validate_order(order, d);
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
    throw std::invalid_argument("cam_prune: alpha must be in (0,1)");
  if (cfg.pns_k < 1) throw std::invalid_argument("cam_prune: pns_k >= 1");
  if (candidates && static_cast<int>(candidates->size()) != d)
    throw std::invalid_argument("cam_prune: candidate sets must cover every node");

  const std::vector<int> pos = order_positions(order);
  std::vector<std::vector<std::pair<int, double>>> pvals(d);
  for (int p = 1; p < d; ++p) {
    const int node = order[p];
    std::vector<int> cand;
    if (candidates) {
      for (int c : (*candidates)[node]) {
        if (pos[c] >= p)
          throw std::invalid_argument("cam_prune: candidate does not precede its node");
        cand.push_back(c);
      }
      std::sort(cand.begin(), cand.end());
    } else {
      for (int q = 0; q < p; ++q) cand.push_back(order[q]);
      std::sort(cand.begin(), cand.end());
    }
    if (cand.empty()) continue;

    if (d > cfg.pns_threshold_nodes)
      cand = detail::select_top_k(x, node, cand, cfg.pns_k, cfg.basis_size);
    const int max_c = static_cast<int>((n - 2) / cfg.basis_size);
    if (max_c < 1)
      throw std::invalid_argument("cam_prune: sample too small for the basis size");
    if (static_cast<int>(cand.size()) > max_c)
      cand = detail::select_top_k(x, node, cand, max_c, cfg.basis_size);

    detail::AdditiveFit full = detail::fit_additive(x, node, cand, cfg.basis_size);
    const int p_full = static_cast<int>(full.design.cols());
    const double df2 = static_cast<double>(n - p_full);
    if (df2 < 1.0)
      throw std::invalid_argument("cam_prune: sample too small for the basis size");
    for (std::size_t b = 0; b < full.covariates.size(); ++b) {
      const double rss_reduced = detail::reduced_rss(full, b, x.col(node));
      const double df1 = full.block_width[b];
      double f_stat = ((rss_reduced - full.rss) / df1) / (full.rss / df2);
      double pv;
      if (!std::isfinite(f_stat) || full.rss <= 0.0) {
        pv = 0.0;  // perfect fit: the block explains everything left
      } else {
        f_stat = std::max(0.0, f_stat);
        boost::math::fisher_f_distribution<double> fdist(df1, df2);
        pv = boost::math::cdf(boost::math::complement(fdist, f_stat));
      }
      pvals[node].push_back({full.covariates[b], pv});
    }
  }
  return pvals;
}

inline Dag threshold_pvalues(const std::vector<std::vector<std::pair<int, double>>>& pvals,
                             double alpha) {
  Dag g(static_cast<int>(pvals.size()));
  for (int node = 0; node < g.d; ++node)
    for (const auto& [parent, p] : pvals[node])
      if (p < alpha) g.set_edge(parent, node, true);
  return g;
}

inline Dag cam_prune(const Eigen::MatrixXd& x, const CausalOrder& order,
                     const PruneConfig& cfg) {
  return threshold_pvalues(cam_prune_pvalues(x, order, cfg), cfg.alpha);
}

inline Dag prune_from_candidates(const Eigen::MatrixXd& x, const CausalOrder& order,
                                 const CandidateParents& candidates, const PruneConfig& cfg) {
  return threshold_pvalues(cam_prune_pvalues(x, order, cfg, &candidates), cfg.alpha);
}

// Preliminary neighbour search: rank order-predecessors of each node by the
// residual mass their block explains in the joint additive fit, keep the top k.
inline CandidateParents pns(const Eigen::MatrixXd& x, const CausalOrder& order, int k,
                            int basis_size = 10) {
  if (k < 1) throw std::invalid_argument("pns: k >= 1");
  const int d = static_cast<int>(x.cols());
  validate_order(order, d);
  CandidateParents out(d);
  for (int p = 1; p < d; ++p) {
    std::vector<int> cand;
    for (int q = 0; q < p; ++q) cand.push_back(order[q]);
    std::sort(cand.begin(), cand.end());
    out[order[p]] = detail::select_top_k(x, order[p], cand, k, basis_size);
  }
  return out;
}

}  // namespace cdbench
