#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace cdbench {

constexpr double kDefaultRidge = 1e-3;

// Gram matrix with entries exp(-||a_r - b_s||^2 / (2*bandwidth^2)).
inline Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double bandwidth) {
  if (bandwidth <= 0.0) throw std::invalid_argument("rbf_gram: bandwidth must be positive");
  if (a.cols() != b.cols()) throw std::invalid_argument("rbf_gram: dimension mismatch");
  Eigen::VectorXd an = a.rowwise().squaredNorm();
  Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = an.replicate(1, b.rows()) + bn.transpose().replicate(a.rows(), 1) -
                       2.0 * (a * b.transpose());
  return (-d2.cwiseMax(0.0) / (2.0 * bandwidth * bandwidth)).array().exp();
}

// Median of pairwise Euclidean distances over at most max_rows rows (strided
// subsample for determinism). Falls back to the smallest positive distance
// when the median is 0; all-identical rows are a degenerate input.
inline double median_heuristic(const Eigen::MatrixXd& x, int max_rows = 1000) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("median_heuristic: need at least 2 rows");
  Eigen::MatrixXd sub;
  if (n > max_rows) {
    sub.resize(max_rows, x.cols());
    const double stride = static_cast<double>(n) / max_rows;
    for (int r = 0; r < max_rows; ++r) sub.row(r) = x.row(static_cast<Eigen::Index>(r * stride));
  } else {
    sub = x;
  }
  const Eigen::Index m = sub.rows();
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) d2.push_back((sub.row(i) - sub.row(j)).squaredNorm());
  auto mid = d2.begin() + (d2.size() - 1) / 2;
  std::nth_element(d2.begin(), mid, d2.end());
  double med = std::sqrt(*mid);
  if (med > 0.0) return med;
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : d2)
    if (v > 0.0) smallest = std::min(smallest, v);
  if (!std::isfinite(smallest))
    throw std::runtime_error("median_heuristic: all rows identical, bandwidth undefined");
  return std::sqrt(smallest);
}

struct KernelRidgeModel {
  Eigen::MatrixXd train_inputs;
  Eigen::VectorXd dual_coefficients;
  double target_mean = 0.0;
  double bandwidth = 1.0;
  double ridge = kDefaultRidge;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    return (rbf_gram(x, train_inputs, bandwidth) * dual_coefficients).array() + target_mean;
  }
};

// Kernel ridge regression on the mean-centered target: dual coefficients
// solve (K + ridge*I) c = y - mean(y); predictions add the mean back. The
// centering makes a constant target exact regardless of ridge.
inline KernelRidgeModel krr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                std::optional<double> bandwidth = std::nullopt,
                                double ridge = kDefaultRidge) {
  if (ridge <= 0.0) throw std::invalid_argument("krr_fit: ridge must be positive");
  if (x.rows() != y.size()) throw std::invalid_argument("krr_fit: x/y row mismatch");
  KernelRidgeModel model;
  model.train_inputs = x;
  model.bandwidth = bandwidth ? *bandwidth : median_heuristic(x);
  model.ridge = ridge;
  model.target_mean = y.mean();
  Eigen::MatrixXd K = rbf_gram(x, x, model.bandwidth);
  K.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("krr_fit: Cholesky factorization failed");
  model.dual_coefficients = llt.solve((y.array() - model.target_mean).matrix());
  return model;
}

struct HsicResult {
  double statistic = 0.0;  // biased V-statistic HSIC_b = tr(KH LH)/m^2
  double p_value = 1.0;
};

namespace detail {

inline Eigen::MatrixXd centered_gram(const Eigen::VectorXd& v) {
  Eigen::MatrixXd col(v.size(), 1);
  col.col(0) = v;
  Eigen::MatrixXd K = rbf_gram(col, col, median_heuristic(col));
  Eigen::VectorXd row_mean = K.rowwise().mean();
  double total_mean = K.mean();
  K.colwise() -= row_mean;
  K.rowwise() -= row_mean.transpose();
  K.array() += total_mean;
  return K;
}

}  // namespace detail

/**
 * HSIC independence test between two univariate samples.
 *
 * Statistic is the biased V-statistic HSIC_b = tr(KH LH)/m^2, which decays
 * toward zero under independence. The p-value uses the two-moment gamma
 * approximation of the null distribution of m*HSIC_b (Gretton et al.);
 * a permutation p-value (n_permutations resamples of y) is available behind
 * `use_permutation` for calibration work and consumes the supplied rng.
 */
inline HsicResult hsic_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            std::mt19937_64& rng, bool use_permutation = false,
                            int n_permutations = 500) {
  const Eigen::Index m = x.size();
  if (m != y.size()) throw std::invalid_argument("hsic_test: length mismatch");
  if (m < 20) throw std::invalid_argument("hsic_test: need at least 20 samples");

  Eigen::MatrixXd Kc, Lc;
  try {
    Kc = detail::centered_gram(x);
    Lc = detail::centered_gram(y);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("hsic_test: constant input, dependence undefined");
  }

  HsicResult result;
  result.statistic =
      (Kc.array() * Lc.array()).sum() / (static_cast<double>(m) * static_cast<double>(m));

  if (use_permutation) {
    Eigen::VectorXd yp = y;
    std::vector<Eigen::Index> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    int exceed = 0;
    for (int b = 0; b < n_permutations; ++b) {
      std::shuffle(idx.begin(), idx.end(), rng);
      for (Eigen::Index r = 0; r < m; ++r) yp[r] = y[idx[r]];
      Eigen::MatrixXd Lp = detail::centered_gram(yp);
      double stat =
          (Kc.array() * Lp.array()).sum() / (static_cast<double>(m) * static_cast<double>(m));
      if (stat >= result.statistic) ++exceed;
    }
    result.p_value = (1.0 + exceed) / (1.0 + n_permutations);
    return result;
  }

  // Gamma approximation: match mean/variance of m*HSIC_b under the null.
  const double md = static_cast<double>(m);
  Eigen::MatrixXd B = (Kc.array() * Lc.array() / 6.0).square();
  double var_hsic = (B.sum() - B.trace()) / (md * (md - 1.0));
  var_hsic *= 72.0 * (md - 4.0) * (md - 5.0) / (md * (md - 1.0) * (md - 2.0) * (md - 3.0));

  Eigen::MatrixXd col(m, 1);
  col.col(0) = x;
  Eigen::MatrixXd K = rbf_gram(col, col, median_heuristic(col));
  col.col(0) = y;
  Eigen::MatrixXd L = rbf_gram(col, col, median_heuristic(col));
  double mu_x = (K.sum() - K.trace()) / (md * (md - 1.0));
  double mu_y = (L.sum() - L.trace()) / (md * (md - 1.0));
  double mean_hsic = (1.0 + mu_x * mu_y - mu_x - mu_y) / md;

  if (var_hsic <= 0.0 || mean_hsic <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double shape = mean_hsic * mean_hsic / var_hsic;
  const double scale = var_hsic * md / mean_hsic;
  boost::math::gamma_distribution<double> dist(shape, scale);
  result.p_value = boost::math::cdf(boost::math::complement(dist, md * result.statistic));
  return result;
}

}  // namespace cdbench
