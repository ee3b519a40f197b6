#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdbench/dag.hpp"
#include "cdbench/graphgen.hpp"
#include "cdbench/io.hpp"
#include "cdbench/kernels.hpp"
#include "cdbench/random.hpp"

namespace cdbench {

enum class NoiseKind { Gaussian, MlpNonGaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double variance_low = 0.5;   // sigma_i ~ U(variance_low, variance_high), a variance
  double variance_high = 1.0;
  double mlp_weight_bound = 1.5;  // alpha_w, weights ~ U(-alpha_w, alpha_w)
  int mlp_hidden = 100;
};

enum class ScenarioKind {
  Vanilla,
  Pnl,
  Lingam,
  Confounded,
  MeasureError,
  Unfaithful,
  Autoregressive
};

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Vanilla: return "vanilla";
    case ScenarioKind::Pnl: return "pnl";
    case ScenarioKind::Lingam: return "lingam";
    case ScenarioKind::Confounded: return "confounded";
    case ScenarioKind::MeasureError: return "measure_error";
    case ScenarioKind::Unfaithful: return "unfaithful";
    case ScenarioKind::Autoregressive: return "autoregressive";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "vanilla") return ScenarioKind::Vanilla;
  if (s == "pnl") return ScenarioKind::Pnl;
  if (s == "lingam") return ScenarioKind::Lingam;
  if (s == "confounded") return ScenarioKind::Confounded;
  if (s == "measure_error") return ScenarioKind::MeasureError;
  if (s == "unfaithful") return ScenarioKind::Unfaithful;
  if (s == "autoregressive") return ScenarioKind::Autoregressive;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Vanilla;
  NoiseSpec noise;
  double rho = 0.1;      // Confounded: probability a node pair shares a latent cause
  double gamma = 0.2;    // MeasureError: Var(eps_i) / Var(X_i)
  double delta = 1.0;    // Lingam: fraction of linear structural equations
  double ar_alpha = 0.5; // Autoregressive: lag-1 coefficient
};

struct Dataset {
  Eigen::MatrixXd x;
  Dag truth;
  ScenarioSpec scenario;
  std::optional<GraphConfig> graph_config;
  std::uint64_t seed = 0;
  int n = 0;
  bool standardized = false;
};

// One draw from N(0, K), K the RBF Gram of the parent rows at the given
// bandwidth. The Gaussian vector is drawn before factorization so the jitter
// ladder never shifts stream consumption; the ladder starts tiny so that a
// degenerate (e.g. constant-parent) kernel still yields an almost exact
// perfectly-correlated draw.
inline Eigen::VectorXd gp_mechanism(const Eigen::MatrixXd& parent_values, std::mt19937_64& rng,
                                    double bandwidth = 1.0) {
  const Eigen::Index n = parent_values.rows();
  if (n < 1 || parent_values.cols() < 1)
    throw std::invalid_argument("gp_mechanism: empty parent matrix");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index r = 0; r < n; ++r) z[r] = gauss(rng);
  Eigen::MatrixXd K = rbf_gram(parent_values, parent_values, bandwidth);
  for (double jitter = 1e-12; jitter <= 1e-2; jitter *= 100.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) return llt.matrixL() * z;
  }
  throw std::runtime_error("gp_mechanism: factorization failed after jitter escalation");
}

// Random single-hidden-layer MLP push-forward of the noise sample:
// u~ = W2 * sigmoid(W1 * u + b1), recentered to mean 0 over the sample.
inline Eigen::VectorXd transform_noise_mlp(const Eigen::VectorXd& u, const NoiseSpec& spec,
                                           std::mt19937_64& rng) {
  if (spec.mlp_hidden < 1) throw std::invalid_argument("transform_noise_mlp: hidden width >= 1");
  const int h = spec.mlp_hidden;
  std::uniform_real_distribution<double> w(-spec.mlp_weight_bound, spec.mlp_weight_bound);
  Eigen::VectorXd w1(h), b1(h), w2(h);
  for (int k = 0; k < h; ++k) w1[k] = w(rng);
  for (int k = 0; k < h; ++k) b1[k] = w(rng);
  for (int k = 0; k < h; ++k) w2[k] = w(rng);
  Eigen::VectorXd out(u.size());
  for (Eigen::Index r = 0; r < u.size(); ++r) {
    double acc = 0.0;
    for (int k = 0; k < h; ++k) acc += w2[k] / (1.0 + std::exp(-(w1[k] * u[r] + b1[k])));
    out[r] = acc;
  }
  out.array() -= out.mean();
  return out;
}

namespace detail {

inline double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

inline Eigen::VectorXd draw_noise(int node, const ScenarioSpec& scenario, Eigen::Index n,
                                  std::uint64_t seed, double* sigma_out = nullptr) {
  auto sigma_rng = make_stream(seed, "sigma", node);
  std::uniform_real_distribution<double> var_draw(scenario.noise.variance_low,
                                                  scenario.noise.variance_high);
  const double sigma = var_draw(sigma_rng);  // a variance, per the model spec
  if (sigma_out) *sigma_out = sigma;
  auto noise_rng = make_stream(seed, "noise", node);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma));
  Eigen::VectorXd u(n);
  for (Eigen::Index r = 0; r < n; ++r) u[r] = gauss(noise_rng);
  const bool non_gaussian = scenario.noise.kind == NoiseKind::MlpNonGaussian ||
                            scenario.kind == ScenarioKind::Lingam;
  if (non_gaussian) {
    auto mlp_rng = make_stream(seed, "mlp", node);
    u = transform_noise_mlp(u, scenario.noise, mlp_rng);
  }
  return u;
}

// Rewired triplet i -> j -> k with i -> k, per the unfaithful construction:
// the shared mechanism f on X_i enters X_j with +f and X_k with +f - X_j, so
// the direct X_i -> X_k effect cancels exactly.
struct UnfaithfulTriplet {
  int i, j, k;
};

inline std::vector<UnfaithfulTriplet> rewired_triplets(const Dag& g) {
  std::vector<UnfaithfulTriplet> out;
  std::set<std::pair<int, int>> used;
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j) {
      if (j == i || !g.edge(i, j)) continue;
      for (int k = 0; k < g.d; ++k) {
        if (k == i || k == j || !g.edge(j, k) || !g.edge(i, k)) continue;
        std::pair<int, int> e1{i, j}, e2{j, k}, e3{i, k};
        if (used.count(e1) || used.count(e2) || used.count(e3)) continue;
        used.insert(e1);
        used.insert(e2);
        used.insert(e3);
        out.push_back({i, j, k});
      }
    }
  return out;
}

inline void validate_scenario(const ScenarioSpec& s) {
  if (s.rho < 0.0 || s.rho > 1.0) throw std::invalid_argument("scenario: rho must be in [0,1]");
  if (s.gamma <= 0.0 || s.gamma > 1.0)
    throw std::invalid_argument("scenario: gamma must be in (0,1]");
  if (s.delta <= 0.0 || s.delta > 1.0)
    throw std::invalid_argument("scenario: delta must be in (0,1]");
  if (s.noise.variance_low <= 0.0 || s.noise.variance_low > s.noise.variance_high)
    throw std::invalid_argument("scenario: need 0 < variance_low <= variance_high");
}

}  // namespace detail

inline Dataset generate(const Dag& truth, const ScenarioSpec& scenario, int n,
                        std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  detail::validate_scenario(scenario);
  const int d = truth.d;
  const CausalOrder order = topological_sort(truth);

  Dataset ds;
  ds.truth = truth;
  ds.scenario = scenario;
  ds.seed = seed;
  ds.n = n;
  ds.x.setZero(n, d);
  Eigen::MatrixXd& X = ds.x;

  // Confounder structure is decided up front from dedicated streams; with
  // rho=0 nothing here consumes from any node stream, keeping the output
  // bit-identical to Vanilla.
  std::vector<Eigen::VectorXd> confounder_terms(d, Eigen::VectorXd());
  if (scenario.kind == ScenarioKind::Confounded && scenario.rho > 0.0) {
    std::uint64_t pair_index = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++pair_index) {
        auto coin_rng = make_stream(seed, "confound", pair_index);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(coin_rng) >= scenario.rho) continue;
        auto z_rng = make_stream(seed, "confound_z", pair_index);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd z(n, 1);
        for (int r = 0; r < n; ++r) z(r, 0) = gauss(z_rng);
        for (int side = 0; side < 2; ++side) {
          auto map_rng = make_stream(seed, "confound_map", 2 * pair_index + side);
          Eigen::VectorXd term = gp_mechanism(z, map_rng);
          int target = side == 0 ? i : j;
          if (confounder_terms[target].size() == 0)
            confounder_terms[target] = term;
          else
            confounder_terms[target] += term;
        }
      }
  }

  std::vector<detail::UnfaithfulTriplet> triplets;
  if (scenario.kind == ScenarioKind::Unfaithful) triplets = detail::rewired_triplets(truth);
  std::map<int, Eigen::VectorXd> shared_mechanism;  // triplet index -> f(X_i)

  for (int node : order) {
    const std::vector<int> pa = truth.parents(node);
    Eigen::VectorXd u = detail::draw_noise(node, scenario, n, seed);
    Eigen::MatrixXd pa_values(n, static_cast<Eigen::Index>(pa.size()));
    for (std::size_t c = 0; c < pa.size(); ++c) pa_values.col(c) = X.col(pa[c]);

    switch (scenario.kind) {
      case ScenarioKind::Vanilla:
      case ScenarioKind::Confounded:
      case ScenarioKind::MeasureError: {
        Eigen::VectorXd col = u;
        if (!pa.empty()) {
          auto mech_rng = make_stream(seed, "mech", node);
          col += gp_mechanism(pa_values, mech_rng);
        }
        if (confounder_terms[node].size() != 0) col += confounder_terms[node];
        X.col(node) = col;
        break;
      }
      case ScenarioKind::Pnl: {
        Eigen::VectorXd v = u;
        if (!pa.empty()) {
          auto mech_rng = make_stream(seed, "mech", node);
          v += gp_mechanism(pa_values, mech_rng);
        }
        // g(x) = x^3 on inputs rescaled to unit sample sd, bounding magnitudes.
        double sd = std::sqrt(detail::sample_variance(v));
        if (sd < 1e-12) sd = 1.0;
        X.col(node) = (v / sd).array().cube();
        break;
      }
      case ScenarioKind::Lingam: {
        auto kind_rng = make_stream(seed, "lin_kind", node);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const bool linear = unif(kind_rng) < scenario.delta;
        Eigen::VectorXd col = u;
        if (!pa.empty()) {
          if (linear) {
            auto coef_rng = make_stream(seed, "lin_coef", node);
            std::uniform_real_distribution<double> mag(0.05, 1.0);
            for (std::size_t c = 0; c < pa.size(); ++c) {
              double b = mag(coef_rng);
              if (unif(coef_rng) < 0.5) b = -b;
              col += b * pa_values.col(c);
            }
          } else {
            auto mech_rng = make_stream(seed, "mech", node);
            col += gp_mechanism(pa_values, mech_rng);
          }
        }
        X.col(node) = col;
        break;
      }
      case ScenarioKind::Unfaithful: {
        // Rewired nodes (j or k of some triplet) switch to per-parent
        // additive mechanisms so the shared term can cancel; everyone else
        // keeps the joint GP draw. Triplets are edge-disjoint, so each
        // incoming edge matches at most one triplet role.
        bool rewired = false;
        for (const auto& t : triplets)
          if (t.j == node || t.k == node) rewired = true;
        Eigen::VectorXd col = u;
        if (!rewired) {
          if (!pa.empty()) {
            auto mech_rng = make_stream(seed, "mech", node);
            col += gp_mechanism(pa_values, mech_rng);
          }
        } else {
          for (int p : pa) {
            int shared_idx = -1;
            bool subtract = false;
            for (std::size_t t = 0; t < triplets.size(); ++t) {
              if (p == triplets[t].i && (triplets[t].j == node || triplets[t].k == node))
                shared_idx = static_cast<int>(t);
              if (p == triplets[t].j && triplets[t].k == node) subtract = true;
            }
            if (shared_idx >= 0) {
              auto& f = shared_mechanism[shared_idx];
              if (f.size() == 0) {
                auto rng = make_stream(seed, "mech_shared", shared_idx);
                f = gp_mechanism(X.col(p), rng);
              }
              col += f;
            } else if (subtract) {
              col -= X.col(p);
            } else {
              auto rng = make_stream(seed, "mech_add",
                                     static_cast<std::uint64_t>(node) * d + p);
              col += gp_mechanism(X.col(p), rng);
            }
          }
        }
        X.col(node) = col;
        break;
      }
      case ScenarioKind::Autoregressive: {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        if (!pa.empty()) {
          auto mech_rng = make_stream(seed, "mech", node);
          f = gp_mechanism(pa_values, mech_rng);
        }
        Eigen::VectorXd col(n);
        col[0] = f[0] + u[0];
        for (int t = 1; t < n; ++t) col[t] = scenario.ar_alpha * col[t - 1] + f[t] + u[t];
        X.col(node) = col;
        break;
      }
    }
  }

  if (scenario.kind == ScenarioKind::MeasureError) {
    for (int i = 0; i < d; ++i) {
      const double var_i = detail::sample_variance(X.col(i));
      auto eps_rng = make_stream(seed, "measure", i);
      std::normal_distribution<double> gauss(0.0, std::sqrt(scenario.gamma * var_i));
      for (int r = 0; r < n; ++r) X(r, i) += gauss(eps_rng);
    }
  }

  if (!X.allFinite()) throw std::runtime_error("generate: non-finite values produced");
  return ds;
}

// Scale-only standardization: each column divided by its sample standard
// deviation; the mean is kept unless remove_mean is set.
inline Dataset standardize(const Dataset& ds, bool remove_mean = false) {
  Dataset out = ds;
  for (Eigen::Index j = 0; j < out.x.cols(); ++j) {
    const double var = detail::sample_variance(out.x.col(j));
    if (var <= 0.0)
      throw std::runtime_error("standardize: zero-variance column " + std::to_string(j));
    if (remove_mean) out.x.col(j).array() -= out.x.col(j).mean();
    out.x.col(j) /= std::sqrt(var);
  }
  out.standardized = true;
  return out;
}

// --- dataset files --------------------------------------------------------

namespace detail {

inline nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == ScenarioKind::Confounded) j["rho"] = s.rho;
  if (s.kind == ScenarioKind::MeasureError) j["gamma"] = s.gamma;
  if (s.kind == ScenarioKind::Lingam) j["delta"] = s.delta;
  if (s.kind == ScenarioKind::Autoregressive) j["ar_alpha"] = s.ar_alpha;
  nlohmann::json noise;
  noise["kind"] = s.noise.kind == NoiseKind::Gaussian ? "gaussian" : "mlp";
  noise["variance_low"] = s.noise.variance_low;
  noise["variance_high"] = s.noise.variance_high;
  if (s.noise.kind == NoiseKind::MlpNonGaussian || s.kind == ScenarioKind::Lingam) {
    noise["mlp_weight_bound"] = s.noise.mlp_weight_bound;
    noise["mlp_hidden"] = s.noise.mlp_hidden;
  }
  j["noise"] = noise;
  return j;
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  s.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("rho")) s.rho = j["rho"].get<double>();
  if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
  if (j.contains("delta")) s.delta = j["delta"].get<double>();
  if (j.contains("ar_alpha")) s.ar_alpha = j["ar_alpha"].get<double>();
  if (j.contains("noise")) {
    const auto& nj = j["noise"];
    if (nj.contains("kind"))
      s.noise.kind = nj["kind"] == "mlp" ? NoiseKind::MlpNonGaussian : NoiseKind::Gaussian;
    if (nj.contains("variance_low")) s.noise.variance_low = nj["variance_low"].get<double>();
    if (nj.contains("variance_high")) s.noise.variance_high = nj["variance_high"].get<double>();
    if (nj.contains("mlp_weight_bound"))
      s.noise.mlp_weight_bound = nj["mlp_weight_bound"].get<double>();
    if (nj.contains("mlp_hidden")) s.noise.mlp_hidden = nj["mlp_hidden"].get<int>();
  }
  return s;
}

inline nlohmann::json graph_config_to_json(const GraphConfig& g) {
  nlohmann::json j;
  j["kind"] = to_string(g.kind);
  j["nodes"] = g.d;
  j["density"] = to_string(g.density);
  if (g.er_p) j["er_p"] = *g.er_p;
  if (g.er_m) j["er_m"] = *g.er_m;
  if (g.grp_p_in) j["grp_p_in"] = *g.grp_p_in;
  if (g.grp_p_out) j["grp_p_out"] = *g.grp_p_out;
  return j;
}

inline GraphConfig graph_config_from_json(const nlohmann::json& j) {
  GraphConfig g;
  g.kind = graph_kind_from_string(j.at("kind").get<std::string>());
  g.d = j.at("nodes").get<int>();
  if (j.contains("density")) g.density = density_from_string(j["density"].get<std::string>());
  if (j.contains("er_p")) g.er_p = j["er_p"].get<double>();
  if (j.contains("er_m")) g.er_m = j["er_m"].get<int>();
  if (j.contains("grp_p_in")) g.grp_p_in = j["grp_p_in"].get<double>();
  if (j.contains("grp_p_out")) g.grp_p_out = j["grp_p_out"].get<double>();
  return g;
}

}  // namespace detail

inline void save_dataset(const Dataset& ds, const std::string& stem) {
  save_matrix_csv(ds.x, stem + ".data.csv");
  save_adjacency_csv(ds.truth, stem + ".truth.csv");
  nlohmann::json meta;
  meta["scenario"] = detail::scenario_to_json(ds.scenario);
  meta["graph"] = ds.graph_config ? detail::graph_config_to_json(*ds.graph_config)
                                  : nlohmann::json(nullptr);
  meta["seed"] = ds.seed;
  meta["n"] = ds.x.rows();
  meta["d"] = ds.x.cols();
  meta["standardized"] = ds.standardized;
  write_text_file(stem + ".meta.json", meta.dump(2) + "\n");
}

inline Dataset load_dataset(const std::string& stem) {
  Dataset ds;
  ds.x = load_matrix_csv(stem + ".data.csv");
  ds.truth = load_adjacency_csv(stem + ".truth.csv");
  nlohmann::json meta = nlohmann::json::parse(read_text_file(stem + ".meta.json"));
  ds.scenario = detail::scenario_from_json(meta.at("scenario"));
  if (meta.contains("graph") && !meta["graph"].is_null())
    ds.graph_config = detail::graph_config_from_json(meta["graph"]);
  ds.seed = meta.value("seed", std::uint64_t{0});
  ds.n = meta.value("n", static_cast<int>(ds.x.rows()));
  ds.standardized = meta.value("standardized", false);
  if (ds.x.cols() != ds.truth.d)
    throw std::runtime_error(stem + ": data column count does not match truth node count");
  return ds;
}

}  // namespace cdbench
