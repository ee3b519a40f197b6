#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cdbench/dag.hpp"
#include "cdbench/discovery.hpp"
#include "cdbench/graphgen.hpp"
#include "cdbench/io.hpp"
#include "cdbench/metrics.hpp"
#include "cdbench/random.hpp"
#include "cdbench/scm.hpp"
#include "cdbench/stats.hpp"

namespace cdbench {

enum class AlphaSelection { Fixed, OracleBest };
enum class StandardizeMode { Auto, Always, Never };

struct ScenarioCell {
  ScenarioSpec spec;
  std::string params;  // canonical label, e.g. "gamma=0.8" or "delta=0.33;aw=1.5"
};

struct BenchConfig {
  std::vector<GraphConfig> graphs;
  std::vector<ScenarioCell> scenarios;
  std::vector<int> samples;
  std::vector<Method> methods;
  std::vector<double> alphas{0.05};
  std::vector<std::uint64_t> seeds;
  AlphaSelection alpha_selection = AlphaSelection::Fixed;
  StandardizeMode standardize = StandardizeMode::Auto;
  int jobs = 1;
  bool record_runtime = false;
  DiscoveryConfig discovery;
  PruneConfig prune;
};

struct BenchRecord {
  std::string scenario;
  std::string scenario_params;
  std::string graph;
  int nodes = 0;
  std::string density;
  int n = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<double> alpha;
  std::optional<Confusion> conf;
  std::optional<double> f1, fnr, fpr, fnr_order, bsf;
  std::optional<double> runtime_ms;
  std::string error;
};

inline constexpr const char* kResultsHeader =
    "scenario,scenario_params,graph,nodes,density,n,seed,method,alpha,"
    "tp,fp,fn,tn,f1,fnr,fpr,fnr_order,bsf,runtime_ms,error";

// --- config parsing ---------------------------------------------------------

namespace detail {

inline std::string param_label(const ScenarioSpec& s) {
  std::string out;
  switch (s.kind) {
    case ScenarioKind::Confounded: out = "rho=" + format_double(s.rho, "%.6g"); break;
    case ScenarioKind::MeasureError: out = "gamma=" + format_double(s.gamma, "%.6g"); break;
    case ScenarioKind::Lingam: out = "delta=" + format_double(s.delta, "%.6g"); break;
    case ScenarioKind::Autoregressive:
      out = "ar_alpha=" + format_double(s.ar_alpha, "%.6g");
      break;
    default: break;
  }
  if (s.noise.kind == NoiseKind::MlpNonGaussian || s.kind == ScenarioKind::Lingam) {
    if (!out.empty()) out += ";";
    out += "aw=" + format_double(s.noise.mlp_weight_bound, "%.6g");
  }
  return out;
}

inline std::vector<double> number_list(const nlohmann::json& j) {
  std::vector<double> out;
  if (j.is_array())
    for (const auto& v : j) out.push_back(v.get<double>());
  else
    out.push_back(j.get<double>());
  return out;
}

inline std::vector<ScenarioCell> expand_scenario(const nlohmann::json& j) {
  ScenarioSpec base;
  base.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("noise")) {
    const auto& nj = j["noise"];
    if (nj.contains("kind"))
      base.noise.kind =
          nj["kind"] == "mlp" ? NoiseKind::MlpNonGaussian : NoiseKind::Gaussian;
    if (nj.contains("variance_low")) base.noise.variance_low = nj["variance_low"].get<double>();
    if (nj.contains("variance_high"))
      base.noise.variance_high = nj["variance_high"].get<double>();
    if (nj.contains("mlp_hidden")) base.noise.mlp_hidden = nj["mlp_hidden"].get<int>();
  }
  std::vector<double> primary{0.0};
  const char* field = nullptr;
  switch (base.kind) {
    case ScenarioKind::Confounded: field = "rho"; break;
    case ScenarioKind::MeasureError: field = "gamma"; break;
    case ScenarioKind::Lingam: field = "delta"; break;
    case ScenarioKind::Autoregressive: field = "ar_alpha"; break;
    default: break;
  }
  if (field && j.contains(field)) primary = number_list(j[field]);
  std::vector<double> weight_bounds{base.noise.mlp_weight_bound};
  if (j.contains("noise") && j["noise"].contains("mlp_weight_bound"))
    weight_bounds = number_list(j["noise"]["mlp_weight_bound"]);

  std::vector<ScenarioCell> cells;
  for (double v : primary)
    for (double w : weight_bounds) {
      ScenarioSpec s = base;
      if (field) {
        if (base.kind == ScenarioKind::Confounded) s.rho = v;
        if (base.kind == ScenarioKind::MeasureError) s.gamma = v;
        if (base.kind == ScenarioKind::Lingam) s.delta = v;
        if (base.kind == ScenarioKind::Autoregressive) s.ar_alpha = v;
      }
      s.noise.mlp_weight_bound = w;
      cells.push_back({s, param_label(s)});
    }
  return cells;
}

inline GraphConfig graph_from_json(const nlohmann::json& j) {
  GraphConfig g;
  g.kind = graph_kind_from_string(j.at("kind").get<std::string>());
  const auto& nodes = j.at("nodes");
  if (nodes.is_array() && nodes.empty())
    throw std::invalid_argument("graph config: 'nodes' empty");
  g.d = (nodes.is_array() ? nodes[0] : nodes).get<int>();
  if (j.contains("density")) {
    const auto& dj = j["density"];
    if (dj.is_array() && dj.empty())
      throw std::invalid_argument("graph config: 'density' empty");
    g.density = density_from_string((dj.is_array() ? dj[0] : dj).get<std::string>());
  }
  if (j.contains("er_p")) g.er_p = j["er_p"].get<double>();
  if (j.contains("er_m")) g.er_m = j["er_m"].get<int>();
  if (j.contains("grp_p_in")) g.grp_p_in = j["grp_p_in"].get<double>();
  if (j.contains("grp_p_out")) g.grp_p_out = j["grp_p_out"].get<double>();
  return g;
}

}  // namespace detail

inline BenchConfig bench_config_from_json(const nlohmann::json& j) {
  BenchConfig cfg;
  if (!j.contains("graphs") || !j["graphs"].is_array() || j["graphs"].empty())
    throw std::invalid_argument("bench config: nonempty 'graphs' array required");
  for (const auto& g : j["graphs"]) {
    const auto gc = detail::graph_from_json(g);
    std::vector<Density> densities{gc.density};
    if (g.contains("density") && g["density"].is_array()) {
      densities.clear();
      for (const auto& s : g["density"]) densities.push_back(density_from_string(s));
    }
    std::vector<int> node_counts{gc.d};
    if (g["nodes"].is_array()) {
      node_counts.clear();
      for (const auto& v : g["nodes"]) node_counts.push_back(v.get<int>());
    }
    for (int d : node_counts)
      for (Density dens : densities) {
        GraphConfig one = gc;
        one.d = d;
        one.density = dens;
        cfg.graphs.push_back(one);
      }
  }
  if (!j.contains("scenarios") || !j["scenarios"].is_array() || j["scenarios"].empty())
    throw std::invalid_argument("bench config: nonempty 'scenarios' array required");
  for (const auto& s : j["scenarios"])
    for (auto& cell : detail::expand_scenario(s)) cfg.scenarios.push_back(cell);
  if (!j.contains("samples") || !j["samples"].is_array() || j["samples"].empty())
    throw std::invalid_argument("bench config: nonempty 'samples' array required");
  for (const auto& v : j["samples"]) cfg.samples.push_back(v.get<int>());
  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
    throw std::invalid_argument("bench config: nonempty 'methods' array required");
  for (const auto& v : j["methods"]) cfg.methods.push_back(method_from_string(v));
  if (j.contains("alphas")) {
    cfg.alphas.clear();
    for (const auto& v : j["alphas"]) cfg.alphas.push_back(v.get<double>());
    if (cfg.alphas.empty()) throw std::invalid_argument("bench config: 'alphas' empty");
  }
  if (j.contains("seeds")) {
    if (j["seeds"].is_array()) {
      for (const auto& v : j["seeds"]) cfg.seeds.push_back(v.get<std::uint64_t>());
    } else {
      const std::uint64_t start = j["seeds"].value("start", std::uint64_t{1});
      const int count = j["seeds"].value("count", 20);
      for (int i = 0; i < count; ++i) cfg.seeds.push_back(start + static_cast<std::uint64_t>(i));
    }
  } else {
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  }
  {
    std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size())
      throw std::invalid_argument("bench config: seeds must be distinct");
  }
  if (j.contains("alpha_selection")) {
    const std::string v = j["alpha_selection"];
    if (v == "fixed")
      cfg.alpha_selection = AlphaSelection::Fixed;
    else if (v == "oracle_best")
      cfg.alpha_selection = AlphaSelection::OracleBest;
    else
      throw std::invalid_argument("bench config: alpha_selection must be fixed|oracle_best");
  }
  if (j.contains("standardize")) {
    const std::string v = j["standardize"];
    if (v == "auto")
      cfg.standardize = StandardizeMode::Auto;
    else if (v == "always")
      cfg.standardize = StandardizeMode::Always;
    else if (v == "never")
      cfg.standardize = StandardizeMode::Never;
    else
      throw std::invalid_argument("bench config: standardize must be auto|always|never");
  }
  cfg.jobs = j.value("jobs", 1);
  cfg.record_runtime = j.value("record_runtime", false);
  if (j.contains("discovery")) {
    const auto& dj = j["discovery"];
    if (dj.contains("ridge")) cfg.discovery.ridge = dj["ridge"].get<double>();
    if (dj.contains("bandwidth")) cfg.discovery.bandwidth = dj["bandwidth"].get<double>();
    if (dj.contains("krr_ridge")) cfg.discovery.krr_ridge = dj["krr_ridge"].get<double>();
    if (dj.contains("nogam_folds")) cfg.discovery.nogam_folds = dj["nogam_folds"].get<int>();
    if (dj.contains("das_significance"))
      cfg.discovery.das_significance = dj["das_significance"].get<double>();
  }
  if (j.contains("prune")) {
    const auto& pj = j["prune"];
    if (pj.contains("basis_size")) cfg.prune.basis_size = pj["basis_size"].get<int>();
    if (pj.contains("pns_k")) cfg.prune.pns_k = pj["pns_k"].get<int>();
    if (pj.contains("pns_threshold_nodes"))
      cfg.prune.pns_threshold_nodes = pj["pns_threshold_nodes"].get<int>();
  }
  return cfg;
}

// --- running ----------------------------------------------------------------

namespace detail {

inline std::string graph_label(const GraphConfig& g) {
  std::string out = to_string(g.kind);
  if (g.er_p) out += ";p=" + format_double(*g.er_p, "%.6g");
  if (g.er_m) out += ";m=" + std::to_string(*g.er_m);
  if (g.grp_p_in) out += ";p_in=" + format_double(*g.grp_p_in, "%.6g");
  if (g.grp_p_out) out += ";p_out=" + format_double(*g.grp_p_out, "%.6g");
  return out;
}

// The dataset seed hashes the full cell descriptor (everything but method and
// alpha), so extending the method or alpha grids never reshuffles data.
inline std::string cell_descriptor(const GraphConfig& g, const ScenarioCell& sc, int n) {
  std::string out = "scenario=" + to_string(sc.spec.kind);
  if (!sc.params.empty()) out += ";" + sc.params;
  out += "|graph=" + graph_label(g) + ";d=" + std::to_string(g.d) +
         ";density=" + to_string(g.density);
  out += "|n=" + std::to_string(n);
  return out;
}

inline std::string sanitize_error(std::string msg) {
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return msg;
}

struct BenchJob {
  GraphConfig graph;
  ScenarioCell scenario;
  int n;
  std::uint64_t seed;
  Method method;
};

inline std::vector<BenchRecord> run_job(const BenchJob& job, const BenchConfig& cfg) {
  BenchRecord base;
  base.scenario = to_string(job.scenario.spec.kind);
  base.scenario_params = job.scenario.params;
  base.graph = to_string(job.graph.kind);
  base.nodes = job.graph.d;
  base.density = to_string(job.graph.density);
  base.n = job.n;
  base.seed = job.seed;
  base.method = to_string(job.method);

  std::vector<BenchRecord> rows;
  try {
    const std::uint64_t dataset_seed =
        stream_key(job.seed, cell_descriptor(job.graph, job.scenario, job.n), 0);
    auto graph_rng = make_stream(dataset_seed, "graph", 0);
    const Dag truth = sample_graph(job.graph, graph_rng);
    Dataset ds = generate(truth, job.scenario.spec, job.n, dataset_seed);
    const bool want_standardize =
        cfg.standardize == StandardizeMode::Always ||
        (cfg.standardize == StandardizeMode::Auto &&
         job.scenario.spec.kind == ScenarioKind::Lingam);
    if (want_standardize) ds = standardize(ds);

    const auto t0 = std::chrono::steady_clock::now();
    CausalOrder order;
    std::vector<std::vector<std::pair<int, double>>> pvals;
    std::optional<Dag> fixed_dag;  // random baseline: alpha plays no role
    switch (job.method) {
      case Method::Random: {
        auto rng = make_stream(dataset_seed, "random_baseline", 0);
        auto [o, g] = random_baseline(truth.d, rng);
        order = o;
        fixed_dag = g;
        break;
      }
      case Method::Das: {
        order = score_order(ds.x, cfg.discovery);
        const CandidateParents cand =
            das_candidates(ds.x, order, cfg.discovery.das_significance, cfg.discovery);
        pvals = cam_prune_pvalues(ds.x, order, cfg.prune, &cand);
        break;
      }
      default: {
        switch (job.method) {
          case Method::ScoreSort: order = scoresort_order(ds.x, cfg.discovery); break;
          case Method::Score: order = score_order(ds.x, cfg.discovery); break;
          case Method::NoGam:
            order = nogam_order(ds.x, cfg.discovery.nogam_folds, cfg.discovery);
            break;
          case Method::Resit: order = resit_order(ds.x, cfg.discovery); break;
          default: break;
        }
        pvals = cam_prune_pvalues(ds.x, order, cfg.prune);
        break;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();

    for (double alpha : cfg.alphas) {
      BenchRecord rec = base;
      rec.alpha = alpha;
      const Dag pred = fixed_dag ? *fixed_dag : threshold_pvalues(pvals, alpha);
      rec.conf = confusion(truth, pred);
      rec.f1 = f1_score(*rec.conf);
      rec.fnr = false_negative_rate(*rec.conf);
      rec.fpr = false_positive_rate(*rec.conf);
      rec.fnr_order = order_false_negative_rate(truth, order);
      try {
        rec.bsf = balanced_scoring_function(truth, pred);
      } catch (const std::invalid_argument&) {
        rec.bsf.reset();  // undefined for empty / fully connected truths
      }
      if (cfg.record_runtime) rec.runtime_ms = elapsed_ms;
      rows.push_back(std::move(rec));
    }
    if (cfg.alpha_selection == AlphaSelection::OracleBest) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (*rows[i].f1 > *rows[best].f1) best = i;
      rows = {rows[best]};
    }
  } catch (const std::exception& e) {
    BenchRecord rec = base;
    rec.error = sanitize_error(e.what());
    rows = {rec};
  }
  return rows;
}

inline bool record_less(const BenchRecord& a, const BenchRecord& b) {
  auto key = [](const BenchRecord& r) {
    return std::tie(r.scenario, r.scenario_params, r.graph, r.nodes, r.density, r.n, r.seed,
                    r.method);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  const double aa = a.alpha.value_or(-1.0), ba = b.alpha.value_or(-1.0);
  return aa < ba;
}

}  // namespace detail

inline int resolve_thread_count(int flag_jobs, int config_jobs) {
  if (flag_jobs > 0) return flag_jobs;
  if (const char* env = std::getenv("CAUSAL_BENCH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return config_jobs > 0 ? config_jobs : 1;
}

// Runs the full grid. Results are independent of the worker count: each job
// writes into its own slot and the final list is sorted canonically.
inline std::vector<BenchRecord> bench_run(const BenchConfig& cfg, int jobs_override = 0) {
  std::vector<detail::BenchJob> jobs;
  for (const auto& g : cfg.graphs)
    for (const auto& sc : cfg.scenarios)
      for (int n : cfg.samples)
        for (std::uint64_t seed : cfg.seeds)
          for (Method m : cfg.methods) jobs.push_back({g, sc, n, seed, m});

  const int threads = std::min<int>(resolve_thread_count(jobs_override, cfg.jobs),
                                    static_cast<int>(jobs.size()));
  std::vector<std::vector<BenchRecord>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      slots[i] = detail::run_job(jobs[i], cfg);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<BenchRecord> records;
  for (auto& s : slots)
    for (auto& r : s) records.push_back(std::move(r));
  std::sort(records.begin(), records.end(), detail::record_less);
  return records;
}

// --- results CSV ------------------------------------------------------------

inline std::string record_to_csv_line(const BenchRecord& r) {
  auto opt_num = [](const std::optional<double>& v) {
    return v ? format_double(*v, "%.6g") : std::string();
  };
  std::string line;
  line += r.scenario + "," + r.scenario_params + "," + r.graph + ",";
  line += std::to_string(r.nodes) + "," + r.density + "," + std::to_string(r.n) + ",";
  line += std::to_string(r.seed) + "," + r.method + "," + opt_num(r.alpha) + ",";
  if (r.conf) {
    line += std::to_string(r.conf->tp) + "," + std::to_string(r.conf->fp) + "," +
            std::to_string(r.conf->fn) + "," + std::to_string(r.conf->tn) + ",";
  } else {
    line += ",,,,";
  }
  line += opt_num(r.f1) + "," + opt_num(r.fnr) + "," + opt_num(r.fpr) + "," +
          opt_num(r.fnr_order) + "," + opt_num(r.bsf) + "," + opt_num(r.runtime_ms) + ",";
  line += r.error;
  return line;
}

inline void write_records_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : records) out += record_to_csv_line(r) + "\n";
  write_text_file(path, out);
}

inline std::vector<BenchRecord> read_records_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty results file");
  if (line != kResultsHeader) throw std::runtime_error(path + ": unexpected results header");
  std::vector<BenchRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 20)
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(lineno));
    auto opt_num = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    BenchRecord r;
    r.scenario = f[0];
    r.scenario_params = f[1];
    r.graph = f[2];
    r.nodes = std::stoi(f[3]);
    r.density = f[4];
    r.n = std::stoi(f[5]);
    r.seed = std::stoull(f[6]);
    r.method = f[7];
    r.alpha = opt_num(f[8]);
    if (!f[9].empty()) {
      Confusion c;
      c.tp = std::stoi(f[9]);
      c.fp = std::stoi(f[10]);
      c.fn = std::stoi(f[11]);
      c.tn = std::stoi(f[12]);
      r.conf = c;
    }
    r.f1 = opt_num(f[13]);
    r.fnr = opt_num(f[14]);
    r.fpr = opt_num(f[15]);
    r.fnr_order = opt_num(f[16]);
    r.bsf = opt_num(f[17]);
    r.runtime_ms = opt_num(f[18]);
    r.error = f[19];
    records.push_back(std::move(r));
  }
  return records;
}

// --- summaries --------------------------------------------------------------

struct SummaryStats {
  double median = 0, q25 = 0, q75 = 0, mean = 0, std_dev = 0;
  int count = 0;
};

struct SummaryRow {
  std::vector<std::pair<std::string, std::string>> keys;  // (name, value) per group-by key
  int count = 0;
  int failures = 0;
  std::map<std::string, SummaryStats> metrics;  // metric name -> stats
};

inline const std::vector<std::string>& summary_metric_names() {
  static const std::vector<std::string> names{"f1", "fnr", "fpr", "fnr_order", "bsf",
                                              "runtime_ms"};
  return names;
}

inline std::string record_key_value(const BenchRecord& r, const std::string& key) {
  if (key == "scenario") return r.scenario;
  if (key == "scenario_params") return r.scenario_params;
  if (key == "graph") return r.graph;
  if (key == "nodes") return std::to_string(r.nodes);
  if (key == "density") return r.density;
  if (key == "n") return std::to_string(r.n);
  if (key == "seed") return std::to_string(r.seed);
  if (key == "method") return r.method;
  if (key == "alpha") return r.alpha ? format_double(*r.alpha, "%.6g") : std::string();
  throw std::invalid_argument("unknown group-by key: " + key);
}

inline std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records,
                                         const std::vector<std::string>& group_by) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  if (group_by.empty()) throw std::invalid_argument("summarize: no group-by keys");
  // Numeric-aware ordering so n=100 sorts before n=1000.
  auto value_less = [](const std::string& a, const std::string& b) {
    char* enda = nullptr;
    char* endb = nullptr;
    const double da = std::strtod(a.c_str(), &enda);
    const double db = std::strtod(b.c_str(), &endb);
    const bool na = enda != a.c_str() && *enda == '\0' && !a.empty();
    const bool nb = endb != b.c_str() && *endb == '\0' && !b.empty();
    if (na && nb) return da < db;
    if (na != nb) return na;  // numbers before labels
    return a < b;
  };
  auto tuple_less = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;
      return value_less(a[i], b[i]);
    }
    return false;
  };
  std::map<std::vector<std::string>, std::vector<const BenchRecord*>, decltype(tuple_less)>
      groups(tuple_less);
  for (const auto& r : records) {
    std::vector<std::string> key;
    for (const auto& k : group_by) key.push_back(record_key_value(r, k));
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    for (std::size_t i = 0; i < group_by.size(); ++i) row.keys.push_back({group_by[i], key[i]});
    row.count = static_cast<int>(members.size());
    for (const auto* r : members)
      if (!r->error.empty()) ++row.failures;
    for (const auto& metric : summary_metric_names()) {
      std::vector<double> vals;
      for (const auto* r : members) {
        if (!r->error.empty()) continue;
        std::optional<double> v;
        if (metric == "f1") v = r->f1;
        else if (metric == "fnr") v = r->fnr;
        else if (metric == "fpr") v = r->fpr;
        else if (metric == "fnr_order") v = r->fnr_order;
        else if (metric == "bsf") v = r->bsf;
        else if (metric == "runtime_ms") v = r->runtime_ms;
        if (v) vals.push_back(*v);
      }
      if (vals.empty()) continue;
      SummaryStats st;
      st.median = quantile(vals, 0.5);
      st.q25 = quantile(vals, 0.25);
      st.q75 = quantile(vals, 0.75);
      st.mean = mean_of(vals);
      st.std_dev = sample_sd(vals);
      st.count = static_cast<int>(vals.size());
      row.metrics[metric] = st;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("write_summary_csv: no rows");
  std::string out;
  for (const auto& [name, value] : rows[0].keys) {
    (void)value;
    out += name + ",";
  }
  out += "count,failures";
  for (const auto& m : summary_metric_names())
    out += "," + m + "_median," + m + "_q25," + m + "_q75," + m + "_mean," + m + "_std";
  out += "\n";
  for (const auto& row : rows) {
    for (const auto& [name, value] : row.keys) {
      (void)name;
      out += value + ",";
    }
    out += std::to_string(row.count) + "," + std::to_string(row.failures);
    for (const auto& m : summary_metric_names()) {
      auto it = row.metrics.find(m);
      if (it == row.metrics.end()) {
        out += ",,,,,";
      } else {
        const auto& st = it->second;
        out += "," + format_double(st.median, "%.6g") + "," + format_double(st.q25, "%.6g") +
               "," + format_double(st.q75, "%.6g") + "," + format_double(st.mean, "%.6g") +
               "," + format_double(st.std_dev, "%.6g");
      }
    }
    out += "\n";
  }
  write_text_file(path, out);
}

inline nlohmann::json summary_to_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  auto num = [](double v) { return nlohmann::json::parse(format_double(v, "%.6g")); };
  for (const auto& row : rows) {
    nlohmann::json jrow;
    nlohmann::json keys;
    for (const auto& [name, value] : row.keys) keys[name] = value;
    jrow["keys"] = keys;
    jrow["count"] = row.count;
    jrow["failures"] = row.failures;
    nlohmann::json metrics;
    for (const auto& [name, st] : row.metrics) {
      nlohmann::json jm;
      jm["median"] = num(st.median);
      jm["q25"] = num(st.q25);
      jm["q75"] = num(st.q75);
      jm["mean"] = num(st.mean);
      jm["std"] = num(st.std_dev);
      jm["count"] = st.count;
      metrics[name] = jm;
    }
    jrow["metrics"] = metrics;
    out.push_back(jrow);
  }
  return out;
}

}  // namespace cdbench
