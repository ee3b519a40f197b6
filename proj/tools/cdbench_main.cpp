// Command-line front end: generate synthetic causal datasets, run discovery,
// evaluate predictions, and drive benchmark grids.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdbench/cdbench.hpp"

namespace {

using namespace cdbench;

int cmd_gen(const std::string& scenario_name, const std::string& graph_name, int nodes,
            const std::string& density_name, int samples, std::uint64_t seed,
            const std::string& out, std::optional<double> rho, std::optional<double> gamma,
            std::optional<double> delta, std::optional<double> ar_alpha,
            const std::string& noise_name, double noise_alpha, bool do_standardize,
            std::optional<double> er_p, std::optional<int> er_m) {
  ScenarioSpec spec;
  spec.kind = scenario_kind_from_string(scenario_name);
  auto reject_unless = [&](ScenarioKind want, const char* flag, bool given) {
    if (given && spec.kind != want)
      throw CLI::ValidationError(std::string(flag) + " only applies to scenario '" +
                                 to_string(want) + "'");
  };
  reject_unless(ScenarioKind::Confounded, "--rho", rho.has_value());
  reject_unless(ScenarioKind::MeasureError, "--gamma", gamma.has_value());
  reject_unless(ScenarioKind::Lingam, "--delta", delta.has_value());
  reject_unless(ScenarioKind::Autoregressive, "--ar-alpha", ar_alpha.has_value());
  if (rho) spec.rho = *rho;
  if (gamma) spec.gamma = *gamma;
  if (delta) spec.delta = *delta;
  if (ar_alpha) spec.ar_alpha = *ar_alpha;
  if (noise_name == "mlp")
    spec.noise.kind = NoiseKind::MlpNonGaussian;
  else if (noise_name != "gaussian")
    throw CLI::ValidationError("--noise must be gaussian or mlp");
  spec.noise.mlp_weight_bound = noise_alpha;

  GraphConfig gc;
  gc.kind = graph_kind_from_string(graph_name);
  gc.d = nodes;
  gc.density = density_from_string(density_name);
  gc.er_p = er_p;
  gc.er_m = er_m;

  const std::uint64_t dataset_seed = seed;
  auto graph_rng = make_stream(dataset_seed, "graph", 0);
  const Dag truth = sample_graph(gc, graph_rng);
  Dataset ds = generate(truth, spec, samples, dataset_seed);
  ds.graph_config = gc;
  if (do_standardize) ds = standardize(ds);
  save_dataset(ds, out);
  std::printf("wrote %s.data.csv (%d x %d), %s.truth.csv, %s.meta.json\n", out.c_str(),
              ds.n, ds.truth.d, out.c_str(), out.c_str());
  return 0;
}

int cmd_discover(const std::string& method_name, const std::string& in, const std::string& out,
                 double alpha, double das_significance, double ridge,
                 std::optional<double> bandwidth, int folds, std::uint64_t seed) {
  const Method method = method_from_string(method_name);
  const Dataset ds = load_dataset(in);
  DiscoveryConfig dcfg;
  dcfg.ridge = ridge;
  dcfg.bandwidth = bandwidth;
  dcfg.nogam_folds = folds;
  dcfg.das_significance = das_significance;
  PruneConfig pcfg;
  pcfg.alpha = alpha;
  const DiscoveryResult res = discover(method, ds.x, dcfg, pcfg, seed);
  save_order(res.order, out + ".order.txt");
  save_adjacency_csv(res.dag, out + ".pred.csv");
  std::printf("wrote %s.order.txt, %s.pred.csv (%d edges)\n", out.c_str(), out.c_str(),
              res.dag.edge_count());
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& order_path, const std::string& out) {
  const Dag pred = load_adjacency_csv(pred_path);
  const Dag truth = load_adjacency_csv(truth_path);
  std::optional<CausalOrder> order;
  if (!order_path.empty()) order = load_order(order_path);
  const nlohmann::json j = metrics_json(truth, pred, order ? &*order : nullptr);
  const std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text_file(out, text);
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int jobs) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(config_path));
  } catch (const std::exception& e) {
    throw CLI::ValidationError(std::string("cannot read config: ") + e.what());
  }
  BenchConfig cfg;
  try {
    cfg = bench_config_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
  const std::vector<BenchRecord> records = bench_run(cfg, jobs);
  write_records_csv(records, out);
  int failures = 0;
  for (const auto& r : records)
    if (!r.error.empty()) ++failures;
  std::printf("wrote %s: %zu records, %d failed\n", out.c_str(), records.size(), failures);
  return 0;
}

int cmd_report(const std::string& in, const std::string& group_by_csv, const std::string& out) {
  std::vector<std::string> keys;
  std::string cur;
  for (char c : group_by_csv + ",") {
    if (c == ',') {
      if (!cur.empty()) keys.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  std::vector<BenchRecord> records;
  try {
    records = read_records_csv(in);
  } catch (const std::exception& e) {
    throw CLI::ValidationError(std::string("cannot read results: ") + e.what());
  }
  if (records.empty()) throw CLI::ValidationError("results file has no records");
  std::vector<SummaryRow> rows;
  try {
    rows = summarize(records, keys);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
  if (out.size() >= 5 && out.substr(out.size() - 5) == ".json")
    write_text_file(out, summary_to_json(rows).dump(2) + "\n");
  else
    write_summary_csv(rows, out);
  std::printf("wrote %s: %zu groups\n", out.c_str(), rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic causal-discovery benchmark toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  std::string g_scenario, g_graph, g_density = "sparse", g_out, g_noise = "gaussian";
  int g_nodes = 0, g_samples = 0;
  std::uint64_t g_seed = 0;
  std::optional<double> g_rho, g_gamma, g_delta, g_ar_alpha, g_er_p;
  std::optional<int> g_er_m;
  double g_noise_alpha = 1.5;
  bool g_standardize = false;
  gen->add_option("--scenario", g_scenario,
                  "vanilla|pnl|lingam|confounded|measure_error|unfaithful|autoregressive")
      ->required();
  gen->add_option("--graph", g_graph, "er|sf|grp|fc")->required();
  gen->add_option("--nodes", g_nodes, "number of nodes")->required()->check(CLI::PositiveNumber);
  gen->add_option("--density", g_density, "sparse|dense (default sparse)");
  gen->add_option("--samples", g_samples, "sample size")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "64-bit seed")->required();
  gen->add_option("--out", g_out, "output stem; writes <out>.data.csv/.truth.csv/.meta.json")
      ->required();
  gen->add_option("--rho", g_rho, "confounded: pairwise confounder probability");
  gen->add_option("--gamma", g_gamma, "measure_error: noise-to-signal variance ratio");
  gen->add_option("--delta", g_delta, "lingam: fraction of linear mechanisms");
  gen->add_option("--ar-alpha", g_ar_alpha, "autoregressive: lag-1 coefficient");
  gen->add_option("--noise", g_noise, "gaussian|mlp noise distribution (default gaussian)");
  gen->add_option("--noise-alpha", g_noise_alpha, "mlp noise weight bound (default 1.5)");
  gen->add_flag("--standardize", g_standardize, "rescale columns to unit variance");
  gen->add_option("--er-p", g_er_p, "er: explicit edge probability");
  gen->add_option("--er-m", g_er_m, "er: expected edges per node");

  // discover
  auto* disc = app.add_subcommand("discover", "Infer an order and a pruned graph");
  std::string d_method, d_in, d_out;
  double d_alpha = 0.05, d_das_sig = 0.05, d_ridge = kDefaultRidge;
  std::optional<double> d_bandwidth;
  int d_folds = 5;
  std::uint64_t d_seed = 0;
  disc->add_option("--method", d_method, "scoresort|score|nogam|resit|das|random")->required();
  disc->add_option("--in", d_in, "dataset stem (as written by gen)")->required();
  disc->add_option("--out", d_out, "output stem; writes <out>.order.txt and <out>.pred.csv")
      ->required();
  disc->add_option("--alpha", d_alpha, "pruning significance threshold (default 0.05)");
  disc->add_option("--das-significance", d_das_sig,
                   "das: candidate-test significance (default 0.05)");
  disc->add_option("--ridge", d_ridge, "score-estimator ridge (default 1e-3)");
  disc->add_option("--bandwidth", d_bandwidth, "fixed kernel bandwidth (default: median)");
  disc->add_option("--folds", d_folds, "nogam: cross-validation folds (default 5)");
  disc->add_option("--seed", d_seed, "seed for the random baseline");

  // eval
  auto* ev = app.add_subcommand("eval", "Score a predicted graph against the truth");
  std::string e_pred, e_truth, e_order, e_out;
  ev->add_option("--pred", e_pred, "predicted adjacency CSV")->required();
  ev->add_option("--truth", e_truth, "ground-truth adjacency CSV")->required();
  ev->add_option("--order", e_order, "inferred order file (enables fnr_order)");
  ev->add_option("--out", e_out, "write JSON here instead of stdout");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark grid from a JSON config");
  std::string b_config, b_out;
  int b_jobs = 0;
  bench->add_option("--config", b_config, "JSON config file")->required();
  bench->add_option("--out", b_out, "results CSV path")->required();
  bench->add_option("--jobs", b_jobs, "parallel jobs (overrides config and env)");

  // report
  auto* rep = app.add_subcommand("report", "Summarize a results CSV");
  std::string r_in, r_group = "scenario,method", r_out;
  rep->add_option("--in", r_in, "results CSV from bench")->required();
  rep->add_option("--group-by", r_group, "comma-separated group keys (default scenario,method)");
  rep->add_option("--out", r_out, "summary path (.json for JSON, otherwise CSV)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen(g_scenario, g_graph, g_nodes, g_density, g_samples, g_seed, g_out, g_rho,
                     g_gamma, g_delta, g_ar_alpha, g_noise, g_noise_alpha, g_standardize,
                     g_er_p, g_er_m);
    if (disc->parsed())
      return cmd_discover(d_method, d_in, d_out, d_alpha, d_das_sig, d_ridge, d_bandwidth,
                          d_folds, d_seed);
    if (ev->parsed()) return cmd_eval(e_pred, e_truth, e_order, e_out);
    if (bench->parsed()) return cmd_bench(b_config, b_out, b_jobs);
    if (rep->parsed()) return cmd_report(r_in, r_group, r_out);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
