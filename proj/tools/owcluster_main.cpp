// owcluster: command-line front end for the clustering pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "owcluster/evaluation.hpp"
#include "owcluster/io.hpp"
#include "owcluster/pipeline.hpp"
#include "owcluster/pseudo_label.hpp"

using namespace owcluster;
using nlohmann::ordered_json;

namespace {

// Raw flag values; each is applied only when it was given on the command line.
struct Flags {
  std::string input, format, labels, out, config, write_embedding, metric, engine, estimator, reducer;
  std::string assignment;
  RngSeed seed = 0;
  std::size_t dims = 0, n_neighbors = 0, k = 0, k_min = 0, k_max = 0, budget = 0, init_points = 0;
  std::size_t n_init = 0, max_iter = 0, restarts = 0, graph_k = 0, reducer_iter = 0;
  double perplexity = 0.0, min_dist = 0.0, percentile = 0.5;
  bool normalize = true;
  // Every subcommand registers its own copy of a flag under the same name.
  std::map<std::string, std::vector<CLI::Option*>> given;

  void track(const std::string& name, CLI::Option* opt) { given[name].push_back(opt); }
  bool has(const std::string& name) const {
    const auto it = given.find(name);
    if (it == given.end()) return false;
    for (const auto* opt : it->second)
      if (opt->count() > 0) return true;
    return false;
  }
};

void add_shared(CLI::App* sub, Flags& f) {
  f.track("input", sub->add_option("--input", f.input, "embedding file (OWCL or CSV)"));
  f.track("format", sub->add_option("--format", f.format, "input format")->check(CLI::IsMember({"owcl", "csv"})));
  f.track("labels", sub->add_option("--labels", f.labels, "embedded, none, or a label file"));
  f.track("out", sub->add_option("--out", f.out, "write the JSON report here instead of stdout"));
  f.track("seed", sub->add_option("--seed", f.seed, "random seed"));
  f.track("config", sub->add_option("--config", f.config, "JSON configuration (a report's config_echo)"));
}

void add_reduce_flags(CLI::App* sub, Flags& f) {
  f.track("reducer", sub->add_option("--reducer", f.reducer, "none, pca, mds, isomap, tsne, umap"));
  f.track("dims", sub->add_option("--dims", f.dims, "target dimensionality"));
  f.track("perplexity", sub->add_option("--perplexity", f.perplexity, "t-SNE perplexity"));
  f.track("n-neighbors", sub->add_option("--n-neighbors", f.n_neighbors, "UMAP / Isomap neighbors"));
  f.track("min-dist", sub->add_option("--min-dist", f.min_dist, "UMAP min_dist"));
  f.track("reducer-iter", sub->add_option("--reducer-iter", f.reducer_iter, "t-SNE iterations / UMAP epochs"));
  f.track("normalize", sub->add_flag("--normalize,!--no-normalize", f.normalize, "L2-normalize rows first"));
  f.track("write-embedding", sub->add_option("--write-embedding", f.write_embedding, "save the reduced matrix (OWCL, or CSV by extension)"));
}

void add_cluster_flags(CLI::App* sub, Flags& f) {
  f.track("metric", sub->add_option("--metric", f.metric, "dissimilarity for the medoid engines"));
  f.track("engine", sub->add_option("--engine", f.engine, "clustering engine")->check(CLI::IsMember({"kmeans", "fasterpam", "fastermsc"})));
  f.track("n-init", sub->add_option("--n-init", f.n_init, "k-means restarts"));
  f.track("max-iter", sub->add_option("--max-iter", f.max_iter, "engine iteration cap"));
  f.track("restarts", sub->add_option("--restarts", f.restarts, "medoid restarts"));
  f.track("graph-k", sub->add_option("--graph-k", f.graph_k, "neighbors for the clustering coefficient"));
}

void add_k_flag(CLI::App* sub, Flags& f) { f.track("k", sub->add_option("--k", f.k, "number of clusters")); }

void add_estimate_flags(CLI::App* sub, Flags& f) {
  f.track("k-min", sub->add_option("--k-min", f.k_min, "smallest candidate k"));
  f.track("k-max", sub->add_option("--k-max", f.k_max, "largest candidate k"));
  f.track("estimator", sub->add_option("--estimator", f.estimator, "k estimator")->check(CLI::IsMember({"sweep", "bayes"})));
  f.track("budget", sub->add_option("--budget", f.budget, "Bayesian optimization evaluations"));
  f.track("init-points", sub->add_option("--init-points", f.init_points, "initial design size"));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Builds the run configuration: command defaults, then --config, then flags.
PipelineConfig resolve(const Flags& f, PipelineConfig base) {
  PipelineConfig c = base;
  if (f.has("config")) {
    try {
      c = PipelineConfig::from_json(nlohmann::json::parse(read_text(f.config)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "config '" + f.config + "': " + e.what());
    }
  }
  if (f.has("input")) c.input = f.input;
  if (f.has("format")) c.format = parse_format(f.format);
  if (f.has("labels")) c.labels = f.labels;
  if (f.has("seed")) c.seed = f.seed;
  if (f.has("reducer")) {
    const auto method = parse_reducer(f.reducer);
    if (method != c.reducer.method) c.reducer = ReducerConfig::defaults(method);
  }
  if (f.has("dims")) c.reducer.target_dims = f.dims;
  if (f.has("perplexity")) c.reducer.perplexity = f.perplexity;
  if (f.has("n-neighbors")) c.reducer.n_neighbors = f.n_neighbors;
  if (f.has("min-dist")) c.reducer.min_dist = f.min_dist;
  if (f.has("reducer-iter")) c.reducer.max_iter = f.reducer_iter;
  if (f.has("normalize")) c.normalize = f.normalize;
  if (f.has("metric")) c.metric = parse_metric(f.metric);
  if (f.has("engine")) c.engine = parse_engine(f.engine);
  if (f.has("n-init")) c.n_init = f.n_init;
  if (f.has("max-iter")) c.max_iter = f.max_iter;
  if (f.has("restarts")) c.restarts = f.restarts;
  if (f.has("graph-k")) c.graph_k = f.graph_k;
  if (f.has("k")) c.k = f.k;
  if (f.has("k-min")) c.k_min = f.k_min;
  if (f.has("k-max")) c.k_max = f.k_max;
  if (f.has("estimator")) c.estimator = f.estimator == "bayes" ? Estimator::Bayes : Estimator::Sweep;
  if (f.has("budget")) c.budget = f.budget;
  if (f.has("init-points")) c.init_points = f.init_points;
  if (c.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
  // a CSV label column is only read on request
  if (!f.has("labels") && !f.has("config") && c.format.value_or(format_from_path(c.input)) == FileFormat::Csv) {
    c.labels = "none";
  }
  return c;
}

void emit(const Flags& f, const ordered_json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (f.has("out")) {
    std::ofstream out(f.out, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + f.out + "'");
  } else {
    std::cout << text;
  }
}

void save_embedding(const Flags& f, const EmbeddingMatrix& y, const std::optional<LabelVector>& labels) {
  if (!f.has("write-embedding")) return;
  if (format_from_path(f.write_embedding) == FileFormat::Csv) {
    write_embedding_csv(f.write_embedding, y, labels);
  } else {
    write_embedding_file(f.write_embedding, y, labels);
  }
}

PipelineConfig raw_defaults() {
  PipelineConfig c;
  c.normalize = false;
  c.reducer = ReducerConfig::defaults(ReducerMethod::None);
  return c;
}

LabelVector load_assignment(const Flags& f) {
  if (!f.has("assignment")) throw Error(ErrorCode::InvalidArgument, "--assignment is required");
  return read_label_file(f.assignment);
}

std::size_t cluster_count(const LabelVector& a) {
  std::uint32_t top = 0;
  for (auto v : a) top = std::max(top, v);
  return a.empty() ? 0 : top + 1;
}

int run_reduce(const Flags& f) {
  const auto cfg = resolve(f, PipelineConfig{});
  if (!f.has("write-embedding")) throw Error(ErrorCode::InvalidArgument, "--write-embedding is required");
  const auto data = load_input(cfg);
  EmbeddingMatrix x = data.matrix;
  if (cfg.normalize) x = l2_normalize(x);
  ReducerConfig r = cfg.reducer;
  r.seed = derive_seed(cfg.seed, 1);
  EmbeddingMatrix y;
  try {
    y = reduce(x, r);
  } catch (const Error& e) {
    throw StageError("reduce", e);
  }
  save_embedding(f, y, data.labels);
  ordered_json doc;
  doc["rows"] = y.rows();
  doc["cols"] = y.cols();
  doc["config_echo"] = cfg.to_json();
  doc["seed"] = cfg.seed;
  emit(f, doc);
  return 0;
}

int run_full(const Flags& f, PipelineConfig defaults, bool need_k, bool need_range) {
  const auto cfg = resolve(f, defaults);
  if (need_k && !cfg.k) throw Error(ErrorCode::InvalidArgument, "--k is required");
  if (need_range && cfg.k) throw Error(ErrorCode::InvalidArgument, "estimate-k takes --k-min/--k-max, not --k");
  const auto out = run_pipeline(cfg);
  save_embedding(f, out.reduced, out.labels);
  emit(f, out.report.to_json());
  return 0;
}

int run_evaluate(const Flags& f) {
  auto cfg = resolve(f, raw_defaults());
  const auto data = load_input(cfg);
  const auto pred = load_assignment(f);
  if (pred.size() != data.matrix.rows()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " assignments for " +
                                               std::to_string(data.matrix.rows()) + " rows");
  }
  const ClusterAssignment a(pred, cluster_count(pred));
  RunReport report;
  report.chosen_k = a.k();
  report.assignment = pred;
  report.internal = internal_scores(data.matrix, a, cfg.graph_k);
  if (data.labels) report.external = external_scores(a, *data.labels);
  report.config_echo = cfg.to_json();
  report.seed = cfg.seed;
  emit(f, report.to_json());
  return 0;
}

int run_pseudo_label(const Flags& f) {
  if (f.percentile <= 0.0 || f.percentile > 1.0) {
    throw Error(ErrorCode::BadPercentile, "percentile must lie in (0, 1]");
  }
  const auto cfg = resolve(f, raw_defaults());
  const auto data = load_input(cfg);
  const auto pred = load_assignment(f);
  if (pred.size() != data.matrix.rows()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " assignments for " +
                                               std::to_string(data.matrix.rows()) + " rows");
  }
  const ClusterAssignment a(pred, cluster_count(pred));
  const auto set = core_percentile_labels(data.matrix, a, f.percentile);
  ordered_json doc;
  doc["percentile"] = set.percentile;
  doc["kept_indices"] = set.kept_indices;
  doc["pseudo_labels"] = set.pseudo_labels;
  if (data.labels) {
    LabelVector truth;
    for (auto i : set.kept_indices) truth.push_back((*data.labels)[i]);
    doc["acc"] = as_percentage(clustering_accuracy(set.pseudo_labels, truth));
  }
  emit(f, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"owcluster: cluster embedding vectors"};
  app.require_subcommand(1);
  Flags f;

  auto* reduce_cmd = app.add_subcommand("reduce", "normalize and reduce an embedding file");
  add_shared(reduce_cmd, f);
  add_reduce_flags(reduce_cmd, f);

  auto* cluster_cmd = app.add_subcommand("cluster", "cluster at a fixed k (no reduction unless requested)");
  add_shared(cluster_cmd, f);
  add_reduce_flags(cluster_cmd, f);
  add_cluster_flags(cluster_cmd, f);
  add_k_flag(cluster_cmd, f);

  auto* estimate_cmd = app.add_subcommand("estimate-k", "estimate the number of clusters");
  add_shared(estimate_cmd, f);
  add_reduce_flags(estimate_cmd, f);
  add_cluster_flags(estimate_cmd, f);
  add_estimate_flags(estimate_cmd, f);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a given assignment");
  add_shared(evaluate_cmd, f);
  f.track("graph-k", evaluate_cmd->add_option("--graph-k", f.graph_k, "neighbors for the clustering coefficient"));
  f.track("assignment", evaluate_cmd->add_option("--assignment", f.assignment, "cluster id per line"));

  auto* pseudo_cmd = app.add_subcommand("pseudo-label", "keep the core of each cluster");
  add_shared(pseudo_cmd, f);
  f.track("assignment", pseudo_cmd->add_option("--assignment", f.assignment, "cluster id per line"));
  pseudo_cmd->add_option("--percentile", f.percentile, "fraction kept per cluster, in (0, 1]");

  auto* pipeline_cmd = app.add_subcommand("pipeline", "normalize, reduce, cluster or estimate k, and score");
  add_shared(pipeline_cmd, f);
  add_reduce_flags(pipeline_cmd, f);
  add_cluster_flags(pipeline_cmd, f);
  add_k_flag(pipeline_cmd, f);
  add_estimate_flags(pipeline_cmd, f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (reduce_cmd->parsed()) return run_reduce(f);
    if (cluster_cmd->parsed()) return run_full(f, raw_defaults(), true, false);
    if (estimate_cmd->parsed()) return run_full(f, raw_defaults(), false, true);
    if (evaluate_cmd->parsed()) return run_evaluate(f);
    if (pseudo_cmd->parsed()) return run_pseudo_label(f);
    return run_full(f, PipelineConfig{}, false, false);
  } catch (const Error& e) {
    std::cerr << "owcluster: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "owcluster: " << e.what() << "\n";
  }
  return 1;
}
