#include "owcluster/pipeline.hpp"

#include <cmath>
#include <limits>

#include "owcluster/evaluation.hpp"
#include "owcluster/validity.hpp"

namespace owcluster {
namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

template <typename Fn>
std::optional<double> defined(Fn&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    return std::nullopt;
  }
}

nlohmann::ordered_json score_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

}  // namespace

double as_percentage(double fraction) { return std::round(fraction * 1000.0) / 10.0; }

EngineConfig PipelineConfig::engine_config() const {
  EngineConfig e;
  e.kind = engine;
  e.metric = metric;
  e.kmeans.n_init = n_init;
  e.kmeans.max_iter = max_iter;
  e.medoid.restarts = restarts;
  e.medoid.max_iter = max_iter;
  // restarts of the silhouette optimizer are ranked by the full silhouette
  if (engine == EngineKind::FasterMSC) e.medoid.selection = RestartSelection::FullSilhouette;
  e.seed = derive_seed(seed, 2);
  return e;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  j["format"] = format ? (*format == FileFormat::Csv ? "csv" : "owcl") : nlohmann::ordered_json(nullptr);
  j["labels"] = labels;
  j["normalize"] = normalize;
  j["reducer"] = {
      {"method", to_string(reducer.method)},     {"target_dims", reducer.target_dims},
      {"perplexity", reducer.perplexity},        {"n_neighbors", reducer.n_neighbors},
      {"min_dist", reducer.min_dist},            {"max_iter", reducer.max_iter},
  };
  j["engine"] = to_string(engine);
  j["metric"] = to_string(metric);
  j["n_init"] = n_init;
  j["max_iter"] = max_iter;
  j["restarts"] = restarts;
  j["k"] = k ? nlohmann::ordered_json(*k) : nlohmann::ordered_json(nullptr);
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["estimator"] = estimator == Estimator::Sweep ? "sweep" : "bayes";
  j["budget"] = budget;
  j["init_points"] = init_points;
  j["graph_k"] = graph_k;
  j["seed"] = seed;
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.input = j.at("input").get<std::string>();
    if (!j.at("format").is_null()) c.format = parse_format(j.at("format").get<std::string>());
    c.labels = j.at("labels").get<std::string>();
    c.normalize = j.at("normalize").get<bool>();
    const auto& r = j.at("reducer");
    c.reducer.method = parse_reducer(r.at("method").get<std::string>());
    c.reducer.target_dims = r.at("target_dims").get<std::size_t>();
    c.reducer.perplexity = r.at("perplexity").get<double>();
    c.reducer.n_neighbors = r.at("n_neighbors").get<std::size_t>();
    c.reducer.min_dist = r.at("min_dist").get<double>();
    c.reducer.max_iter = r.at("max_iter").get<std::size_t>();
    c.engine = parse_engine(j.at("engine").get<std::string>());
    c.metric = parse_metric(j.at("metric").get<std::string>());
    c.n_init = j.at("n_init").get<std::size_t>();
    c.max_iter = j.at("max_iter").get<std::size_t>();
    c.restarts = j.at("restarts").get<std::size_t>();
    if (!j.at("k").is_null()) c.k = j.at("k").get<std::size_t>();
    c.k_min = j.at("k_min").get<std::size_t>();
    c.k_max = j.at("k_max").get<std::size_t>();
    const auto est = j.at("estimator").get<std::string>();
    if (est != "sweep" && est != "bayes") throw Error(ErrorCode::InvalidArgument, "estimator '" + est + "'");
    c.estimator = est == "sweep" ? Estimator::Sweep : Estimator::Bayes;
    c.budget = j.at("budget").get<std::size_t>();
    c.init_points = j.at("init_points").get<std::size_t>();
    c.graph_k = j.at("graph_k").get<std::size_t>();
    c.seed = j.at("seed").get<RngSeed>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["chosen_k"] = chosen_k;
  j["assignment"] = assignment;
  j["internal"] = {
      {"silhouette", score_json(internal.silhouette)},
      {"calinski_harabasz", score_json(internal.calinski_harabasz)},
      {"davies_bouldin", score_json(internal.davies_bouldin)},
      {"avg_clustering_coefficient", score_json(internal.avg_clustering_coefficient)},
  };
  if (external) {
    j["external"] = {
        {"acc", as_percentage(external->acc)},
        {"nmi", as_percentage(external->nmi)},
        {"ari", as_percentage(external->ari)},
    };
  }
  auto trace_json = nlohmann::ordered_json::array();
  for (const auto& [k, sil] : trace) trace_json.push_back({{"k", k}, {"silhouette", sil}});
  j["trace"] = std::move(trace_json);
  j["config_echo"] = config_echo;
  j["seed"] = seed;
  return j;
}

InternalScores internal_scores(const EmbeddingMatrix& y, const ClusterAssignment& a,
                               std::size_t graph_k) {
  InternalScores s;
  s.silhouette = defined([&] { return silhouette_score(pairwise_distance_matrix(y, Metric::euclidean()), a); });
  s.calinski_harabasz = defined([&] { return calinski_harabasz(y, a); });
  s.davies_bouldin = defined([&] { return davies_bouldin(y, a); });
  if (y.rows() >= 2) {
    const std::size_t k = std::min(graph_k, y.rows() - 1);
    s.avg_clustering_coefficient = defined([&] {
      return avg_clustering_coefficient(build_knn_graph(y, k, Metric::euclidean(), true));
    });
  }
  return s;
}

ExternalScores external_scores(const ClusterAssignment& a, const LabelVector& truth) {
  return {clustering_accuracy(a, truth), nmi(a, truth), ari(a, truth)};
}

EmbeddingData load_input(const PipelineConfig& config) {
  return in_stage("load", [&] {
    const FileFormat format = config.format.value_or(format_from_path(config.input));
    const bool embedded = config.labels == "embedded";
    EmbeddingData data = read_embedding_file(config.input, format, embedded && format == FileFormat::Csv);
    if (config.labels == "none") {
      data.labels.reset();
    } else if (!embedded) {
      data.labels = read_label_file(config.labels);
    }
    if (data.labels && data.labels->size() != data.matrix.rows()) {
      throw Error(ErrorCode::LengthMismatch, std::to_string(data.labels->size()) + " labels for " +
                                                 std::to_string(data.matrix.rows()) + " rows");
    }
    return data;
  });
}

PipelineOutput run_pipeline(const EmbeddingData& data, const PipelineConfig& config) {
  in_stage("load", [&] { validate(data.matrix); return 0; });
  const EmbeddingMatrix normalized =
      config.normalize ? in_stage("normalize", [&] { return l2_normalize(data.matrix); }) : data.matrix;

  ReducerConfig reducer = config.reducer;
  reducer.seed = derive_seed(config.seed, 1);
  EmbeddingMatrix reduced = in_stage("reduce", [&] { return reduce(normalized, reducer); });

  const EngineConfig engine = config.engine_config();
  PipelineOutput out;
  RunReport& report = out.report;
  if (config.k) {
    out.assignment = in_stage("cluster", [&] { return run_engine(reduced, *config.k, engine); });
  } else {
    SweepResult sweep = in_stage("estimate", [&] {
      if (config.estimator == Estimator::Sweep) {
        return sweep_estimate(reduced, config.k_min, config.k_max, engine);
      }
      BayesOptConfig bayes;
      bayes.k_min = config.k_min;
      bayes.k_max = config.k_max;
      bayes.budget = config.budget;
      bayes.init_points = config.init_points;
      bayes.seed = derive_seed(config.seed, 3);
      return bayes_estimate(reduced, bayes, engine);
    });
    out.assignment = std::move(sweep.best_labels);
    report.trace = std::move(sweep.trace);
  }
  report.chosen_k = out.assignment.k();
  report.assignment = out.assignment.labels();
  report.internal = in_stage("score", [&] { return internal_scores(reduced, out.assignment, config.graph_k); });
  if (data.labels) {
    report.external = in_stage("score", [&] { return external_scores(out.assignment, *data.labels); });
  }
  report.config_echo = config.to_json();
  report.seed = config.seed;
  out.reduced = std::move(reduced);
  out.labels = data.labels;
  return out;
}

PipelineOutput run_pipeline(const PipelineConfig& config) {
  return run_pipeline(load_input(config), config);
}

}  // namespace owcluster
