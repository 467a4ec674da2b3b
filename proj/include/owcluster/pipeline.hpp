#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "owcluster/cluster.hpp"
#include "owcluster/core.hpp"
#include "owcluster/io.hpp"
#include "owcluster/reduction.hpp"
#include "owcluster/selection.hpp"

namespace owcluster {

enum class Estimator { Sweep, Bayes };

// Fully resolved run configuration; serializes to the report's config_echo
// and parses back from it.
struct PipelineConfig {
  std::string input;
  std::optional<FileFormat> format;  // inferred from the extension when absent
  // "embedded", "none", or a path to a label file (one id per line).
  std::string labels = "embedded";

  bool normalize = true;
  ReducerConfig reducer = ReducerConfig::defaults(ReducerMethod::UMAP);

  EngineKind engine = EngineKind::KMeans;
  Metric metric = Metric::euclidean();
  std::size_t n_init = 50;
  std::size_t max_iter = 10000;
  std::size_t restarts = 10;

  std::optional<std::size_t> k;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  Estimator estimator = Estimator::Sweep;
  std::size_t budget = 5;
  std::size_t init_points = 3;

  // Neighbors of the graph behind the average clustering coefficient.
  std::size_t graph_k = 10;
  RngSeed seed = 0;

  EngineConfig engine_config() const;
  nlohmann::ordered_json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

struct InternalScores {
  std::optional<double> silhouette;
  std::optional<double> calinski_harabasz;  // may be +infinity
  std::optional<double> davies_bouldin;
  std::optional<double> avg_clustering_coefficient;
};

struct ExternalScores {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
};

struct RunReport {
  std::size_t chosen_k = 0;
  std::vector<std::uint32_t> assignment;
  InternalScores internal;
  std::optional<ExternalScores> external;
  std::vector<std::pair<std::size_t, double>> trace;
  nlohmann::ordered_json config_echo;
  RngSeed seed = 0;

  // Top-level keys are exactly the fields above; "external" is omitted when
  // no labels were available. acc/nmi/ari are percentages with one decimal.
  nlohmann::ordered_json to_json() const;
};

// A failure tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + cause.detail()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOutput {
  RunReport report;
  EmbeddingMatrix reduced;
  ClusterAssignment assignment;
  std::optional<LabelVector> labels;
};

// Index values that are undefined for an assignment (one cluster, all
// singletons, coincident centroids) are left empty.
InternalScores internal_scores(const EmbeddingMatrix& y, const ClusterAssignment& a,
                               std::size_t graph_k);
ExternalScores external_scores(const ClusterAssignment& a, const LabelVector& truth);

EmbeddingData load_input(const PipelineConfig& config);

// normalize -> reduce -> cluster at k or estimate k -> score.
PipelineOutput run_pipeline(const EmbeddingData& data, const PipelineConfig& config);
PipelineOutput run_pipeline(const PipelineConfig& config);

// Rounds a fraction to a percentage with one decimal.
double as_percentage(double fraction);

}  // namespace owcluster
