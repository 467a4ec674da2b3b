#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "owcluster/core.hpp"

namespace owcluster {

struct KMeansConfig {
  std::size_t k = 2;
  std::size_t n_init = 50;
  std::size_t max_iter = 10000;
  // Stop when the relative inertia change falls below tol.
  double tol = 1e-6;
  RngSeed seed = 0;
};

struct KMeansResult {
  ClusterAssignment assignment;  // centroids attached
  double inertia = 0.0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_trace;
  std::size_t best_restart = 0;
};

// Lloyd iterations from k-means++ seeds, best of n_init restarts.
KMeansResult kmeans_detailed(const EmbeddingMatrix& y, const KMeansConfig& cfg);
ClusterAssignment kmeans(const EmbeddingMatrix& y, const KMeansConfig& cfg);

enum class RestartSelection {
  // Keep the restart with the best own objective.
  Objective,
  // Keep the restart with the highest full silhouette over the distance matrix.
  FullSilhouette,
};

struct MedoidConfig {
  std::size_t k = 2;
  std::size_t restarts = 10;
  // Upper bound on full passes over the candidate set.
  std::size_t max_iter = 10000;
  RngSeed seed = 0;
  RestartSelection selection = RestartSelection::Objective;
};

struct MedoidResult {
  ClusterAssignment assignment;  // medoids attached, slot j = cluster j
  // FasterPAM: total deviation. FasterMSC: average medoid silhouette.
  double objective = 0.0;
  // Objective after initialization and after every accepted swap.
  std::vector<double> trace;
  std::size_t best_restart = 0;
};

// Sum over points of the distance to the nearest medoid.
double total_deviation(const DistanceMatrix& d, const std::vector<std::size_t>& medoids);

// Mean over points of 1 - d1/d2 (nearest / second-nearest medoid distance,
// 0/0 read as 0). Needs at least two medoids.
double medoid_silhouette(const DistanceMatrix& d, const std::vector<std::size_t>& medoids);

// Nearest-medoid assignment; ties go to the lower medoid slot.
ClusterAssignment assign_to_medoids(const DistanceMatrix& d, const std::vector<std::size_t>& medoids);

// Greedy BUILD initialization minimizing total deviation.
std::vector<std::size_t> build_medoids(const DistanceMatrix& d, std::size_t k);

MedoidResult fasterpam_detailed(const DistanceMatrix& d, const MedoidConfig& cfg);
ClusterAssignment fasterpam(const DistanceMatrix& d, const MedoidConfig& cfg);

MedoidResult fastermsc_detailed(const DistanceMatrix& d, const MedoidConfig& cfg);
ClusterAssignment fastermsc(const DistanceMatrix& d, const MedoidConfig& cfg);

enum class EngineKind { KMeans, FasterPAM, FasterMSC };

EngineKind parse_engine(const std::string& text);
std::string to_string(EngineKind kind);

}  // namespace owcluster
