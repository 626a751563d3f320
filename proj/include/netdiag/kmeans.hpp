#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netdiag/dataset.hpp"

namespace netdiag {

// z-score transform captured at fit time; zero-variance columns standardize
// to 0 and invert back to their mean.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std
  std::vector<std::size_t> zero_variance_columns;

  std::vector<double> apply(std::span<const double> raw) const;
  std::vector<double> invert(std::span<const double> standardized) const;
};

struct KMeansParams {
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct ClusterModel {
  std::vector<std::string> feature_columns;
  Standardization standardization;
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;  // standardized space
  std::vector<std::size_t> assignments;        // per input row
  std::vector<RowId> row_ids;
  double inertia = 0.0;  // standardized space
  std::size_t iterations = 0;
  std::vector<double> inertia_trace;  // one entry per Lloyd update

  std::vector<std::vector<double>> centroids_raw() const;
};

enum class Direction { HigherIsWorse, LowerIsWorse };

struct CauseOrientation {
  std::string severity_attribute;
  Direction direction = Direction::HigherIsWorse;
  std::size_t problem_cluster = 0;
  bool ambiguous = false;  // exact centroid tie along the severity attribute
};

std::pair<FeatureMatrix, Standardization> standardize(const FeatureMatrix& X);

// Lloyd iterations from k-means++ seeding, n_init restarts sharing one seeded
// generator, lowest final inertia wins (earliest restart on ties). Empty
// clusters are repaired by seizing the point farthest from its centroid.
ClusterModel fit_kmeans(const FeatureMatrix& X, std::size_t k,
                        const KMeansParams& params);

// Sum of squared distances to the nearest centroid, standardized space.
double inertia(const ClusterModel& model, const FeatureMatrix& X);

// Mean over points of (b-a)/max(a,b); singletons and all-zero distances
// score 0. Distances are taken in the space of X as given.
double silhouette(const FeatureMatrix& X,
                  const std::vector<std::size_t>& assignments);

// Fits every k in [k_min, k_max] with identical params and keeps the
// silhouette maximizer; ties go to the smaller k.
std::size_t select_k(const FeatureMatrix& X, std::size_t k_min,
                     std::size_t k_max, const KMeansParams& params);

// Names which of the two clusters is the problem one: the cluster whose mean
// raw severity value is worse per the declared direction.
CauseOrientation orient(const ClusterModel& model, const FeatureMatrix& X_raw,
                        const std::string& severity_attribute,
                        Direction direction);

}  // namespace netdiag
