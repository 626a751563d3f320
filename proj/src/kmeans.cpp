#include "netdiag/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netdiag/errors.hpp"
#include "netdiag/rng.hpp"

namespace netdiag {

std::vector<double> Standardization::apply(std::span<const double> raw) const {
  std::vector<double> out(raw.size());
  for (std::size_t c = 0; c < raw.size(); ++c) {
    out[c] = stddev[c] > 0.0 ? (raw[c] - mean[c]) / stddev[c] : 0.0;
  }
  return out;
}

std::vector<double> Standardization::invert(
    std::span<const double> standardized) const {
  std::vector<double> out(standardized.size());
  for (std::size_t c = 0; c < standardized.size(); ++c) {
    out[c] = stddev[c] > 0.0 ? standardized[c] * stddev[c] + mean[c] : mean[c];
  }
  return out;
}

std::pair<FeatureMatrix, Standardization> standardize(const FeatureMatrix& X) {
  const std::size_t n = X.n_rows();
  const std::size_t d = X.n_cols();
  if (n == 0) fail(Errc::EmptyInput, "nothing to standardize");

  Standardization st;
  st.mean.assign(d, 0.0);
  st.stddev.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += X.at(r, c);
    st.mean[c] = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double delta = X.at(r, c) - st.mean[c];
      ss += delta * delta;
    }
    st.stddev[c] = std::sqrt(ss / static_cast<double>(n));
    if (st.stddev[c] == 0.0) st.zero_variance_columns.push_back(c);
  }

  FeatureMatrix Z;
  Z.row_ids = X.row_ids;
  Z.columns = X.columns;
  Z.values.resize(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = st.apply(X.row(r));
    std::copy(row.begin(), row.end(), Z.values.begin() + r * d);
  }
  return {std::move(Z), std::move(st)};
}

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double delta = a[i] - b[i];
    sum += delta * delta;
  }
  return sum;
}

std::size_t nearest(const std::vector<std::vector<double>>& centroids,
                    std::span<const double> point) {
  std::size_t best = 0;
  double best_d = dist2(centroids[0], point);
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = dist2(centroids[j], point);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

struct Lloyd {
  const FeatureMatrix& Z;  // standardized points
  std::size_t k;

  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;

  // nearest-centroid assignment plus empty-cluster repair; returns the
  // number of seized points
  std::size_t assign() {
    const std::size_t n = Z.n_rows();
    assignment.resize(n);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
      assignment[r] = nearest(centroids, Z.row(r));
      ++sizes[assignment[r]];
    }
    std::size_t seized = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] > 0) continue;
      // farthest point from its own centroid, lowest row on ties
      std::size_t victim = n;
      double worst = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (sizes[assignment[r]] <= 1) continue;  // keep clusters non-empty
        const double d = dist2(centroids[assignment[r]], Z.row(r));
        if (d > worst) {
          worst = d;
          victim = r;
        }
      }
      if (victim == n) break;  // fewer distinct points than clusters
      --sizes[assignment[victim]];
      assignment[victim] = j;
      ++sizes[j];
      ++seized;
    }
    return seized;
  }

  void update_centroids() {
    const std::size_t d = Z.n_cols();
    std::vector<std::size_t> sizes(k, 0);
    for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t r = 0; r < Z.n_rows(); ++r) {
      const auto row = Z.row(r);
      auto& c = centroids[assignment[r]];
      for (std::size_t i = 0; i < d; ++i) c[i] += row[i];
      ++sizes[assignment[r]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < d; ++i) {
        centroids[j][i] /= static_cast<double>(sizes[j]);
      }
    }
  }

  double cost() const {
    double sum = 0.0;
    for (std::size_t r = 0; r < Z.n_rows(); ++r) {
      sum += dist2(centroids[assignment[r]], Z.row(r));
    }
    return sum;
  }
};

std::vector<std::vector<double>> seed_plus_plus(const FeatureMatrix& Z,
                                                std::size_t k, Rng& rng) {
  const std::size_t n = Z.n_rows();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  const auto first = Z.row(rng.below(n));
  centroids.emplace_back(first.begin(), first.end());

  std::vector<double> d2(n);
  for (std::size_t r = 0; r < n; ++r) d2[r] = dist2(centroids[0], Z.row(r));

  while (centroids.size() < k) {
    double total = 0.0;
    for (const double d : d2) total += d;
    std::size_t pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t r = 0; r < n; ++r) {
        cum += d2[r];
        if (cum > target) {
          pick = r;
          break;
        }
      }
    } else {
      pick = rng.below(n);  // every point already sits on a centroid
    }
    const auto row = Z.row(pick);
    centroids.emplace_back(row.begin(), row.end());
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], dist2(centroids.back(), Z.row(r)));
    }
  }
  return centroids;
}

// With two clusters and at most this many rows, enumerating every
// bipartition costs less than the restart budget and always lands on the
// global optimum, which restarted Lloyd occasionally misses on inputs this
// small.
constexpr std::size_t kTwoClusterExactLimit = 12;

ClusterModel solve_two_clusters_exactly(const FeatureMatrix& Z) {
  const std::size_t n = Z.n_rows();
  const std::size_t d = Z.n_cols();

  double total_sq = 0.0;
  for (const double v : Z.values) total_sq += v * v;

  // Row 0 stays in cluster 0; bit r-1 of the mask sends row r to cluster 1.
  // SSE = Σ‖x‖² − ‖s₀‖²/n₀ − ‖s₁‖²/n₁ with s the per-cluster coordinate sums.
  std::size_t best_mask = 1;
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> s0(d), s1(d);
  for (std::size_t mask = 1; mask < (std::size_t{1} << (n - 1)); ++mask) {
    std::fill(s0.begin(), s0.end(), 0.0);
    std::fill(s1.begin(), s1.end(), 0.0);
    std::size_t n1 = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const bool side = r > 0 && (mask >> (r - 1)) & 1;
      auto& s = side ? s1 : s0;
      const auto row = Z.row(r);
      for (std::size_t i = 0; i < d; ++i) s[i] += row[i];
      n1 += side ? 1 : 0;
    }
    double explained = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      explained += s0[i] * s0[i] / static_cast<double>(n - n1) +
                   s1[i] * s1[i] / static_cast<double>(n1);
    }
    if (total_sq - explained < best_sse) {
      best_sse = total_sq - explained;
      best_mask = mask;
    }
  }

  Lloyd state{Z, 2, {2, std::vector<double>(d, 0.0)}, {}};
  state.assignment.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    state.assignment[r] = r > 0 && (best_mask >> (r - 1)) & 1 ? 1 : 0;
  }
  state.update_centroids();

  ClusterModel model;
  model.k = 2;
  model.inertia = state.cost();
  model.centroids = std::move(state.centroids);
  model.assignments = std::move(state.assignment);
  model.iterations = 1;
  model.inertia_trace = {model.inertia};
  return model;
}

}  // namespace

ClusterModel fit_kmeans(const FeatureMatrix& X, std::size_t k,
                        const KMeansParams& params) {
  const std::size_t n = X.n_rows();
  if (k < 1) fail(Errc::InvalidConfig, "cluster count must be positive");
  if (n < k)
    fail(Errc::TooFewRows, "cannot place " + std::to_string(k) +
                               " clusters on " + std::to_string(n) + " rows");

  auto [Z, st] = standardize(X);

  if (k == 2 && n <= kTwoClusterExactLimit) {
    ClusterModel model = solve_two_clusters_exactly(Z);
    model.feature_columns = X.columns;
    model.standardization = std::move(st);
    model.row_ids = X.row_ids;
    return model;
  }

  ClusterModel best;
  bool have_best = false;

  Rng rng(params.seed);
  const std::size_t restarts = std::max<std::size_t>(params.n_init, 1);
  for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
    Lloyd state{Z, k, seed_plus_plus(Z, k, rng), {}};
    state.assign();

    std::vector<double> trace;
    std::size_t iterations = 0;
    auto previous = state.centroids;
    for (std::size_t iter = 1; iter <= params.max_iter; ++iter) {
      iterations = iter;
      state.update_centroids();
      trace.push_back(state.cost());

      double movement = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        movement = std::max(movement,
                            std::sqrt(dist2(state.centroids[j], previous[j])));
      }
      previous = state.centroids;

      const auto before = state.assignment;
      const std::size_t seized = state.assign();
      if (state.assignment == before) break;  // fixed point
      if (movement < params.tol && seized == 0) break;
    }

    const double final_cost = state.cost();
    trace.push_back(final_cost);
    if (!have_best || final_cost < best.inertia) {
      have_best = true;
      best.k = k;
      best.centroids = std::move(state.centroids);
      best.assignments = std::move(state.assignment);
      best.inertia = final_cost;
      best.iterations = iterations;
      best.inertia_trace = std::move(trace);
    }
  }

  best.feature_columns = X.columns;
  best.standardization = std::move(st);
  best.row_ids = X.row_ids;
  return best;
}

double inertia(const ClusterModel& model, const FeatureMatrix& X) {
  if (X.columns != model.feature_columns)
    fail(Errc::ShapeMismatch, "matrix columns differ from the fitted model");
  double sum = 0.0;
  for (std::size_t r = 0; r < X.n_rows(); ++r) {
    const auto z = model.standardization.apply(X.row(r));
    sum += dist2(model.centroids[nearest(model.centroids, z)], z);
  }
  return sum;
}

double silhouette(const FeatureMatrix& X,
                  const std::vector<std::size_t>& assignments) {
  const std::size_t n = X.n_rows();
  if (assignments.size() != n)
    fail(Errc::LengthMismatch, "one assignment per row required");
  if (n < 3) fail(Errc::TooFewRows, "silhouette needs at least 3 points");

  std::size_t k = 0;
  for (const std::size_t a : assignments) k = std::max(k, a + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (const std::size_t a : assignments) ++sizes[a];
  std::size_t populated = 0;
  for (const std::size_t s : sizes) populated += s > 0 ? 1 : 0;
  if (populated < 2)
    fail(Errc::SingleCluster, "silhouette needs at least two clusters");

  double total = 0.0;
  std::vector<double> mean_dist(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[assignments[i]] == 1) continue;  // singleton scores 0

    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist[assignments[j]] += std::sqrt(dist2(X.row(i), X.row(j)));
    }
    double a = 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      if (c == assignments[i]) {
        a = mean_dist[c] / static_cast<double>(sizes[c] - 1);
      } else {
        b = std::min(b, mean_dist[c] / static_cast<double>(sizes[c]));
      }
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

std::size_t select_k(const FeatureMatrix& X, std::size_t k_min,
                     std::size_t k_max, const KMeansParams& params) {
  if (k_min < 2 || k_min > k_max || k_max + 1 > X.n_rows())
    fail(Errc::EmptyRange,
         "cluster-count range must satisfy 2 <= low <= high <= rows-1");

  const auto [Z, st] = standardize(X);
  std::size_t best_k = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const ClusterModel model = fit_kmeans(X, k, params);
    const double score = silhouette(Z, model.assignments);
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

CauseOrientation orient(const ClusterModel& model, const FeatureMatrix& X_raw,
                        const std::string& severity_attribute,
                        Direction direction) {
  if (model.k != 2)
    fail(Errc::NotBinary, "orientation defined for exactly 2 clusters, have " +
                              std::to_string(model.k));
  if (X_raw.columns != model.feature_columns)
    fail(Errc::ShapeMismatch, "matrix columns differ from the fitted model");
  const auto col = X_raw.column_index(severity_attribute);
  if (!col)
    fail(Errc::UnknownAttribute,
         "severity attribute '" + severity_attribute +
             "' not among the clustered columns");
  if (X_raw.row_ids != model.row_ids)
    fail(Errc::IdMismatch, "matrix rows differ from the fitted model");

  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t r = 0; r < X_raw.n_rows(); ++r) {
    sum[model.assignments[r]] += X_raw.at(r, *col);
    ++count[model.assignments[r]];
  }
  const double mean0 = sum[0] / static_cast<double>(count[0]);
  const double mean1 = sum[1] / static_cast<double>(count[1]);

  CauseOrientation out;
  out.severity_attribute = severity_attribute;
  out.direction = direction;
  if (mean0 == mean1) {
    out.problem_cluster = 0;
    out.ambiguous = true;
  } else if (direction == Direction::HigherIsWorse) {
    out.problem_cluster = mean0 > mean1 ? 0 : 1;
  } else {
    out.problem_cluster = mean0 < mean1 ? 0 : 1;
  }
  return out;
}

std::vector<std::vector<double>> ClusterModel::centroids_raw() const {
  std::vector<std::vector<double>> out;
  out.reserve(centroids.size());
  for (const auto& c : centroids) out.push_back(standardization.invert(c));
  return out;
}

}  // namespace netdiag
