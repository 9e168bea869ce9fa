#include "cofib/clustering.hpp"

#include <limits>
#include <stdexcept>

#include "cofib/parallel.hpp"
#include "cofib/rng.hpp"

namespace cofib {

namespace {

// Nearest centroid of one column; ties break to the lowest index.
int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  double best_d = (centroids.col(0) - v).squaredNorm();
  for (int j = 1; j < centroids.cols(); ++j) {
    const double d = (centroids.col(j) - v).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

void assign_all(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& centroids,
                std::vector<int>& assignments) {
  parallel_for(static_cast<std::size_t>(vectors.cols()), 256, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      assignments[i] = nearest_centroid(centroids, vectors.col(static_cast<Eigen::Index>(i)));
  });
}

// Re-seeds every empty cluster from the point farthest from its assigned
// centroid; the point is pinned to the cluster it now defines.
void fix_empty_clusters(const Eigen::MatrixXd& vectors, Eigen::MatrixXd& centroids,
                        std::vector<int>& assignments) {
  const int k = static_cast<int>(centroids.cols());
  std::vector<Eigen::Index> sizes(k, 0);
  for (int a : assignments) ++sizes[a];
  for (int j = 0; j < k; ++j) {
    if (sizes[j] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < vectors.cols(); ++i) {
      if (sizes[assignments[i]] <= 1) continue;  // do not empty another cluster
      const double d = (vectors.col(i) - centroids.col(assignments[i])).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) throw std::invalid_argument("kmeans: cannot repair empty cluster");
    centroids.col(j) = vectors.col(far);
    --sizes[assignments[far]];
    assignments[far] = j;
    ++sizes[j];
  }
}

}  // namespace

ClusterModel kmeans(const Eigen::MatrixXd& vectors, int k, std::uint64_t seed, int max_iter,
                    double tol) {
  const Eigen::Index n = vectors.cols();
  const Eigen::Index dim = vectors.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer vectors than clusters");
  if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("kmeans: tol must be positive");

  Rng rng(seed);
  Eigen::MatrixXd centroids(dim, k);

  // k-means++ seeding
  centroids.col(0) = vectors.col(static_cast<Eigen::Index>(rng.uniform_int(n)));
  std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = (vectors.col(i) - centroids.col(0)).squaredNorm();
      for (int jj = 1; jj < j; ++jj)
        best = std::min(best, (vectors.col(i) - centroids.col(jj)).squaredNorm());
      d2[i] = best;
      total += best;
    }
    Eigen::Index pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_int(n));
    }
    centroids.col(j) = vectors.col(pick);
  }

  ClusterModel model;
  model.k = k;
  model.assignments.resize(static_cast<std::size_t>(n));

  for (int iter = 0; iter < max_iter; ++iter) {
    assign_all(vectors, centroids, model.assignments);
    fix_empty_clusters(vectors, centroids, model.assignments);

    // centroid update, fixed accumulation order
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(model.assignments[i]) += vectors.col(i);
      ++sizes[model.assignments[i]];
    }
    double move = 0.0;
    for (int j = 0; j < k; ++j) {
      sums.col(j) /= static_cast<double>(sizes[j]);
      move = std::max(move, (sums.col(j) - centroids.col(j)).norm());
    }
    centroids = sums;
    if (move < tol) break;
  }

  // Restore the nearest-centroid property after the last update. Re-seeding
  // an empty cluster places its centroid on a data point, so the loop settles
  // in at most k rounds; a leftover empty cluster can only stem from exact
  // centroid ties, where the pinned assignment is still a nearest one.
  for (int attempt = 0;; ++attempt) {
    assign_all(vectors, centroids, model.assignments);
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (int a : model.assignments) ++sizes[a];
    const bool any_empty = std::any_of(sizes.begin(), sizes.end(), [](Eigen::Index s) { return s == 0; });
    if (!any_empty) break;
    fix_empty_clusters(vectors, centroids, model.assignments);
    if (attempt >= k) break;
  }
  model.centroids = centroids;
  return model;
}

int assign(const ClusterModel& model, const Eigen::VectorXd& vector) {
  if (vector.size() != model.centroids.rows())
    throw std::invalid_argument("assign: vector length mismatch");
  return nearest_centroid(model.centroids, vector);
}

}  // namespace cofib
