#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace cofib {

struct ClusterModel {
  int k = 0;
  Eigen::MatrixXd centroids;     // R x k
  std::vector<int> assignments;  // per input vector, in [0, k)
};

// Lloyd iterations from seeded k-means++ initialization. Stops when the
// largest centroid movement drops below tol or after max_iter rounds. Empty
// clusters are re-seeded from the point farthest from its centroid. The
// returned model has no empty cluster and every vector assigned to a nearest
// centroid.
ClusterModel kmeans(const Eigen::MatrixXd& vectors, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-4);

// Index of the nearest centroid; exact ties break to the lowest index.
int assign(const ClusterModel& model, const Eigen::VectorXd& vector);

}  // namespace cofib
