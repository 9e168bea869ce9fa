#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cofib/config.hpp"
#include "cofib/dictionary.hpp"
#include "cofib/sparse_bayes.hpp"

namespace cofib {

// Inverse-distance collaboration group of one patch: t-1 same-cluster
// neighbors plus the patch itself (self weight exactly 0.5).
struct CollabGroup {
  int patch_index = 0;
  std::vector<int> neighbor_indices;  // t-1 entries, excludes the patch
  std::vector<double> distances;      // Euclidean, aligned with neighbor_indices
  std::vector<double> weights;        // t entries, self appended last, sums to 1
};

// The t-1 nearest cluster members to vector p (Euclidean), p excluded; ties
// break to the lower index. Returns (indices, distances).
std::pair<std::vector<int>, std::vector<double>> nearest_patches(
    const Eigen::MatrixXd& cluster_vectors, int p, int t);

// Inverse-distance weights: raw 1/max(d, 1e-8), neighbor block normalized to
// 0.5, self weight 0.5 appended last. Empty input yields {1.0} (self only).
std::vector<double> collab_weights(const std::vector<double>& distances);

// Convex combination of activity vectors; `weights` holds the neighbor
// weights followed by the self weight.
Eigen::VectorXd update_lambda(const std::vector<Eigen::VectorXd>& neighbor_lambdas,
                              const Eigen::VectorXd& self_lambda,
                              const std::vector<double>& weights);

// Full collaborative solve of one cluster: initial estimates under a uniform
// activity prior, then collab_rounds rounds in which every patch blends the
// pre-round posteriors of its nearest neighbors into an updated prior and is
// re-estimated. noise_variances is per patch (already in the normalized
// patch domain). With a single-member group (effective t <= 1) the initial
// estimates are returned unchanged.
std::vector<SparseSolution> denoise_cluster(const Eigen::MatrixXd& cluster_vectors,
                                            const Dictionary& dict,
                                            const std::vector<double>& noise_variances,
                                            const DenoiseConfig& cfg);

}  // namespace cofib
