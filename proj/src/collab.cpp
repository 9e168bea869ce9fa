#include "cofib/collab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cofib/parallel.hpp"

namespace cofib {

namespace {

constexpr double kDistanceFloor = 1e-8;  // Eq. weights divide by the distance

// Smallest t-1 (squared distance, index) pairs among the cluster, excluding
// p; ties break to the lower index.
void select_neighbors(const std::vector<std::pair<double, int>>& cand, int count,
                      std::vector<int>& indices, std::vector<double>& distances) {
  std::vector<std::pair<double, int>> pool = cand;
  std::partial_sort(pool.begin(), pool.begin() + count, pool.end());
  indices.resize(count);
  distances.resize(count);
  for (int i = 0; i < count; ++i) {
    indices[i] = pool[i].second;
    distances[i] = std::sqrt(std::max(pool[i].first, 0.0));
  }
}

}  // namespace

std::pair<std::vector<int>, std::vector<double>> nearest_patches(
    const Eigen::MatrixXd& cluster_vectors, int p, int t) {
  const int n = static_cast<int>(cluster_vectors.cols());
  if (p < 0 || p >= n) throw std::invalid_argument("nearest_patches: patch index out of range");
  if (t < 1) throw std::invalid_argument("nearest_patches: t must be >= 1");
  if (t > n) throw std::invalid_argument("nearest_patches: t exceeds cluster size");

  std::vector<std::pair<double, int>> cand;
  cand.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == p) continue;
    cand.emplace_back((cluster_vectors.col(j) - cluster_vectors.col(p)).squaredNorm(), j);
  }
  std::vector<int> indices;
  std::vector<double> distances;
  select_neighbors(cand, t - 1, indices, distances);
  return {std::move(indices), std::move(distances)};
}

std::vector<double> collab_weights(const std::vector<double>& distances) {
  if (distances.empty()) return {1.0};
  double raw_sum = 0.0;
  std::vector<double> weights(distances.size() + 1);
  for (std::size_t j = 0; j < distances.size(); ++j) {
    if (!(distances[j] >= 0.0)) throw std::invalid_argument("collab_weights: negative distance");
    weights[j] = 1.0 / std::max(distances[j], kDistanceFloor);
    raw_sum += weights[j];
  }
  for (std::size_t j = 0; j < distances.size(); ++j) weights[j] = 0.5 * weights[j] / raw_sum;
  weights.back() = 0.5;  // self contribution
  return weights;
}

Eigen::VectorXd update_lambda(const std::vector<Eigen::VectorXd>& neighbor_lambdas,
                              const Eigen::VectorXd& self_lambda,
                              const std::vector<double>& weights) {
  if (weights.size() != neighbor_lambdas.size() + 1)
    throw std::invalid_argument("update_lambda: weights/neighbors length mismatch");
  Eigen::VectorXd out = weights.back() * self_lambda;
  for (std::size_t j = 0; j < neighbor_lambdas.size(); ++j) {
    if (neighbor_lambdas[j].size() != self_lambda.size())
      throw std::invalid_argument("update_lambda: lambda length mismatch");
    out += weights[j] * neighbor_lambdas[j];
  }
  return out;
}

std::vector<SparseSolution> denoise_cluster(const Eigen::MatrixXd& cluster_vectors,
                                            const Dictionary& dict,
                                            const std::vector<double>& noise_variances,
                                            const DenoiseConfig& cfg) {
  const int n = static_cast<int>(cluster_vectors.cols());
  if (n == 0) throw std::invalid_argument("denoise_cluster: empty cluster");
  if (cluster_vectors.rows() != dict.atom_dim())
    throw std::invalid_argument("denoise_cluster: patch/dictionary dimension mismatch");
  if (noise_variances.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("denoise_cluster: noise variance per patch required");

  const int M = dict.num_atoms();
  const Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;

  // uniform initial activity prior and the per-cluster coefficient variance
  const double lambda0 =
      std::min(1.0, static_cast<double>(cfg.ksvd_sparsity) / static_cast<double>(M));
  const double mean_energy = cluster_vectors.colwise().squaredNorm().mean();
  const double coeff_var = std::max(mean_energy / cfg.ksvd_sparsity, 1e-12);

  auto solve = [&](int i, const Eigen::VectorXd& lambda) {
    ActivityPrior prior{lambda, coeff_var, std::max(noise_variances[i], 1e-12)};
    return bmp_estimate(dict, cluster_vectors.col(i), prior, cfg.max_support, cfg.beam_width,
                        &gram);
  };

  std::vector<SparseSolution> solutions(static_cast<std::size_t>(n));
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(M, lambda0);
  parallel_for(static_cast<std::size_t>(n), 16, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) solutions[i] = solve(static_cast<int>(i), uniform);
  });

  const int t_eff = std::min(cfg.collab_t, n);
  if (t_eff <= 1 || cfg.collab_rounds <= 0) return solutions;

  // neighbor search, blocked so the distance buffer stays bounded
  std::vector<std::vector<int>> nbr_idx(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> nbr_dist(static_cast<std::size_t>(n));
  {
    const Eigen::VectorXd sqn = cluster_vectors.colwise().squaredNorm();
    const int chunk = std::max<int>(1, std::min<int>(n, static_cast<int>(2'000'000 / (n + 1)) + 1));
    std::vector<int> starts;
    for (int b = 0; b < n; b += chunk) starts.push_back(b);
    parallel_for(starts.size(), 1, [&](std::size_t sb, std::size_t se) {
      std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(n) - 1);
      for (std::size_t s = sb; s < se; ++s) {
        const int b = starts[s];
        const int len = std::min(chunk, n - b);
        // d2(i, j) = |v_i|^2 + |v_j|^2 - 2 v_i . v_j
        Eigen::MatrixXd dots = cluster_vectors.middleCols(b, len).transpose() * cluster_vectors;
        for (int r = 0; r < len; ++r) {
          const int p = b + r;
          std::size_t q = 0;
          for (int j = 0; j < n; ++j) {
            if (j == p) continue;
            cand[q++] = {sqn[p] + sqn[j] - 2.0 * dots(r, j), j};
          }
          select_neighbors(cand, t_eff - 1, nbr_idx[p], nbr_dist[p]);
        }
      }
    });
  }

  for (int round = 0; round < cfg.collab_rounds; ++round) {
    // Jacobi-style: all updates in a round read the pre-round posteriors
    std::vector<Eigen::VectorXd> snapshot(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) snapshot[i] = solutions[i].posterior_lambda;

    parallel_for(static_cast<std::size_t>(n), 16, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::vector<double> weights = collab_weights(nbr_dist[i]);
        std::vector<Eigen::VectorXd> neighbor_lambdas;
        neighbor_lambdas.reserve(nbr_idx[i].size());
        for (int j : nbr_idx[i]) neighbor_lambdas.push_back(snapshot[j]);
        const Eigen::VectorXd updated = update_lambda(neighbor_lambdas, snapshot[i], weights);
        solutions[i] = solve(static_cast<int>(i), updated);
      }
    });
  }
  return solutions;
}

}  // namespace cofib
